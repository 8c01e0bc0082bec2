//! Small reference worlds: the four-vertex digraph, the five-vertex
//! appendix graph with its bases, the meeting scenario and the diagnostic
//! story. Shared by tests, benchmarks and the command-line tool.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;
use rand::seq::IndexedRandom;
use rand::Rng;

use crate::coordinates::{Edge, MatroidBasis};
use crate::model::{
    aid, AgentId, AssociationClass, AssociationType, Attributes, Polarity, Promise, PromiseBody,
    World,
};
use crate::semantics::associate;

pub fn ids(names: &[&str]) -> Vec<AgentId> {
    names.iter().map(|n| aid(n)).collect()
}

fn agents(names: &[&str]) -> World {
    names.iter().fold(World::new(), |w, n| {
        w.add_agent(aid(n), Attributes::new())
            .expect("distinct names")
    })
}

fn edge(a: &str, b: &str) -> Edge {
    Edge::new(aid(a), aid(b))
}

/// Digraph on 1..4 with arcs 1→2, 1→3, 2→3, 3→1, 3→2 and a loop at 4.
/// Arcs out of one node carry distinct directions (`a`, `b`) so each has a
/// unique successor per direction.
pub fn g4() -> World {
    let mut w = agents(&["1", "2", "3", "4"]);
    for (from, to, dir) in [
        ("1", "2", "a"),
        ("1", "3", "b"),
        ("2", "3", "a"),
        ("3", "1", "a"),
        ("3", "2", "b"),
    ] {
        w = w
            .make_promise(Promise::plus(
                &aid(from),
                PromiseBody::adjacency(dir),
                &aid(to),
            ))
            .expect("fixture promise");
    }
    w.make_promise(Promise::plus(
        &aid("4"),
        PromiseBody::self_loop(),
        &aid("4"),
    ))
    .expect("fixture promise")
}

/// The function `f = (1, 7, 0, 4)` on the vertices of [`g4`].
pub fn g4_function() -> BTreeMap<AgentId, Rational64> {
    ids(&["1", "2", "3", "4"])
        .into_iter()
        .zip([1, 7, 0, 4])
        .map(|(a, v)| (a, Rational64::from_integer(v)))
        .collect()
}

/// Five vertices: a loop at v1, the path v1–v2–v3–v4 and the branch v3–v5.
pub fn dimgraph0() -> World {
    let mut w = agents(&["v1", "v2", "v3", "v4", "v5"]);
    w = w
        .make_promise(Promise::plus(
            &aid("v1"),
            PromiseBody::self_loop(),
            &aid("v1"),
        ))
        .expect("fixture promise");
    for (a, b) in [("v1", "v2"), ("v2", "v3"), ("v3", "v4"), ("v3", "v5")] {
        w = w
            .bind_adjacency(&aid(a), &aid(b), "u")
            .expect("fixture binding");
    }
    w
}

/// [`dimgraph0`] plus the chord v4–v5, closing the cycle v3–v4–v5.
pub fn dimgraph0_with_cycle() -> World {
    dimgraph0()
        .bind_adjacency(&aid("v4"), &aid("v5"), "u")
        .expect("fixture binding")
}

/// Rank 3: the loop, then two overlapping branches sharing v1–v2–v3.
pub fn example1_basis() -> MatroidBasis {
    MatroidBasis::new(
        aid("v1"),
        vec![
            [edge("v1", "v1")].into(),
            [edge("v1", "v2"), edge("v2", "v3"), edge("v3", "v4")].into(),
            [edge("v1", "v2"), edge("v2", "v3"), edge("v3", "v5")].into(),
        ],
    )
}

/// Rank 4 with disjoint sets.
pub fn example2_basis() -> MatroidBasis {
    MatroidBasis::new(
        aid("v1"),
        vec![
            [edge("v1", "v1")].into(),
            [edge("v1", "v2"), edge("v2", "v3")].into(),
            [edge("v3", "v4")].into(),
            [edge("v3", "v5")].into(),
        ],
    )
}

/// Rank 3 with disjoint sets: the loop, the first edge, then the rest.
pub fn example3_basis() -> MatroidBasis {
    MatroidBasis::new(
        aid("v1"),
        vec![
            [edge("v1", "v1")].into(),
            [edge("v1", "v2")].into(),
            [edge("v2", "v3"), edge("v3", "v4"), edge("v3", "v5")].into(),
        ],
    )
}

/// The path v1..v4 with one set per edge.
pub fn bent_line() -> (World, MatroidBasis) {
    let w = undirected_chain(&["v1", "v2", "v3", "v4"]);
    let b = MatroidBasis::new(
        aid("v1"),
        vec![
            [edge("v1", "v2")].into(),
            [edge("v2", "v3")].into(),
            [edge("v3", "v4")].into(),
        ],
    );
    (w, b)
}

/// Consecutive agents bound symmetrically along direction `x`.
pub fn undirected_chain(names: &[&str]) -> World {
    let mut w = agents(names);
    for pair in names.windows(2) {
        w = w
            .bind_adjacency(&aid(pair[0]), &aid(pair[1]), "x")
            .expect("fixture binding");
    }
    w
}

/// Consecutive agents linked with `forward` pointing along the list and
/// `backward` pointing against it.
pub fn directed_chain(names: &[&str], forward: &str, backward: &str) -> World {
    let mut w = agents(names);
    for pair in names.windows(2) {
        w.insert_directed_link(&aid(pair[0]), &aid(pair[1]), forward, backward)
            .expect("fixture link");
    }
    w
}

/// Every pair bound along `x`.
pub fn clique(names: &[&str]) -> World {
    let mut w = agents(names);
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            w = w
                .bind_adjacency(&aid(a), &aid(b), "x")
                .expect("fixture binding");
        }
    }
    w
}

/// Two triangles a1..a3 and b1..b3 joined by the single binding a3–b1.
pub fn bridged_triangles() -> World {
    let mut w = agents(&["a1", "a2", "a3", "b1", "b2", "b3"]);
    for group in [["a1", "a2", "a3"], ["b1", "b2", "b3"]] {
        for (i, a) in group.iter().enumerate() {
            for b in &group[i + 1..] {
                w = w
                    .bind_adjacency(&aid(a), &aid(b), "x")
                    .expect("fixture binding");
            }
        }
    }
    w.bind_adjacency(&aid("a3"), &aid("b1"), "x")
        .expect("fixture binding")
}

fn offer(from: &str, to: &str, label: &str, days: &[&str]) -> Promise {
    Promise::plus(
        &aid(from),
        PromiseBody::vector(label).with_payload(days.iter().copied()),
        &aid(to),
    )
}

/// Four agents fixing a meeting day. A offers Wed/Fri to everyone; B and D
/// then agree Tue/Fri given `pi1`; C and D then agree Tue/Thu given `pi2`.
/// The later promises are relayed to A through their scope.
pub fn meeting() -> World {
    let mut w = agents(&["A", "B", "C", "D"]);
    let scoped = |p: Promise, extra: &str| {
        let mut s: BTreeSet<AgentId> = p.default_scope();
        s.insert(aid(extra));
        p.with_scope(s)
    };
    let mut promises = Vec::new();
    for to in ["B", "C", "D"] {
        promises.push(offer("A", to, "pi1", &["Wed", "Fri"]));
    }
    for (from, to) in [("B", "D"), ("D", "B")] {
        promises.push(scoped(
            offer(from, to, "pi2", &["Tue", "Fri"]).with_condition("pi1"),
            "A",
        ));
    }
    for (from, to) in [("C", "D"), ("D", "C")] {
        promises.push(scoped(
            offer(from, to, "pi3", &["Tue", "Thu"]).with_condition("pi2"),
            "A",
        ));
    }
    for p in promises {
        w = w.make_promise(p).expect("fixture promise");
    }
    w
}

/// The diagnostic chain from a signalling computer to a manufacturer.
pub fn story() -> World {
    let names = [
        "ComputerX",
        "error13",
        "disk-fault",
        "loss-of-power",
        "diesel-generator",
        "Acme-generator-company",
    ];
    let mut w = agents(&names);
    let signals = AssociationType::new(AssociationClass::Causation, "signals", "is-signalled-by");
    let stands = AssociationType::new(AssociationClass::Topology, "stands-for", "is-stood-for-by");
    let caused = AssociationType::new(AssociationClass::Causation, "can-be-caused-by", "can-cause");
    let made = AssociationType::new(
        AssociationClass::Causation,
        "is-manufactured-by",
        "manufactures",
    );
    let links = [&signals, &stands, &caused, &caused, &made];
    for (pair, t) in names.windows(2).zip(links) {
        w = associate(&w, &aid(pair[0]), &aid(pair[1]), t).expect("fixture association");
    }
    w
}

/// Random connected world on `n` agents `n00, n01, ...`: a random tree plus
/// up to `chords` extra bindings, all with direction `u`.
pub fn random_connected<R: Rng>(rng: &mut R, n: usize, chords: usize) -> World {
    let names: Vec<String> = (0..n).map(|i| format!("n{i:02}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut w = agents(&refs);
    for i in 1..n {
        let j = rng.random_range(0..i);
        w = w
            .bind_adjacency(&aid(&names[j]), &aid(&names[i]), "u")
            .expect("tree binding");
    }
    if n >= 2 {
        for _ in 0..chords {
            let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
            if a != b
                && w.binding(&aid(&names[a]), &aid(&names[b]), "adj_u")
                    .is_none()
            {
                w = w
                    .bind_adjacency(&aid(&names[a]), &aid(&names[b]), "u")
                    .expect("chord binding");
            }
        }
    }
    w
}

/// Random world exercising every statement of the text format: attributes,
/// associations, scalar and vector promises of both polarities, payloads,
/// scopes, conditions, self-loops and adjacency bindings.
pub fn random_world<R: Rng>(rng: &mut R) -> World {
    const WORDS: [&str; 6] = ["red", "blue", "Tue", "Wed", "x1", "pi"];
    let n = rng.random_range(1..=6);
    let mut w = World::new();
    for i in 0..n {
        let mut attrs = Attributes::new();
        if rng.random_bool(0.3) {
            attrs.insert(
                "colour".into(),
                WORDS.choose(rng).expect("words").to_string(),
            );
        }
        if rng.random_bool(0.2) {
            attrs.insert("k".into(), format!("v{}", rng.random_range(0..100)));
        }
        w = w
            .add_agent(aid(&format!("a{i}")), attrs)
            .expect("distinct ids");
    }
    if rng.random_bool(0.5) {
        let t = AssociationType::new(AssociationClass::Causation, "causes", "is-caused-by");
        w = w.register_association(t).expect("fresh association");
    }
    if rng.random_bool(0.3) {
        let t = AssociationType::new(AssociationClass::Containment, "contains", "is-part-of");
        w = w.register_association(t).expect("fresh association");
    }
    let ids = w.agent_ids();
    for _ in 0..rng.random_range(0..12) {
        let a = ids.choose(rng).expect("agents").clone();
        let b = ids.choose(rng).expect("agents").clone();
        let next = match rng.random_range(0..4) {
            0 if a != b => w.bind_adjacency(&a, &b, ["u", "x", "R"].choose(rng).expect("dirs")),
            1 => w.make_promise(Promise::plus(&a, PromiseBody::self_loop(), &a)),
            _ => {
                let label = WORDS.choose(rng).expect("words");
                let mut body = if rng.random_bool(0.5) {
                    PromiseBody::scalar(label)
                } else {
                    PromiseBody::vector(label)
                };
                if rng.random_bool(0.4) {
                    let k = rng.random_range(1..=3);
                    body = body.with_payload(WORDS.choose_multiple(rng, k).copied());
                }
                let polarity = if rng.random_bool(0.7) {
                    Polarity::Plus
                } else {
                    Polarity::Minus
                };
                let mut p = Promise::new(a.clone(), polarity, body, b.clone());
                if rng.random_bool(0.3) {
                    let mut scope = p.default_scope();
                    scope.insert(ids.choose(rng).expect("agents").clone());
                    p = p.with_scope(scope);
                }
                if rng.random_bool(0.2) {
                    p = p.with_condition(WORDS.choose(rng).expect("words"));
                }
                w.make_promise(p)
            }
        };
        if let Ok(next) = next {
            w = next;
        }
    }
    w
}
