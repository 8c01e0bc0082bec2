use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sst_core::fixtures::{self, random_world};
use sst_core::sstg::parse_sstg;
use sst_core::timeline::{
    build_causal_dag, concurrent, infer_overlap, observed_events, partition_worlds, replay,
    EventRecord,
};
use sst_core::{aid, AgentId, Promise, PromiseBody};

fn set(xs: &[&str]) -> BTreeSet<AgentId> {
    xs.iter().map(|x| aid(x)).collect()
}

fn days(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

#[test]
fn meeting_file_overlaps_on_tuesday() {
    let text = std::fs::read_to_string(format!(
        "{}/fixtures/meeting.sstg",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap();
    let w = parse_sstg(&text).unwrap();
    assert_eq!(w, fixtures::meeting());
    let got = infer_overlap(&w, &aid("A")).unwrap();
    let want: BTreeMap<_, _> = [
        (set(&["B", "C", "D"]), days(&["Tue"])),
        (set(&["A", "B", "C", "D"]), days(&[])),
    ]
    .into();
    assert_eq!(got, want);
}

#[test]
fn meeting_order_is_pi1_pi2_pi3() {
    let w = fixtures::meeting();
    let dag = build_causal_dag(&observed_events(&w, &aid("A")).unwrap()).unwrap();
    assert_eq!(dag.topological_order(), ["pi1", "pi2", "pi3"]);
    assert!(!concurrent(&dag, "pi1", "pi3").unwrap());
}

/// Events over labels `l0..l{n}` whose conditions only point to lower
/// labels, so the dependency graph is acyclic by construction.
fn acyclic_events(conds: &[Option<usize>]) -> Vec<EventRecord> {
    conds
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut p = Promise::plus(&aid("a"), PromiseBody::vector(&format!("l{i}")), &aid("b"));
            if let Some(j) = c.filter(|&j| j < i) {
                p = p.with_condition(&format!("l{j}"));
            }
            EventRecord {
                promise: p,
                observer: aid("a"),
                tick: i as u64,
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn concurrency_is_symmetric_and_irreflexive(conds in prop::collection::vec(prop::option::of(0usize..8), 1..8)) {
        let dag = build_causal_dag(&acyclic_events(&conds)).unwrap();
        for a in &dag.nodes {
            prop_assert!(!concurrent(&dag, a, a).unwrap());
            for b in &dag.nodes {
                prop_assert_eq!(concurrent(&dag, a, b).unwrap(), concurrent(&dag, b, a).unwrap());
                if a != b {
                    let ordered = dag.reaches(a, b) || dag.reaches(b, a);
                    prop_assert_eq!(concurrent(&dag, a, b).unwrap(), !ordered);
                }
            }
        }
    }

    #[test]
    fn topological_order_respects_every_dependency(conds in prop::collection::vec(prop::option::of(0usize..8), 1..8)) {
        let dag = build_causal_dag(&acyclic_events(&conds)).unwrap();
        let order = dag.topological_order();
        prop_assert_eq!(order.len(), dag.nodes.len());
        let pos: BTreeMap<&String, usize> = order.iter().enumerate().map(|(i, l)| (l, i)).collect();
        for (a, b) in &dag.edges {
            prop_assert!(pos[a] < pos[b]);
        }
    }

    #[test]
    fn observers_see_only_what_is_in_scope(seed in any::<u64>()) {
        let w = random_world(&mut ChaCha8Rng::seed_from_u64(seed));
        for o in w.agents() {
            for e in observed_events(&w, o).unwrap() {
                prop_assert!(e.promise.scope.contains(o));
            }
            let seen = observed_events(&w, o).unwrap().len();
            let in_scope = w.promises().iter().filter(|p| p.scope.contains(o)).count();
            prop_assert_eq!(seen, in_scope);
        }
    }

    #[test]
    fn partition_is_lossless_and_disjoint(seed in any::<u64>()) {
        let w = random_world(&mut ChaCha8Rng::seed_from_u64(seed));
        let parts = partition_worlds(&w);
        let mut agents = BTreeSet::new();
        let mut promises = 0;
        for part in &parts {
            for a in part.agents() {
                prop_assert!(agents.insert(a.clone()), "agent {} in two parts", a);
            }
            for p in part.promises() {
                prop_assert!(w.contains_promise(p));
                prop_assert!(part.contains_agent(&p.promisee));
                prop_assert!(p.scope.iter().all(|s| part.contains_agent(s)));
            }
            promises += part.promises().len();
        }
        prop_assert_eq!(agents.len(), w.agent_count());
        prop_assert_eq!(promises, w.promises().len());
    }

    #[test]
    fn replay_ticks_once_per_new_visible_promise(seed in any::<u64>()) {
        let w = random_world(&mut ChaCha8Rng::seed_from_u64(seed));
        let observer = w.agent_ids()[0].clone();
        let start = w.promises().iter().fold(w.clone(), |acc, p| acc.withdraw_promise(p));
        let (end, ticks) = replay(&start, &observer, w.promises()).unwrap();
        prop_assert_eq!(&end, &w);
        let visible = w.promises().iter().filter(|p| p.scope.contains(&observer)).count() as u64;
        prop_assert_eq!(ticks.last().copied().unwrap_or(0), visible);
        for pair in ticks.windows(2) {
            prop_assert!(pair[1] - pair[0] <= 1);
        }
    }
}
