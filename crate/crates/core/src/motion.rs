//! Motion as promise rewiring.
//!
//! Kind 1 moves an agent through a chain by renegotiating its adjacencies.
//! Kind 2 rebinds a material agent from one skeleton agent to a neighbour.
//! Kind 3 hands a scalar promise from one agent to a neighbour. A [`Trace`]
//! records what a single observer sees of a moving property.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{AgentId, BodyKind, ModelError, Polarity, Promise, PromiseBody, World};
use crate::topology::{hop_distances, undirected_neighbours};

pub const RIGHT: &str = "R";
pub const LEFT: &str = "L";
/// Attribute marking agents that ride on the skeleton in kind-2 motion.
pub const CLASS_KEY: &str = "class";
pub const MATERIAL: &str = "material";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MotionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0} carries no momentum")]
    NoMomentum(AgentId),
    #[error("{0} has no neighbour to move past")]
    AtBoundary(AgentId),
    #[error("{material} is not bound to {skeleton}")]
    NotBound {
        material: AgentId,
        skeleton: AgentId,
    },
    #[error("{to} is not adjacent to {from}")]
    NotAdjacent { from: AgentId, to: AgentId },
    #[error("property {label} is not promised where expected")]
    NoSuchProperty {
        agent: Option<AgentId>,
        label: String,
    },
    #[error("trace needs two samples with distinct ticks")]
    DegenerateTrace,
    #[error("chain invariant violated: {0}")]
    BrokenChain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Heading {
    Right,
    Left,
}

impl Heading {
    /// (forward, backward) adjacency directions.
    fn dirs(self) -> (&'static str, &'static str) {
        match self {
            Heading::Right => (RIGHT, LEFT),
            Heading::Left => (LEFT, RIGHT),
        }
    }

    pub fn momentum_label(self) -> &'static str {
        match self {
            Heading::Right => "p_R",
            Heading::Left => "p_L",
        }
    }
}

/// A world whose `R`/`L` adjacencies form disjoint chains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeWorld {
    world: World,
}

impl LatticeWorld {
    pub fn new(world: World) -> Result<LatticeWorld, MotionError> {
        check_chain(&world)?;
        Ok(LatticeWorld { world })
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn into_world(self) -> World {
        self.world
    }

    /// Momentum promises as (agent, heading) pairs.
    pub fn momenta(&self) -> BTreeSet<(AgentId, Heading)> {
        self.world
            .promises()
            .iter()
            .filter(|p| p.polarity == Polarity::Plus && p.body.kind == BodyKind::Scalar)
            .filter_map(|p| {
                let h = match p.body.label.as_str() {
                    "p_R" => Heading::Right,
                    "p_L" => Heading::Left,
                    _ => return None,
                };
                Some((p.promiser.clone(), h))
            })
            .collect()
    }

    /// Agents of each chain from its left end, chains ordered by left end.
    pub fn chains(&self) -> Vec<Vec<AgentId>> {
        let succ = successors(&self.world, RIGHT);
        let has_pred: BTreeSet<&AgentId> = succ.values().flatten().collect();
        self.world
            .agents()
            .filter(|a| !has_pred.contains(a))
            .map(|start| {
                let mut chain = vec![start.clone()];
                while let Some(next) = succ
                    .get(chain.last().expect("nonempty"))
                    .and_then(|s| s.iter().next())
                {
                    chain.push(next.clone());
                }
                chain
            })
            .collect()
    }

    /// Replaces the agent's momentum with a single promise of `heading`,
    /// promised to every other agent and visible to all.
    pub fn give_momentum(
        &self,
        agent: &AgentId,
        heading: Heading,
    ) -> Result<LatticeWorld, MotionError> {
        self.world.require(agent)?;
        let mut w = self.world.clone();
        let old: Vec<Promise> = w
            .promises()
            .iter()
            .filter(|p| &p.promiser == agent && p.body.kind == BodyKind::Scalar)
            .filter(|p| p.body.label == "p_R" || p.body.label == "p_L")
            .cloned()
            .collect();
        for p in &old {
            w.remove_promise(p);
        }
        let everyone: BTreeSet<AgentId> = w.agents().cloned().collect();
        for other in everyone.iter().filter(|o| *o != agent) {
            let p = Promise::plus(agent, PromiseBody::scalar(heading.momentum_label()), other)
                .with_scope(everyone.iter().cloned());
            w.push_unique(p);
        }
        Ok(LatticeWorld { world: w })
    }
}

fn successors(w: &World, dir: &str) -> BTreeMap<AgentId, BTreeSet<AgentId>> {
    let mut out: BTreeMap<AgentId, BTreeSet<AgentId>> = BTreeMap::new();
    for p in w.promises().iter().filter(|p| p.offers_adjacency(dir)) {
        out.entry(p.promiser.clone())
            .or_default()
            .insert(p.promisee.clone());
    }
    out
}

fn unique_successor(w: &World, a: &AgentId, dir: &str) -> Option<AgentId> {
    let mut it = w
        .promises()
        .iter()
        .filter(|p| &p.promiser == a && p.offers_adjacency(dir))
        .map(|p| p.promisee.clone());
    it.next()
}

/// At most one successor per direction, `L` the inverse of `R`, and every
/// `R`/`L` adjacency promise matched by its complement.
pub fn check_chain(w: &World) -> Result<(), MotionError> {
    let r = successors(w, RIGHT);
    let l = successors(w, LEFT);
    for (dir, succ) in [(RIGHT, &r), (LEFT, &l)] {
        if let Some((a, s)) = succ.iter().find(|(_, s)| s.len() > 1) {
            return Err(MotionError::BrokenChain(format!(
                "{a} has {} {dir}-successors",
                s.len()
            )));
        }
    }
    for (a, s) in &r {
        for b in s {
            if !l.get(b).is_some_and(|back| back.contains(a)) {
                return Err(MotionError::BrokenChain(format!(
                    "{a} -R-> {b} has no L inverse"
                )));
            }
        }
    }
    for (b, s) in &l {
        for a in s {
            if !r.get(a).is_some_and(|fwd| fwd.contains(b)) {
                return Err(MotionError::BrokenChain(format!(
                    "{b} -L-> {a} has no R inverse"
                )));
            }
        }
    }
    if let Some(p) = dangling_halves(w).first() {
        return Err(MotionError::BrokenChain(format!(
            "dangling half-binding {p}"
        )));
    }
    Ok(())
}

/// `R`/`L` adjacency promises whose complement is missing.
pub fn dangling_halves(w: &World) -> Vec<Promise> {
    w.promises()
        .iter()
        .filter(|p| {
            p.is_adjacency() && matches!(p.body.direction.as_deref(), Some(RIGHT) | Some(LEFT))
        })
        .filter(|p| !w.contains_promise(&p.complement()))
        .cloned()
        .collect()
}

fn adj(from: &AgentId, pol: Polarity, dir: &str, to: &AgentId) -> Promise {
    Promise::new(from.clone(), pol, PromiseBody::adjacency(dir), to.clone())
}

/// Moves the mover one place along its momentum by swapping it with its
/// forward neighbour. `P M N Q` becomes `P N M Q`; `P` and `Q` may be absent.
pub fn step_kind1(lw: &LatticeWorld, mover: &AgentId) -> Result<LatticeWorld, MotionError> {
    let w0 = lw.world();
    w0.require(mover)?;
    let heading = lw
        .momenta()
        .into_iter()
        .find(|(a, _)| a == mover)
        .map(|(_, h)| h)
        .ok_or_else(|| MotionError::NoMomentum(mover.clone()))?;
    let (fwd, back) = heading.dirs();
    let m = mover;
    let n = unique_successor(w0, m, fwd).ok_or_else(|| MotionError::AtBoundary(m.clone()))?;
    let p = unique_successor(w0, m, back);
    let q = unique_successor(w0, &n, fwd);

    let mut w = w0.clone();
    use Polarity::{Minus, Plus};
    // 3: momentum is incompatible with accepting the rear neighbour.
    if let Some(p) = &p {
        w.remove_promise(&adj(m, Minus, fwd, p));
    }
    // 4: the rear neighbour redirects its offer to N, which accepts it.
    if let Some(p) = &p {
        w.remove_promise(&adj(p, Plus, fwd, m));
        w.push_unique(adj(p, Plus, fwd, &n));
        w.push_unique(adj(&n, Minus, fwd, p));
    }
    // 5: M stops offering to N, accepts from N, and offers to Q.
    w.remove_promise(&adj(m, Plus, fwd, &n));
    w.push_unique(adj(m, Minus, fwd, &n));
    if let Some(q) = &q {
        w.push_unique(adj(m, Plus, fwd, q));
        // 6: Q accepts M in place of N; N releases Q.
        w.remove_promise(&adj(q, Minus, fwd, &n));
        w.push_unique(adj(q, Minus, fwd, m));
        w.remove_promise(&adj(&n, Plus, fwd, q));
    }
    // 7: N stops accepting from M and offers to it.
    w.remove_promise(&adj(&n, Minus, fwd, m));
    w.push_unique(adj(&n, Plus, fwd, m));
    // 8: backward adjacencies follow the new order.
    let old_order: Vec<&AgentId> = p.iter().chain([m, &n]).chain(q.iter()).collect();
    for pair in old_order.windows(2) {
        w.remove_promise(&adj(pair[1], Plus, back, pair[0]));
        w.remove_promise(&adj(pair[0], Minus, back, pair[1]));
    }
    let new_order: Vec<&AgentId> = p.iter().chain([&n, m]).chain(q.iter()).collect();
    for pair in new_order.windows(2) {
        w.push_unique(adj(pair[1], Plus, back, pair[0]));
        w.push_unique(adj(pair[0], Minus, back, pair[1]));
    }
    // A half-binding with no partner is a loose end: drop it.
    for loose in dangling_halves(&w) {
        w.remove_promise(&loose);
    }
    check_chain(&w)?;
    Ok(LatticeWorld { world: w })
}

fn bound_to(w: &World, a: &AgentId, b: &AgentId) -> bool {
    w.promises().iter().any(|p| {
        p.is_adjacency()
            && ((&p.promiser == a && &p.promisee == b) || (&p.promiser == b && &p.promisee == a))
    })
}

pub fn is_material(w: &World, a: &AgentId) -> bool {
    w.attribute(a, CLASS_KEY) == Some(MATERIAL)
}

/// Withdraws the material agent's adjacency promises with `from` and makes
/// the same promises with `to`. The skeleton is untouched.
pub fn step_kind2(
    w: &World,
    material: &AgentId,
    from: &AgentId,
    to: &AgentId,
) -> Result<World, MotionError> {
    for a in [material, from, to] {
        w.require(a)?;
    }
    if !bound_to(w, material, from) {
        return Err(MotionError::NotBound {
            material: material.clone(),
            skeleton: from.clone(),
        });
    }
    if to == from {
        return Ok(w.clone());
    }
    if to == material || is_material(w, to) || !bound_to(w, from, to) {
        return Err(MotionError::NotAdjacent {
            from: from.clone(),
            to: to.clone(),
        });
    }
    let swap = |a: &AgentId| if a == from { to.clone() } else { a.clone() };
    let mut out = w.clone();
    out.rewrite_promises(|p| {
        let between = p.is_adjacency()
            && ((&p.promiser == material && &p.promisee == from)
                || (&p.promiser == from && &p.promisee == material));
        between.then(|| p.renamed(swap))
    });
    Ok(out)
}

/// Hands every scalar `label` promise made by `from` over to `to`, swapping
/// the two agents wherever they appear in those promises. If `to` already
/// makes an identical promise the two merge.
pub fn step_kind3(
    w: &World,
    label: &str,
    from: &AgentId,
    to: &AgentId,
) -> Result<World, MotionError> {
    w.require(from)?;
    w.require(to)?;
    let carries = |p: &Promise| {
        &p.promiser == from && p.body.kind == BodyKind::Scalar && p.body.label == label
    };
    if !w.promises().iter().any(carries) {
        return Err(MotionError::NoSuchProperty {
            agent: Some(from.clone()),
            label: label.to_string(),
        });
    }
    if to == from {
        return Ok(w.clone());
    }
    if !bound_to(w, from, to) {
        return Err(MotionError::NotAdjacent {
            from: from.clone(),
            to: to.clone(),
        });
    }
    let swap = |a: &AgentId| {
        if a == from {
            to.clone()
        } else if a == to {
            from.clone()
        } else {
            a.clone()
        }
    };
    let mut out = w.clone();
    out.rewrite_promises(|p| carries(p).then(|| p.renamed(swap)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub tick: u64,
    pub agent: AgentId,
    /// Hop distance from where the property started.
    pub x: u64,
}

/// What one observer saw of a moving property. Ticks strictly increase.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub samples: Vec<Sample>,
}

/// `(x_last - x_first) / (t_last - t_first)` in hops per tick.
pub fn observe_speed(t: &Trace) -> Result<Rational64, MotionError> {
    let (first, last) = match (t.samples.first(), t.samples.last()) {
        (Some(f), Some(l)) if t.samples.len() >= 2 => (f, l),
        _ => return Err(MotionError::DegenerateTrace),
    };
    let dt = last.tick as i64 - first.tick as i64;
    if dt == 0 {
        return Err(MotionError::DegenerateTrace);
    }
    Ok(Rational64::new(last.x as i64 - first.x as i64, dt))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathPolicy {
    /// Always step to the least neighbour farther from the start.
    Direct,
    /// Each tick, step to a uniformly chosen neighbour or let the tick pass.
    RandomWalk,
}

/// Moves the property `label` by kind-3 steps for up to `steps` ticks and
/// returns the observer's view. A tick the observer cannot see the property
/// in is not counted; an idle tick of the random walk is counted but leaves
/// no sample.
pub fn run_transport(
    w: &World,
    label: &str,
    policy: PathPolicy,
    observer: &AgentId,
    steps: usize,
    seed: u64,
) -> Result<(World, Trace), MotionError> {
    w.require(observer)?;
    let carrier_of = |w: &World| {
        w.promises()
            .iter()
            .find(|p| {
                p.polarity == Polarity::Plus
                    && p.body.kind == BodyKind::Scalar
                    && p.body.label == label
            })
            .map(|p| (p.promiser.clone(), p.scope.contains(observer)))
    };
    let (start, _) = carrier_of(w).ok_or_else(|| MotionError::NoSuchProperty {
        agent: None,
        label: label.to_string(),
    })?;
    let dist = hop_distances(w, &start);
    let x_of = |a: &AgentId| dist.get(a).copied().unwrap_or(0) as u64;
    let nb = undirected_neighbours(w);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut cur_world = w.clone();
    let mut here = start.clone();
    let mut tick = 0u64;
    let mut trace = Trace {
        samples: vec![Sample {
            tick,
            agent: start.clone(),
            x: 0,
        }],
    };
    for _ in 0..steps {
        let options: Vec<&AgentId> = nb[&here].iter().collect();
        let next = match policy {
            PathPolicy::Direct => options
                .into_iter()
                .find(|v| dist.get(*v) > dist.get(&here))
                .cloned(),
            PathPolicy::RandomWalk => {
                let pick = rng.random_range(0..=options.len());
                match options.get(pick) {
                    Some(v) => Some((*v).clone()),
                    None => {
                        tick += 1;
                        continue;
                    }
                }
            }
        };
        let Some(next) = next else { break };
        let before_visible = carrier_of(&cur_world).is_some_and(|(_, seen)| seen);
        cur_world = step_kind3(&cur_world, label, &here, &next)?;
        here = next;
        let after_visible = carrier_of(&cur_world).is_some_and(|(_, seen)| seen);
        if before_visible || after_visible {
            tick += 1;
            trace.samples.push(Sample {
                tick,
                agent: here.clone(),
                x: x_of(&here),
            });
        }
    }
    Ok((cur_world, trace))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionKind {
    First,
    Second,
    Third,
}

/// Seeded random motion for `steps` rounds.
///
/// Kind 1 kicks a random agent in a random direction and moves it. Kind 2
/// moves a random material agent to a random skeleton neighbour of its
/// home. Kind 3 moves `label` to a random neighbour of its carrier. Moves
/// that hit a boundary are skipped. Returns the final world and the number
/// of successful moves.
pub fn simulate(
    w: &World,
    kind: MotionKind,
    steps: usize,
    seed: u64,
    label: Option<&str>,
) -> Result<(World, usize), MotionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut moved = 0;
    match kind {
        MotionKind::First => {
            let mut lw = LatticeWorld::new(w.clone())?;
            let agents = w.agent_ids();
            if agents.is_empty() {
                return Ok((w.clone(), 0));
            }
            for _ in 0..steps {
                let a = &agents[rng.random_range(0..agents.len())];
                let h = if rng.random_bool(0.5) {
                    Heading::Right
                } else {
                    Heading::Left
                };
                lw = lw.give_momentum(a, h)?;
                match step_kind1(&lw, a) {
                    Ok(next) => {
                        lw = next;
                        moved += 1;
                    }
                    Err(MotionError::AtBoundary(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok((lw.into_world(), moved))
        }
        MotionKind::Second => {
            let mut cur = w.clone();
            let materials: Vec<AgentId> =
                w.agents().filter(|a| is_material(w, a)).cloned().collect();
            if materials.is_empty() {
                return Ok((cur, 0));
            }
            for _ in 0..steps {
                let m = &materials[rng.random_range(0..materials.len())];
                let nb = undirected_neighbours(&cur);
                let homes: Vec<&AgentId> = nb[m].iter().filter(|h| !is_material(&cur, h)).collect();
                let Some(home) = homes.first().copied() else {
                    continue;
                };
                let targets: Vec<&AgentId> =
                    nb[home].iter().filter(|t| !is_material(&cur, t)).collect();
                if targets.is_empty() {
                    continue;
                }
                let to = targets[rng.random_range(0..targets.len())].clone();
                cur = step_kind2(&cur, m, &home.clone(), &to)?;
                moved += 1;
            }
            Ok((cur, moved))
        }
        MotionKind::Third => {
            let label = label.ok_or_else(|| MotionError::NoSuchProperty {
                agent: None,
                label: String::new(),
            })?;
            let mut cur = w.clone();
            for _ in 0..steps {
                let carrier = cur
                    .promises()
                    .iter()
                    .find(|p| p.body.kind == BodyKind::Scalar && p.body.label == label)
                    .map(|p| p.promiser.clone())
                    .ok_or_else(|| MotionError::NoSuchProperty {
                        agent: None,
                        label: label.to_string(),
                    })?;
                let nb = undirected_neighbours(&cur);
                let options: Vec<&AgentId> = nb[&carrier].iter().collect();
                if options.is_empty() {
                    break;
                }
                let to = options[rng.random_range(0..options.len())].clone();
                cur = step_kind3(&cur, label, &carrier, &to)?;
                moved += 1;
            }
            Ok((cur, moved))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{aid, Attributes};

    fn chain(names: &[&str]) -> LatticeWorld {
        LatticeWorld::new(fixtures::directed_chain(names, RIGHT, LEFT)).unwrap()
    }

    fn order(lw: &LatticeWorld) -> Vec<String> {
        lw.chains()[0].iter().map(|a| a.to_string()).collect()
    }

    #[test]
    fn kind1_swaps_mover_with_successor() {
        let lw = chain(&["A", "B", "C", "D"])
            .give_momentum(&aid("B"), Heading::Right)
            .unwrap();
        let out = step_kind1(&lw, &aid("B")).unwrap();
        assert_eq!(order(&out), ["A", "C", "B", "D"]);
        assert!(dangling_halves(out.world()).is_empty());
        assert!(out.momenta().contains(&(aid("B"), Heading::Right)));
        // Same structure as building the permuted chain directly.
        let direct = fixtures::directed_chain(&["A", "C", "B", "D"], RIGHT, LEFT);
        let adj_only = |w: &World| -> BTreeSet<Promise> {
            w.promises()
                .iter()
                .filter(|p| p.is_adjacency())
                .cloned()
                .collect()
        };
        assert_eq!(adj_only(out.world()), adj_only(&direct));
    }

    #[test]
    fn kind1_left_is_mirrored() {
        let lw = chain(&["A", "B", "C", "D"])
            .give_momentum(&aid("C"), Heading::Left)
            .unwrap();
        let out = step_kind1(&lw, &aid("C")).unwrap();
        assert_eq!(order(&out), ["A", "C", "B", "D"]);
    }

    #[test]
    fn kind1_at_right_edge_halts() {
        let lw = chain(&["A", "B", "C"])
            .give_momentum(&aid("C"), Heading::Right)
            .unwrap();
        assert_eq!(
            step_kind1(&lw, &aid("C")),
            Err(MotionError::AtBoundary(aid("C")))
        );
    }

    #[test]
    fn kind1_needs_momentum() {
        let lw = chain(&["A", "B"]);
        assert_eq!(
            step_kind1(&lw, &aid("A")),
            Err(MotionError::NoMomentum(aid("A")))
        );
    }

    #[test]
    fn kind1_ends_of_chain() {
        let lw = chain(&["A", "B", "C"])
            .give_momentum(&aid("A"), Heading::Right)
            .unwrap();
        assert_eq!(order(&step_kind1(&lw, &aid("A")).unwrap()), ["B", "A", "C"]);
        let lw = chain(&["A", "B", "C"])
            .give_momentum(&aid("B"), Heading::Right)
            .unwrap();
        assert_eq!(order(&step_kind1(&lw, &aid("B")).unwrap()), ["A", "C", "B"]);
    }

    fn skeleton_with_material() -> World {
        let w = fixtures::undirected_chain(&["S1", "S2", "S3"]);
        let mut attrs = Attributes::new();
        attrs.insert(CLASS_KEY.into(), MATERIAL.into());
        w.add_agent(aid("M1"), attrs)
            .unwrap()
            .bind_adjacency(&aid("M1"), &aid("S1"), "home")
            .unwrap()
    }

    #[test]
    fn kind2_rebinds_material() {
        let w = skeleton_with_material();
        let out = step_kind2(&w, &aid("M1"), &aid("S1"), &aid("S2")).unwrap();
        assert!(out.binding(&aid("M1"), &aid("S2"), "adj_home").is_some());
        assert!(out.binding(&aid("M1"), &aid("S1"), "adj_home").is_none());
        assert_eq!(out.promises().len(), w.promises().len());
        assert_eq!(
            step_kind2(&w, &aid("M1"), &aid("S1"), &aid("S1")).unwrap(),
            w
        );
        assert!(matches!(
            step_kind2(&w, &aid("M1"), &aid("S1"), &aid("S3")),
            Err(MotionError::NotAdjacent { .. })
        ));
        assert!(matches!(
            step_kind2(&w, &aid("M1"), &aid("S2"), &aid("S3")),
            Err(MotionError::NotBound { .. })
        ));
    }

    fn blue_line() -> World {
        let w = fixtures::undirected_chain(&["A", "B", "C"]);
        w.make_promise(Promise::plus(
            &aid("A"),
            PromiseBody::scalar("blue"),
            &aid("B"),
        ))
        .unwrap()
    }

    #[test]
    fn kind3_moves_property() {
        let w = blue_line();
        let out = step_kind3(&w, "blue", &aid("A"), &aid("B")).unwrap();
        assert_eq!(out.scalar_promises(&aid("B")).count(), 1);
        assert_eq!(out.scalar_promises(&aid("A")).count(), 0);
        assert!(matches!(
            step_kind3(&w, "blue", &aid("A"), &aid("C")),
            Err(MotionError::NotAdjacent { .. })
        ));
        let back = step_kind3(&out, "blue", &aid("B"), &aid("A")).unwrap();
        assert_eq!(back, w);
        assert!(matches!(
            step_kind3(&w, "red", &aid("A"), &aid("B")),
            Err(MotionError::NoSuchProperty { .. })
        ));
    }

    fn sample(tick: u64, x: u64) -> Sample {
        Sample {
            tick,
            agent: aid("a"),
            x,
        }
    }

    #[test]
    fn speed_formula() {
        let one_hop = Trace {
            samples: vec![sample(0, 0), sample(1, 1)],
        };
        assert_eq!(
            observe_speed(&one_hop).unwrap(),
            Rational64::from_integer(1)
        );
        let idle = Trace {
            samples: vec![sample(0, 0), sample(4, 1)],
        };
        assert_eq!(observe_speed(&idle).unwrap(), Rational64::new(1, 4));
        let single = Trace {
            samples: vec![sample(0, 0)],
        };
        assert_eq!(observe_speed(&single), Err(MotionError::DegenerateTrace));
    }

    fn visible_blue(names: &[&str]) -> World {
        let w = fixtures::directed_chain(names, RIGHT, LEFT);
        let all: Vec<AgentId> = w.agent_ids();
        w.make_promise(
            Promise::plus(&all[0], PromiseBody::scalar("blue"), &all[1]).with_scope(all.clone()),
        )
        .unwrap()
    }

    #[test]
    fn direct_transport_has_unit_speed() {
        let w = visible_blue(&["a", "b", "c", "d", "e"]);
        let (_, t) = run_transport(&w, "blue", PathPolicy::Direct, &aid("c"), 10, 0).unwrap();
        assert_eq!(t.samples.len(), 5);
        assert_eq!(observe_speed(&t).unwrap(), Rational64::from_integer(1));
    }

    #[test]
    fn random_transport_is_deterministic_and_bounded() {
        let w = visible_blue(&["a", "b", "c", "d", "e"]);
        let run =
            |seed| run_transport(&w, "blue", PathPolicy::RandomWalk, &aid("c"), 30, seed).unwrap();
        assert_eq!(run(7), run(7));
        for seed in 0..20 {
            if let Ok(v) = observe_speed(&run(seed).1) {
                assert!(v <= Rational64::from_integer(1));
            }
        }
    }

    #[test]
    fn simulate_kind1_keeps_agents() {
        let w = fixtures::directed_chain(&["a", "b", "c", "d", "e"], RIGHT, LEFT);
        let (out, _) = simulate(&w, MotionKind::First, 50, 3, None).unwrap();
        assert_eq!(out.agent_ids(), w.agent_ids());
        check_chain(&out).unwrap();
    }
}
