//! Local time: per-agent clocks that tick on observable change, the causal
//! order induced by conditional promises, overlap of promised payloads as
//! seen by one observer, and the split of a world into causally separate
//! parts.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::model::{AgentId, ModelError, Polarity, Promise, World};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimelineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("conditional promises form a cycle: {}", .0.join(" -> "))]
    CyclicDependency(Vec<String>),
    #[error("label {0} is not in the causal graph")]
    UnknownLabel(String),
    #[error("event observed by {event} offered to the clock of {clock}")]
    ObserverMismatch { clock: AgentId, event: AgentId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalClock {
    pub agent: AgentId,
    pub tick: u64,
}

impl LocalClock {
    pub fn new(agent: AgentId) -> LocalClock {
        LocalClock { agent, tick: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRecord {
    pub promise: Promise,
    pub observer: AgentId,
    /// Observer tick at receipt.
    pub tick: u64,
}

/// Body labels ordered by conditional dependency: an edge `b2 -> b1` for
/// every promise `b1 | b2`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CausalDag {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
}

impl CausalDag {
    fn successors(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = self
            .nodes
            .iter()
            .map(|n| (n.as_str(), Vec::new()))
            .collect();
        for (a, b) in &self.edges {
            out.get_mut(a.as_str())
                .expect("edge endpoints are nodes")
                .push(b);
        }
        out
    }

    /// True iff a path of one or more edges leads from `a` to `b`.
    pub fn reaches(&self, a: &str, b: &str) -> bool {
        let succ = self.successors();
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut queue: VecDeque<&str> = succ.get(a).into_iter().flatten().copied().collect();
        while let Some(u) = queue.pop_front() {
            if u == b {
                return true;
            }
            if seen.insert(u) {
                queue.extend(succ.get(u).into_iter().flatten());
            }
        }
        false
    }

    /// Kahn's algorithm taking the least available label first.
    pub fn topological_order(&self) -> Vec<String> {
        let mut indeg: BTreeMap<&str, usize> = self.nodes.iter().map(|n| (n.as_str(), 0)).collect();
        for (_, b) in &self.edges {
            *indeg.get_mut(b.as_str()).expect("node") += 1;
        }
        let succ = self.successors();
        let mut ready: BTreeSet<&str> = indeg
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(n, _)| *n)
            .collect();
        let mut out = Vec::new();
        while let Some(n) = ready.pop_first() {
            out.push(n.to_string());
            for &m in &succ[n] {
                let d = indeg.get_mut(m).expect("node");
                *d -= 1;
                if *d == 0 {
                    ready.insert(m);
                }
            }
        }
        out
    }
}

/// Builds the dependency graph of the events' body labels. A cycle is an
/// error carrying one offending cycle.
pub fn build_causal_dag(events: &[EventRecord]) -> Result<CausalDag, TimelineError> {
    let mut dag = CausalDag::default();
    for e in events {
        dag.nodes.insert(e.promise.body.label.clone());
        if let Some(c) = &e.promise.condition {
            dag.nodes.insert(c.clone());
            dag.edges.insert((c.clone(), e.promise.body.label.clone()));
        }
    }
    if let Some(cycle) = find_cycle(&dag) {
        return Err(TimelineError::CyclicDependency(cycle));
    }
    Ok(dag)
}

fn find_cycle(dag: &CausalDag) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let succ = dag.successors();
    let mut mark: BTreeMap<&str, Mark> =
        dag.nodes.iter().map(|n| (n.as_str(), Mark::New)).collect();
    for root in dag.nodes.iter().map(String::as_str) {
        if mark[root] != Mark::New {
            continue;
        }
        let mut path: Vec<(&str, usize)> = vec![(root, 0)];
        mark.insert(root, Mark::Active);
        while let Some(&mut (u, ref mut i)) = path.last_mut() {
            if let Some(&v) = succ[u].get(*i) {
                *i += 1;
                match mark[v] {
                    Mark::New => {
                        mark.insert(v, Mark::Active);
                        path.push((v, 0));
                    }
                    Mark::Active => {
                        let start = path
                            .iter()
                            .position(|(n, _)| *n == v)
                            .expect("active node on path");
                        let mut cycle: Vec<String> =
                            path[start..].iter().map(|(n, _)| n.to_string()).collect();
                        cycle.push(v.to_string());
                        return Some(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark.insert(u, Mark::Done);
                path.pop();
            }
        }
    }
    None
}

/// True iff neither label causally precedes the other.
pub fn concurrent(dag: &CausalDag, b1: &str, b2: &str) -> Result<bool, TimelineError> {
    for b in [b1, b2] {
        if !dag.nodes.contains(b) {
            return Err(TimelineError::UnknownLabel(b.to_string()));
        }
    }
    Ok(b1 != b2 && !dag.reaches(b1, b2) && !dag.reaches(b2, b1))
}

/// The promises `observer` can see, as events received on consecutive ticks.
pub fn observed_events(w: &World, observer: &AgentId) -> Result<Vec<EventRecord>, TimelineError> {
    Ok(w.observed_promises(observer)?
        .into_iter()
        .enumerate()
        .map(|(i, p)| EventRecord {
            promise: p.clone(),
            observer: observer.clone(),
            tick: i as u64 + 1,
        })
        .collect())
}

/// Advances the clock iff the event is the clock owner's, in scope, and new
/// relative to `w`, the state the observer has seen so far.
pub fn tick_on(
    w: &World,
    clock: &LocalClock,
    event: &EventRecord,
) -> Result<LocalClock, TimelineError> {
    if event.observer != clock.agent {
        return Err(TimelineError::ObserverMismatch {
            clock: clock.agent.clone(),
            event: event.observer.clone(),
        });
    }
    let changes =
        event.promise.scope.contains(&event.observer) && !w.contains_promise(&event.promise);
    Ok(LocalClock {
        agent: clock.agent.clone(),
        tick: clock.tick + changes as u64,
    })
}

/// Feeds promises one by one into `start` and records the observer's tick
/// after each. Promises that fail validation are skipped without a tick.
pub fn replay(
    start: &World,
    observer: &AgentId,
    promises: &[Promise],
) -> Result<(World, Vec<u64>), TimelineError> {
    start.require(observer)?;
    let mut w = start.clone();
    let mut clock = LocalClock::new(observer.clone());
    let mut ticks = Vec::with_capacity(promises.len());
    for p in promises {
        let event = EventRecord {
            promise: p.clone(),
            observer: observer.clone(),
            tick: clock.tick,
        };
        if w.check_promise(p).is_ok() {
            clock = tick_on(&w, &clock, &event)?;
            w.push_unique(p.clone());
        }
        ticks.push(clock.tick);
    }
    Ok((w, ticks))
}

fn is_offer(p: &Promise) -> bool {
    p.polarity == Polarity::Plus && !p.is_adjacency() && !p.body.is_self_loop()
}

/// What the observer can conclude about agreement. Each visible promiser's
/// payload is taken from its causally latest offers, so a conditional
/// revision supersedes what it depends on. Groups are the clusters of
/// agents that promise each other, plus everyone visible; each maps to the
/// intersection of its members' payloads.
pub fn infer_overlap(
    w: &World,
    observer: &AgentId,
) -> Result<BTreeMap<BTreeSet<AgentId>, BTreeSet<String>>, TimelineError> {
    let visible: Vec<&Promise> = w
        .observed_promises(observer)?
        .into_iter()
        .filter(|p| is_offer(p))
        .collect();

    // Precedence over labels from every visible condition; cycles are tolerated here.
    let mut dag = CausalDag::default();
    for p in &visible {
        dag.nodes.insert(p.body.label.clone());
        if let Some(c) = &p.condition {
            dag.nodes.insert(c.clone());
            dag.edges.insert((c.clone(), p.body.label.clone()));
        }
    }
    let before = |a: &str, b: &str| dag.reaches(a, b) && !dag.reaches(b, a);

    let mut by_promiser: BTreeMap<&AgentId, Vec<&Promise>> = BTreeMap::new();
    for p in &visible {
        by_promiser.entry(&p.promiser).or_default().push(p);
    }
    let mut payload: BTreeMap<&AgentId, BTreeSet<String>> = BTreeMap::new();
    for (a, ps) in &by_promiser {
        let labels: BTreeSet<&str> = ps.iter().map(|p| p.body.label.as_str()).collect();
        let latest: BTreeSet<&str> = labels
            .iter()
            .filter(|l| !labels.iter().any(|m| before(l, m)))
            .copied()
            .collect();
        let merged = ps
            .iter()
            .filter(|p| latest.contains(p.body.label.as_str()))
            .map(|p| p.body.payload.clone())
            .reduce(|x, y| x.intersection(&y).cloned().collect())
            .unwrap_or_default();
        payload.insert(a, merged);
    }

    let offers: BTreeSet<(&AgentId, &AgentId)> =
        visible.iter().map(|p| (&p.promiser, &p.promisee)).collect();
    let mut nb: BTreeMap<&AgentId, BTreeSet<&AgentId>> = BTreeMap::new();
    for &(a, b) in &offers {
        if offers.contains(&(b, a)) {
            nb.entry(a).or_default().insert(b);
        }
    }
    let mut groups: BTreeSet<BTreeSet<AgentId>> = BTreeSet::new();
    let mut seen: BTreeSet<&AgentId> = BTreeSet::new();
    for &start in nb.keys() {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = BTreeSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &nb[u] {
                if seen.insert(v) {
                    comp.insert(v.clone());
                    queue.push_back(v);
                }
            }
        }
        groups.insert(comp);
    }
    if !payload.is_empty() {
        groups.insert(payload.keys().map(|a| (*a).clone()).collect());
    }

    Ok(groups
        .into_iter()
        .map(|g| {
            let common = g
                .iter()
                .filter_map(|a| payload.get(a))
                .cloned()
                .reduce(|x, y| x.intersection(&y).cloned().collect())
                .unwrap_or_default();
            (g, common)
        })
        .collect())
}

/// Splits the world into parts that share no promise. Two agents are in the
/// same part when one promise names both, as promiser, promisee or scope
/// member. Parts are ordered by least agent; the association registry is
/// copied into each.
pub fn partition_worlds(w: &World) -> Vec<World> {
    let ids = w.agent_ids();
    let index: BTreeMap<&AgentId, usize> = ids.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for p in w.promises() {
        let anchor = index[&p.promiser];
        for other in std::iter::once(&p.promisee).chain(p.scope.iter()) {
            let (ra, rb) = (find(&mut parent, anchor), find(&mut parent, index[other]));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut parts: BTreeMap<usize, World> = BTreeMap::new();
    for (i, a) in ids.iter().enumerate() {
        let root = find(&mut parent, i);
        let part = parts.entry(root).or_insert_with(|| {
            let mut fresh = World::new();
            for t in w.associations() {
                fresh
                    .insert_association(t.clone())
                    .expect("registry is consistent");
            }
            fresh
        });
        part.insert_agent(a.clone(), w.attributes(a).cloned().unwrap_or_default())
            .expect("agents are distinct");
    }
    for p in w.promises() {
        let root = find(&mut parent, index[&p.promiser]);
        parts
            .get_mut(&root)
            .expect("part exists")
            .push_unique(p.clone());
    }
    parts.into_values().collect()
}
