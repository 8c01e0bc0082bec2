//! Coordinates from matroid bases: ordered families of independent edge
//! sets, the weighted decomposition of an adjacency matrix over them, and
//! the integer tuples they induce on agents.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::model::{AgentId, Polarity, World};
use crate::topology::{undirected_neighbours, AdjacencyMatrix};

/// Undirected edge with endpoints in canonical order; `(v, v)` is a self-loop.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(pub AgentId, pub AgentId);

impl Edge {
    pub fn new(a: AgentId, b: AgentId) -> Edge {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn is_loop(&self) -> bool {
        self.0 == self.1
    }

    pub fn touches(&self, v: &AgentId) -> bool {
        &self.0 == v || &self.1 == v
    }
}

impl std::fmt::Display for Edge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoordinateError {
    #[error("edge {0} is not an adjacency of the world")]
    UnknownEdge(Edge),
    #[error("edge {0} is not covered by any basis set")]
    UncoveredEdge(Edge),
    #[error("invalid basis: {0}")]
    BasisInvalid(String),
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("graph is not connected")]
    Disconnected,
    #[error("rank {rank} exceeds the {max} available leaf paths")]
    RankTooLarge { rank: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatroidBasis {
    pub rank: usize,
    pub sets: Vec<BTreeSet<Edge>>,
    pub origin: AgentId,
}

impl MatroidBasis {
    pub fn new(origin: AgentId, sets: Vec<BTreeSet<Edge>>) -> MatroidBasis {
        MatroidBasis {
            rank: sets.len(),
            sets,
            origin,
        }
    }

    /// Number of sets containing `e`.
    pub fn multiplicity(&self, e: &Edge) -> usize {
        self.sets.iter().filter(|s| s.contains(e)).count()
    }

    /// Forest-or-single-self-loop shape and a private edge for every set.
    /// Independent of any world.
    pub fn is_well_formed(&self) -> bool {
        self.structure_problem().is_none()
    }

    fn structure_problem(&self) -> Option<String> {
        if self.rank == 0 || self.rank != self.sets.len() {
            return Some(format!("rank {} with {} sets", self.rank, self.sets.len()));
        }
        for (a, set) in self.sets.iter().enumerate() {
            if set.is_empty() {
                return Some(format!("set {} is empty", a + 1));
            }
            let loops = set.iter().filter(|e| e.is_loop()).count();
            if loops > 0 && set.len() > 1 {
                return Some(format!("set {} mixes a self-loop with other edges", a + 1));
            }
            if loops == 0 && !is_forest(set) {
                return Some(format!("set {} contains a cycle", a + 1));
            }
            if set.iter().all(|e| self.multiplicity(e) > 1) {
                return Some(format!("set {} has no private edge", a + 1));
            }
        }
        None
    }
}

fn is_forest(set: &BTreeSet<Edge>) -> bool {
    let mut parent: BTreeMap<&AgentId, &AgentId> = BTreeMap::new();
    fn find<'a>(parent: &mut BTreeMap<&'a AgentId, &'a AgentId>, v: &'a AgentId) -> &'a AgentId {
        let mut root = v;
        while let Some(&p) = parent.get(root) {
            if p == root {
                break;
            }
            root = p;
        }
        let mut cur = v;
        while cur != root {
            let next = parent[cur];
            parent.insert(cur, root);
            cur = next;
        }
        root
    }
    for e in set {
        parent.entry(&e.0).or_insert(&e.0);
        parent.entry(&e.1).or_insert(&e.1);
        let (ra, rb) = (find(&mut parent, &e.0), find(&mut parent, &e.1));
        if ra == rb {
            return false;
        }
        parent.insert(ra, rb);
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub parts: Vec<AdjacencyMatrix>,
}

impl Decomposition {
    /// Entrywise sum of the parts.
    pub fn sum(&self) -> Option<AdjacencyMatrix> {
        let mut it = self.parts.iter();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, p| acc.add(p)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateChart {
    pub rank: usize,
    pub tuples: BTreeMap<AgentId, Vec<u32>>,
}

fn world_has_edge(w: &World, e: &Edge) -> bool {
    w.promises().iter().any(|p| {
        p.polarity == Polarity::Plus
            && if e.is_loop() {
                p.body.is_self_loop() && p.promiser == e.0 && p.promisee == e.0
            } else {
                p.is_adjacency()
                    && ((p.promiser == e.0 && p.promisee == e.1)
                        || (p.promiser == e.1 && p.promisee == e.0))
            }
    })
}

/// True iff every set is a forest (or a lone self-loop) and owns an edge no
/// other set contains. Edges must be adjacencies of `w`.
pub fn verify_basis(w: &World, b: &MatroidBasis) -> Result<bool, CoordinateError> {
    if !w.contains_agent(&b.origin) {
        return Err(CoordinateError::UnknownAgent(b.origin.clone()));
    }
    for e in b.sets.iter().flatten() {
        if !world_has_edge(w, e) {
            return Err(CoordinateError::UnknownEdge(e.clone()));
        }
    }
    Ok(b.is_well_formed())
}

/// Splits `m` into one matrix per basis set. An edge shared by `k` sets
/// carries `1/k` of its weight in each.
pub fn decompose(m: &AdjacencyMatrix, b: &MatroidBasis) -> Result<Decomposition, CoordinateError> {
    if let Some(why) = b.structure_problem() {
        return Err(CoordinateError::BasisInvalid(why));
    }
    let idx = |v: &AgentId| {
        m.index_of(v)
            .ok_or_else(|| CoordinateError::BasisInvalid(format!("agent {v} not in matrix")))
    };
    for e in b.sets.iter().flatten() {
        let (r, c) = (idx(&e.0)?, idx(&e.1)?);
        if !m.positive(r, c) && !m.positive(c, r) {
            return Err(CoordinateError::BasisInvalid(format!(
                "edge {e} is absent from the matrix"
            )));
        }
    }
    let n = m.len();
    for r in 0..n {
        for c in r..n {
            if m.positive(r, c) || m.positive(c, r) {
                let e = Edge::new(m.order[r].clone(), m.order[c].clone());
                if b.multiplicity(&e) == 0 {
                    return Err(CoordinateError::UncoveredEdge(e));
                }
            }
        }
    }
    let parts = b
        .sets
        .iter()
        .map(|set| {
            let mut part = AdjacencyMatrix::zeros(m.order.clone());
            for e in set {
                let k = b.multiplicity(e) as i64;
                let (r, c) = (idx(&e.0).expect("checked"), idx(&e.1).expect("checked"));
                part.entries[r][c] = m.get(r, c) / k;
                part.entries[c][r] = m.get(c, r) / k;
            }
            part
        })
        .collect();
    Ok(Decomposition { parts })
}

/// Hop distances from `origin` inside the union of the basis edges.
fn basis_distances(b: &MatroidBasis) -> BTreeMap<AgentId, usize> {
    let mut nb: BTreeMap<&AgentId, BTreeSet<&AgentId>> = BTreeMap::new();
    for e in b.sets.iter().flatten().filter(|e| !e.is_loop()) {
        nb.entry(&e.0).or_default().insert(&e.1);
        nb.entry(&e.1).or_default().insert(&e.0);
    }
    let mut dist = BTreeMap::from([(b.origin.clone(), 0usize)]);
    let mut queue = VecDeque::from([&b.origin]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u];
        for v in nb.get(u).into_iter().flatten() {
            if !dist.contains_key(*v) {
                dist.insert((*v).clone(), d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Vertices of a forest edge set in traversal order: each tree is walked
/// breadth-first from its vertex nearest the origin, trees taken nearest
/// first, ties broken lexicographically.
fn traversal_order(set: &BTreeSet<Edge>, dist: &BTreeMap<AgentId, usize>) -> Vec<AgentId> {
    let mut nb: BTreeMap<&AgentId, BTreeSet<&AgentId>> = BTreeMap::new();
    for e in set {
        nb.entry(&e.0).or_default().insert(&e.1);
        nb.entry(&e.1).or_default().insert(&e.0);
    }
    let key = |v: &AgentId| (dist.get(v).copied().unwrap_or(usize::MAX), v.clone());

    let mut seen: BTreeSet<&AgentId> = BTreeSet::new();
    let mut trees: Vec<Vec<&AgentId>> = Vec::new();
    for &v in nb.keys() {
        if seen.contains(v) {
            continue;
        }
        let mut comp = vec![v];
        seen.insert(v);
        let mut i = 0;
        while i < comp.len() {
            for &u in &nb[comp[i]] {
                if seen.insert(u) {
                    comp.push(u);
                }
            }
            i += 1;
        }
        trees.push(comp);
    }
    let mut starts: Vec<&AgentId> = trees
        .iter()
        .map(|t| *t.iter().min_by_key(|v| key(v)).expect("nonempty tree"))
        .collect();
    starts.sort_by_key(|v| key(v));

    let mut order = Vec::new();
    let mut visited: BTreeSet<&AgentId> = BTreeSet::new();
    for s in starts {
        let mut queue = VecDeque::from([s]);
        visited.insert(s);
        while let Some(u) = queue.pop_front() {
            order.push(u.clone());
            for &v in &nb[u] {
                if visited.insert(v) {
                    queue.push_back(v);
                }
            }
        }
    }
    order
}

/// Integer tuple per agent, one component per basis set.
///
/// Component `a` is 0 off `I_a`. On `I_a` vertices are numbered 1, 2, 3, ...
/// in traversal order, except that a set entered at the origin, or made of a
/// single edge, puts both ends of its first edge at 1. A lone self-loop set
/// marks its vertex 1. When the origin carries its own self-loop direction,
/// it sits at 0 in any other set where all its edges are private to that set.
pub fn coordinates(w: &World, b: &MatroidBasis) -> Result<CoordinateChart, CoordinateError> {
    if !verify_basis(w, b)? {
        return Err(CoordinateError::BasisInvalid(
            b.structure_problem().unwrap_or_default(),
        ));
    }
    let dist = basis_distances(b);
    let loop_set = |s: &BTreeSet<Edge>| s.len() == 1 && s.iter().all(Edge::is_loop);
    let origin_loop = b
        .sets
        .iter()
        .position(|s| loop_set(s) && s.iter().all(|e| e.0 == b.origin));

    let mut tuples: BTreeMap<AgentId, Vec<u32>> =
        w.agents().map(|a| (a.clone(), vec![0; b.rank])).collect();
    for (a, set) in b.sets.iter().enumerate() {
        if loop_set(set) {
            let v = &set.iter().next().expect("one edge").0;
            tuples.get_mut(v).expect("edge endpoints are agents")[a] = 1;
            continue;
        }
        let order = traversal_order(set, &dist);
        let doubled = order[0] == b.origin || set.len() == 1;
        for (i, v) in order.iter().enumerate() {
            let pos = if doubled { i.max(1) } else { i + 1 };
            tuples.get_mut(v).expect("edge endpoints are agents")[a] = pos as u32;
        }
        let origin_private = set
            .iter()
            .filter(|e| e.touches(&b.origin))
            .all(|e| b.multiplicity(e) == 1);
        if origin_loop.is_some_and(|l| l != a) && order.contains(&b.origin) && origin_private {
            tuples.get_mut(&b.origin).expect("origin is an agent")[a] = 0;
        }
    }
    Ok(CoordinateChart {
        rank: b.rank,
        tuples,
    })
}

/// A basis of `rank` sets from the breadth-first spanning tree rooted at
/// `origin`. Leaves are taken in lexicographic order and dealt round-robin;
/// each set is the union of its leaves' root paths. Every non-tree edge then
/// joins the first set it leaves acyclic. Self-loops are ignored.
pub fn spanning_basis(
    w: &World,
    origin: &AgentId,
    rank: usize,
) -> Result<MatroidBasis, CoordinateError> {
    if !w.contains_agent(origin) {
        return Err(CoordinateError::UnknownAgent(origin.clone()));
    }
    if rank == 0 {
        return Err(CoordinateError::BasisInvalid(
            "rank must be positive".into(),
        ));
    }
    let nb = undirected_neighbours(w);
    let mut parent: BTreeMap<AgentId, Option<AgentId>> = BTreeMap::from([(origin.clone(), None)]);
    let mut children: BTreeMap<AgentId, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([origin.clone()]);
    while let Some(u) = queue.pop_front() {
        for v in &nb[&u] {
            if !parent.contains_key(v) {
                parent.insert(v.clone(), Some(u.clone()));
                *children.entry(u.clone()).or_default() += 1;
                queue.push_back(v.clone());
            }
        }
    }
    if parent.len() != w.agent_count() {
        return Err(CoordinateError::Disconnected);
    }
    let leaves: Vec<&AgentId> = parent
        .keys()
        .filter(|v| *v != origin && !children.contains_key(*v))
        .collect();
    let edges = parent.len() - 1;
    if rank > leaves.len() || rank > edges {
        return Err(CoordinateError::RankTooLarge {
            rank,
            max: leaves.len().min(edges),
        });
    }
    let mut sets = vec![BTreeSet::new(); rank];
    for (k, leaf) in leaves.into_iter().enumerate() {
        let mut cur = leaf.clone();
        while let Some(Some(p)) = parent.get(&cur) {
            sets[k % rank].insert(Edge::new(p.clone(), cur.clone()));
            cur = p.clone();
        }
    }
    for (u, vs) in &nb {
        for v in vs.range(u..).filter(|v| *v != u) {
            let e = Edge::new(u.clone(), v.clone());
            if parent.get(v) == Some(&Some(u.clone())) || parent.get(u) == Some(&Some(v.clone())) {
                continue;
            }
            let home = sets.iter_mut().find(|s| {
                let mut grown = (*s).clone();
                grown.insert(e.clone());
                is_forest(&grown)
            });
            match home {
                Some(s) => {
                    s.insert(e);
                }
                None => return Err(CoordinateError::UncoveredEdge(e)),
            }
        }
    }
    Ok(MatroidBasis::new(origin.clone(), sets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{aid, Attributes};
    use crate::topology::adjacency_matrix;
    use num_rational::Rational64;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn appendix_bases_verify() {
        let w = fixtures::dimgraph0();
        for b in [
            fixtures::example1_basis(),
            fixtures::example2_basis(),
            fixtures::example3_basis(),
        ] {
            assert!(verify_basis(&w, &b).unwrap());
        }
    }

    #[test]
    fn cycle_inside_a_set_is_rejected() {
        let w = fixtures::clique(&["a", "b", "c"]);
        let e = |x: &str, y: &str| Edge::new(aid(x), aid(y));
        let b = MatroidBasis::new(
            aid("a"),
            vec![[e("a", "b"), e("b", "c"), e("a", "c")].into()],
        );
        assert!(!verify_basis(&w, &b).unwrap());
    }

    #[test]
    fn identical_sets_have_no_private_edge() {
        let w = fixtures::clique(&["a", "b", "c"]);
        let set: BTreeSet<Edge> = [Edge::new(aid("a"), aid("b"))].into();
        let b = MatroidBasis::new(aid("a"), vec![set.clone(), set]);
        assert!(!verify_basis(&w, &b).unwrap());
    }

    #[test]
    fn unknown_edge_is_an_error() {
        let w = fixtures::dimgraph0();
        let b = MatroidBasis::new(aid("v1"), vec![[Edge::new(aid("v1"), aid("v5"))].into()]);
        assert!(matches!(
            verify_basis(&w, &b),
            Err(CoordinateError::UnknownEdge(_))
        ));
    }

    #[test]
    fn example1_decomposition_has_half_weights() {
        let m = adjacency_matrix(&fixtures::dimgraph0());
        let d = decompose(&m, &fixtures::example1_basis()).unwrap();
        assert_eq!(d.parts.len(), 3);
        let (i2, i3) = (&d.parts[1], &d.parts[2]);
        assert_eq!(i2.get(0, 1), r(1, 2));
        assert_eq!(i2.get(1, 2), r(1, 2));
        assert_eq!(i2.get(2, 3), r(1, 1));
        assert_eq!(i3.get(0, 1), r(1, 2));
        assert_eq!(i3.get(2, 4), r(1, 1));
        assert_eq!(d.sum().unwrap(), m);
    }

    #[test]
    fn single_edge_single_set() {
        let w = fixtures::clique(&["a", "b"]);
        let m = adjacency_matrix(&w);
        let b = MatroidBasis::new(aid("a"), vec![[Edge::new(aid("a"), aid("b"))].into()]);
        let d = decompose(&m, &b).unwrap();
        assert_eq!(d.parts, vec![m]);
    }

    #[test]
    fn uncovered_edge_is_reported() {
        let m = adjacency_matrix(&fixtures::dimgraph0());
        let mut b = fixtures::example3_basis();
        b.sets[2].remove(&Edge::new(aid("v3"), aid("v5")));
        assert_eq!(
            decompose(&m, &b),
            Err(CoordinateError::UncoveredEdge(Edge::new(
                aid("v3"),
                aid("v5")
            )))
        );
    }

    #[test]
    fn appendix_tuples() {
        let w = fixtures::dimgraph0();
        let c1 = coordinates(&w, &fixtures::example1_basis()).unwrap();
        let want1 = [[1, 1, 1], [0, 1, 1], [0, 2, 2], [0, 3, 0], [0, 0, 3]];
        for (v, t) in c1.tuples.values().zip(want1) {
            assert_eq!(v, &t.to_vec());
        }
        let c3 = coordinates(&w, &fixtures::example3_basis()).unwrap();
        let want3 = [[1, 0, 0], [0, 1, 1], [0, 0, 2], [0, 0, 3], [0, 0, 4]];
        for (v, t) in c3.tuples.values().zip(want3) {
            assert_eq!(v, &t.to_vec());
        }
        let (line, basis) = fixtures::bent_line();
        let cl = coordinates(&line, &basis).unwrap();
        let want = [[1, 0, 0], [1, 1, 0], [0, 1, 1], [0, 0, 1]];
        for (v, t) in cl.tuples.values().zip(want) {
            assert_eq!(v, &t.to_vec());
        }
    }

    #[test]
    fn spanning_basis_examples() {
        let path = fixtures::undirected_chain(&["a", "b", "c", "d"]);
        let b = spanning_basis(&path, &aid("a"), 1).unwrap();
        assert_eq!(b.sets.len(), 1);
        assert_eq!(b.sets[0].len(), 3);
        assert!(verify_basis(&path, &b).unwrap());
        assert_eq!(
            spanning_basis(&path, &aid("a"), 10),
            Err(CoordinateError::RankTooLarge { rank: 10, max: 1 })
        );

        let mut star = World::new();
        for id in ["h", "x", "y", "z"] {
            star = star.add_agent(aid(id), Attributes::new()).unwrap();
        }
        for leaf in ["x", "y", "z"] {
            star = star.bind_adjacency(&aid("h"), &aid(leaf), "s").unwrap();
        }
        let b = spanning_basis(&star, &aid("h"), 3).unwrap();
        assert!(b.sets.iter().all(|s| s.len() == 1));
        assert!(verify_basis(&star, &b).unwrap());

        let split = star.add_agent(aid("q"), Attributes::new()).unwrap();
        assert_eq!(
            spanning_basis(&split, &aid("h"), 1),
            Err(CoordinateError::Disconnected)
        );
    }

    #[test]
    fn zero_means_off_the_set() {
        let w = fixtures::dimgraph0();
        let b = fixtures::example1_basis();
        let c = coordinates(&w, &b).unwrap();
        for (v, t) in &c.tuples {
            for (a, set) in b.sets.iter().enumerate() {
                if !set.iter().any(|e| e.touches(v)) {
                    assert_eq!(t[a], 0);
                }
            }
        }
    }
}
