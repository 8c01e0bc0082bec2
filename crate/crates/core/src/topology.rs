//! Adjacency-matrix view of a world and the graph algorithms built on it:
//! degrees, strongly and completely connected components, irreducibility,
//! principal-eigenvector centrality, hop distance, coarse-graining,
//! boundaries, the graph derivative and the local dimension heuristic.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::model::{AgentId, Attributes, ModelError, Polarity, Promise, World};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{agent} has no successor along {direction}")]
    NoSuccessor { agent: AgentId, direction: String },
    #[error("{agent} has {count} successors along {direction}")]
    AmbiguousSuccessor {
        agent: AgentId,
        direction: String,
        count: usize,
    },
    #[error("no function value for {0}")]
    MissingValue(AgentId),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CentralityError {
    #[error("matrix has no positive entries")]
    ZeroMatrix,
    /// Every walk ends in a sink, so iteration collapses to the zero vector.
    #[error("graph has no cycle; iteration collapses to the zero vector")]
    ZeroVector,
    #[error("power iteration did not converge in {iterations} iterations")]
    NoConvergence { iterations: usize },
}

/// Square matrix of non-negative exact rationals over a canonical agent order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    pub order: Vec<AgentId>,
    pub entries: Vec<Vec<Rational64>>,
}

impl AdjacencyMatrix {
    pub fn zeros(order: Vec<AgentId>) -> Self {
        let n = order.len();
        AdjacencyMatrix {
            order,
            entries: vec![vec![Rational64::zero(); n]; n],
        }
    }

    /// Builds a matrix from integer rows; convenient for fixtures.
    pub fn from_rows(order: Vec<AgentId>, rows: &[&[i64]]) -> Self {
        assert_eq!(order.len(), rows.len());
        let entries = rows
            .iter()
            .map(|r| {
                assert_eq!(r.len(), order.len());
                r.iter().map(|&v| Rational64::from_integer(v)).collect()
            })
            .collect();
        AdjacencyMatrix { order, entries }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn index_of(&self, id: &AgentId) -> Option<usize> {
        self.order
            .binary_search(id)
            .ok()
            .or_else(|| self.order.iter().position(|o| o == id))
    }

    pub fn get(&self, r: usize, c: usize) -> Rational64 {
        self.entries[r][c]
    }

    pub fn positive(&self, r: usize, c: usize) -> bool {
        self.entries[r][c] > Rational64::zero()
    }

    /// Out-neighbour lists by index.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        (0..self.len())
            .map(|r| (0..self.len()).filter(|&c| self.positive(r, c)).collect())
            .collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|v| v.to_f64().unwrap_or(0.0)).collect())
            .collect()
    }

    /// Entrywise sum; both matrices must share the same order.
    pub fn add(&self, other: &AdjacencyMatrix) -> AdjacencyMatrix {
        assert_eq!(self.order, other.order, "matrices over different orders");
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        AdjacencyMatrix {
            order: self.order.clone(),
            entries,
        }
    }
}

/// Entry `(r, c)` is 1 iff `r` offers `+adj` (any direction) to `c`, or for
/// `r == c`, iff `r` makes a `+self-loop` promise.
pub fn adjacency_matrix(w: &World) -> AdjacencyMatrix {
    let mut m = AdjacencyMatrix::zeros(w.agent_ids());
    for p in w.promises() {
        if p.polarity != Polarity::Plus {
            continue;
        }
        let edge = (p.body.is_adjacency() && p.promiser != p.promisee)
            || (p.body.is_self_loop() && p.promiser == p.promisee);
        if edge {
            let r = m.index_of(&p.promiser).expect("promiser is an agent");
            let c = m.index_of(&p.promisee).expect("promisee is an agent");
            m.entries[r][c] = Rational64::from_integer(1);
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreePair {
    pub k_out: Vec<i64>,
    pub k_in: Vec<i64>,
}

/// Row sums (out-degree) and column sums (in-degree), counting positive entries.
pub fn degrees(m: &AdjacencyMatrix) -> DegreePair {
    let n = m.len();
    let count = |f: &dyn Fn(usize) -> bool| (0..n).filter(|&x| f(x)).count() as i64;
    DegreePair {
        k_out: (0..n).map(|r| count(&|c| m.positive(r, c))).collect(),
        k_in: (0..n).map(|c| count(&|r| m.positive(r, c))).collect(),
    }
}

/// Disjoint blocks covering every agent, ordered by least member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub blocks: Vec<BTreeSet<AgentId>>,
}

/// Strongly connected components (Tarjan, iterative).
pub fn scc(m: &AdjacencyMatrix) -> Partition {
    let blocks = scc_indices(&m.successors())
        .into_iter()
        .map(|b| {
            b.into_iter()
                .map(|i| m.order[i].clone())
                .collect::<BTreeSet<_>>()
        })
        .collect::<Vec<_>>();
    let mut blocks = blocks;
    blocks.sort_by(|a, b| a.iter().next().cmp(&b.iter().next()));
    Partition { blocks }
}

pub(crate) fn scc_indices(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0usize;

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        // (vertex, position in its successor list)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = succ[v].get(*pos) {
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut block = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        block.push(w);
                        if w == v {
                            break;
                        }
                    }
                    block.sort_unstable();
                    out.push(block);
                }
            }
        }
    }
    out
}

/// Undirected neighbour sets from `+adj` promises, ignoring self-loops.
pub fn undirected_neighbours(w: &World) -> BTreeMap<AgentId, BTreeSet<AgentId>> {
    let mut nb: BTreeMap<AgentId, BTreeSet<AgentId>> =
        w.agents().map(|a| (a.clone(), BTreeSet::new())).collect();
    for p in w.promises() {
        if p.polarity == Polarity::Plus && p.is_adjacency() && p.promiser != p.promisee {
            nb.get_mut(&p.promiser)
                .expect("agent")
                .insert(p.promisee.clone());
            nb.get_mut(&p.promisee)
                .expect("agent")
                .insert(p.promiser.clone());
        }
    }
    nb
}

/// Completely connected components: every maximal clique of the symmetrised
/// adjacency relation, sorted by member list (least member first).
pub fn ccc(w: &World) -> Vec<BTreeSet<AgentId>> {
    let nb = undirected_neighbours(w);
    let mut cliques = Vec::new();
    let p: BTreeSet<AgentId> = nb.keys().cloned().collect();
    bron_kerbosch(&nb, BTreeSet::new(), p, BTreeSet::new(), &mut cliques);
    cliques.sort_by(|a, b| a.iter().cmp(b.iter()));
    cliques
}

fn bron_kerbosch(
    nb: &BTreeMap<AgentId, BTreeSet<AgentId>>,
    r: BTreeSet<AgentId>,
    mut p: BTreeSet<AgentId>,
    mut x: BTreeSet<AgentId>,
    out: &mut Vec<BTreeSet<AgentId>>,
) {
    if p.is_empty() && x.is_empty() {
        out.push(r);
        return;
    }
    let pivot = p
        .union(&x)
        .max_by_key(|u| nb[*u].intersection(&p).count())
        .cloned()
        .expect("p or x nonempty");
    let candidates: Vec<AgentId> = p.difference(&nb[&pivot]).cloned().collect();
    for v in candidates {
        let mut r2 = r.clone();
        r2.insert(v.clone());
        let p2 = p.intersection(&nb[&v]).cloned().collect();
        let x2 = x.intersection(&nb[&v]).cloned().collect();
        bron_kerbosch(nb, r2, p2, x2, out);
        p.remove(&v);
        x.insert(v);
    }
}

/// True iff every entry is positive in some power `M^p`, `1 <= p <= n`.
///
/// A one-node matrix without a self-loop is reducible: no power has a
/// positive entry.
pub fn is_irreducible(m: &AdjacencyMatrix) -> bool {
    let by_powers = irreducible_by_powers(m);
    debug_assert_eq!(
        by_powers,
        match m.len() {
            0 => false,
            1 => m.positive(0, 0),
            _ => scc(m).blocks.len() == 1,
        },
        "matrix-power and SCC routes disagree"
    );
    by_powers
}

fn irreducible_by_powers(m: &AdjacencyMatrix) -> bool {
    let n = m.len();
    if n == 0 {
        return false;
    }
    let base: Vec<Vec<bool>> = (0..n)
        .map(|r| (0..n).map(|c| m.positive(r, c)).collect())
        .collect();
    let mut power = base.clone();
    let mut seen = base.clone();
    for _ in 1..n {
        let mut next = vec![vec![false; n]; n];
        for r in 0..n {
            for k in 0..n {
                if power[r][k] {
                    for c in 0..n {
                        next[r][c] |= base[k][c];
                    }
                }
            }
        }
        for r in 0..n {
            for c in 0..n {
                seen[r][c] |= next[r][c];
            }
        }
        power = next;
    }
    seen.iter().all(|row| row.iter().all(|&b| b))
}

/// Principal eigenvector of `M` by power iteration, unit 2-norm, non-negative.
///
/// Iterates `M + I`, which has the same eigenvectors as `M` but a strictly
/// dominant Perron root when `M` is irreducible, so periodic graphs (directed
/// cycles, bipartite bonds) converge. Two start vectors are run; if they land
/// on different vectors the dominant eigenvalue is degenerate and no single
/// answer exists.
pub fn centrality(
    m: &AdjacencyMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, CentralityError> {
    let n = m.len();
    let a = m.to_f64();
    if n == 0 || a.iter().flatten().all(|&v| v == 0.0) {
        return Err(CentralityError::ZeroMatrix);
    }
    if scc_indices(&m.successors())
        .iter()
        .all(|b| b.len() == 1 && !m.positive(b[0], b[0]))
    {
        return Err(CentralityError::ZeroVector);
    }
    let uniform = vec![1.0; n];
    let ramp: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let x = shifted_power_iteration(&a, uniform, tol, max_iter)?;
    let y = shifted_power_iteration(&a, ramp, tol, max_iter)?;
    let gap = x
        .iter()
        .zip(&y)
        .map(|(p, q)| (p - q).powi(2))
        .sum::<f64>()
        .sqrt();
    if gap > tol.sqrt().max(1e-9) {
        return Err(CentralityError::NoConvergence {
            iterations: max_iter,
        });
    }
    Ok(x)
}

fn shifted_power_iteration(
    a: &[Vec<f64>],
    start: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, CentralityError> {
    let n = a.len();
    let mut x = normalized(start);
    for _ in 0..max_iter {
        let mut y: Vec<f64> = (0..n)
            .map(|r| x[r] + a[r].iter().zip(&x).map(|(m, v)| m * v).sum::<f64>())
            .collect();
        if y.iter().all(|&v| v == 0.0) {
            return Err(CentralityError::ZeroVector);
        }
        y = normalized(y);
        if y.iter().sum::<f64>() < 0.0 {
            y.iter_mut().for_each(|v| *v = -*v);
        }
        let delta = y
            .iter()
            .zip(&x)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt();
        x = y;
        if delta < tol {
            return Ok(x);
        }
    }
    Err(CentralityError::NoConvergence {
        iterations: max_iter,
    })
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Breadth-first hop count along `+adj` offers; `None` when unreachable.
pub fn hop_distance(w: &World, a: &AgentId, b: &AgentId) -> Result<Option<usize>, TopologyError> {
    if !w.contains_agent(a) {
        return Err(ModelError::UnknownAgent(a.clone()).into());
    }
    if !w.contains_agent(b) {
        return Err(ModelError::UnknownAgent(b.clone()).into());
    }
    Ok(hop_distances(w, a).get(b).copied())
}

/// Hop counts from `a` to every reachable agent.
pub fn hop_distances(w: &World, a: &AgentId) -> BTreeMap<AgentId, usize> {
    let mut out_edges: BTreeMap<&AgentId, BTreeSet<&AgentId>> = BTreeMap::new();
    for p in w.promises() {
        if p.polarity == Polarity::Plus && p.is_adjacency() {
            out_edges
                .entry(&p.promiser)
                .or_default()
                .insert(&p.promisee);
        }
    }
    let mut dist = BTreeMap::new();
    dist.insert(a.clone(), 0usize);
    let mut queue = VecDeque::from([a.clone()]);
    while let Some(u) = queue.pop_front() {
        let d = dist[&u];
        if let Some(next) = out_edges.get(&u) {
            for v in next {
                if !dist.contains_key(*v) {
                    dist.insert((*v).clone(), d + 1);
                    queue.push_back((*v).clone());
                }
            }
        }
    }
    dist
}

/// Name of the agent that replaces a block: members sorted, joined by `+`.
pub fn block_name(block: &BTreeSet<AgentId>) -> AgentId {
    let joined = block
        .iter()
        .map(AgentId::as_str)
        .collect::<Vec<_>>()
        .join("+");
    AgentId::new(joined).expect("joined tokens stay valid")
}

/// Replaces each block (size >= 2) by a single super-agent. Promises between
/// blocks are redirected to the super-agents; adjacency between a pair of
/// images collapses to a single edge per polarity, keeping the least
/// direction. Promises internal to a block are dropped.
pub fn contract(w: &World, blocks: &[BTreeSet<AgentId>]) -> World {
    let mut image: BTreeMap<AgentId, AgentId> =
        w.agents().map(|a| (a.clone(), a.clone())).collect();
    let mut merged: BTreeSet<AgentId> = BTreeSet::new();
    for b in blocks.iter().filter(|b| b.len() >= 2) {
        let name = block_name(b);
        for a in b {
            image.insert(a.clone(), name.clone());
            merged.insert(a.clone());
        }
    }
    if merged.is_empty() {
        return w.clone();
    }

    let mut out = World::new();
    for a in w.agents() {
        let img = &image[a];
        if out.contains_agent(img) {
            continue;
        }
        let attrs = if merged.contains(a) {
            Attributes::new()
        } else {
            w.attributes(a).cloned().unwrap_or_default()
        };
        out.insert_agent(img.clone(), attrs)
            .expect("images are distinct");
    }

    let touches_merged = |p: &Promise| merged.contains(&p.promiser) || merged.contains(&p.promisee);
    let mut least_dir: BTreeMap<(AgentId, AgentId, Polarity), String> = BTreeMap::new();
    for p in w
        .promises()
        .iter()
        .filter(|p| p.is_adjacency() && touches_merged(p))
    {
        let key = (
            image[&p.promiser].clone(),
            image[&p.promisee].clone(),
            p.polarity,
        );
        let d = p.body.direction.clone().expect("adjacency has a direction");
        least_dir
            .entry(key)
            .and_modify(|cur| {
                if d < *cur {
                    *cur = d.clone()
                }
            })
            .or_insert(d);
    }

    for p in w.promises() {
        let q = p.renamed(|a| image[a].clone());
        if q.promiser == q.promisee && touches_merged(p) {
            continue;
        }
        let mut q = q;
        if q.is_adjacency() && touches_merged(p) {
            let key = (q.promiser.clone(), q.promisee.clone(), q.polarity);
            q.body.direction = Some(least_dir[&key].clone());
        }
        out.push_unique(q);
    }
    out
}

/// One coarse-graining pass: greedily collapse completely connected
/// components with `3 <= size <= horizon` members, least member first,
/// skipping cliques that overlap one already chosen.
pub fn coarsen(w: &World, horizon: usize) -> World {
    let mut used: BTreeSet<AgentId> = BTreeSet::new();
    let mut chosen = Vec::new();
    for clique in ccc(w) {
        if clique.len() < 3 || clique.len() > horizon {
            continue;
        }
        if clique.iter().any(|a| used.contains(a)) {
            continue;
        }
        used.extend(clique.iter().cloned());
        chosen.push(clique);
    }
    contract(w, &chosen)
}

/// Applies [`coarsen`] until the world stops changing or `max_rounds` passes
/// have run. Returns the result and the number of passes that changed it.
pub fn coarsen_to_fixed_point(w: &World, horizon: usize, max_rounds: usize) -> (World, usize) {
    let mut cur = w.clone();
    for round in 0..max_rounds {
        let next = coarsen(&cur, horizon);
        if next == cur {
            return (cur, round);
        }
        cur = next;
    }
    (cur, max_rounds)
}

/// Collapses every strongly connected component into one agent.
pub fn scc_quotient(w: &World) -> World {
    contract(w, &scc(&adjacency_matrix(w)).blocks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BoundaryKind {
    /// Promises `±adj` along the direction to an agent outside the space.
    Edge,
    /// Offers no `+adj` along the direction.
    Transmission,
    /// Accepts no `-adj` along the direction.
    Observation,
    Interior,
}

impl BoundaryKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryKind::Edge => "edge",
            BoundaryKind::Transmission => "transmission",
            BoundaryKind::Observation => "observation",
            BoundaryKind::Interior => "interior",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryReport {
    pub direction: String,
    pub kinds: BTreeMap<AgentId, BoundaryKind>,
}

/// Classifies every agent of the world along `dir`.
pub fn boundaries(w: &World, dir: &str) -> BoundaryReport {
    let all: BTreeSet<AgentId> = w.agents().cloned().collect();
    region_boundaries(w, &all, dir)
}

/// Classifies the agents of `region`, treating agents outside it as
/// nonexistent. Edge takes precedence, then transmission, then observation.
pub fn region_boundaries(w: &World, region: &BTreeSet<AgentId>, dir: &str) -> BoundaryReport {
    let mut kinds = BTreeMap::new();
    for a in region.iter().filter(|a| w.contains_agent(a)) {
        let along: Vec<&Promise> = w
            .promises()
            .iter()
            .filter(|p| {
                &p.promiser == a && p.is_adjacency() && p.body.direction.as_deref() == Some(dir)
            })
            .collect();
        let kind = if along.iter().any(|p| !region.contains(&p.promisee)) {
            BoundaryKind::Edge
        } else if !along.iter().any(|p| p.polarity == Polarity::Plus) {
            BoundaryKind::Transmission
        } else if !along.iter().any(|p| p.polarity == Polarity::Minus) {
            BoundaryKind::Observation
        } else {
            BoundaryKind::Interior
        };
        kinds.insert(a.clone(), kind);
    }
    BoundaryReport {
        direction: dir.to_string(),
        kinds,
    }
}

/// The unique `+adj_dir` successor of `i`.
pub fn successor(w: &World, i: &AgentId, dir: &str) -> Result<AgentId, TopologyError> {
    if !w.contains_agent(i) {
        return Err(ModelError::UnknownAgent(i.clone()).into());
    }
    let succ: BTreeSet<&AgentId> = w
        .promises()
        .iter()
        .filter(|p| &p.promiser == i && p.offers_adjacency(dir))
        .map(|p| &p.promisee)
        .collect();
    match succ.len() {
        0 => Err(TopologyError::NoSuccessor {
            agent: i.clone(),
            direction: dir.to_string(),
        }),
        1 => Ok(succ.into_iter().next().expect("one").clone()),
        count => Err(TopologyError::AmbiguousSuccessor {
            agent: i.clone(),
            direction: dir.to_string(),
            count,
        }),
    }
}

/// Forward difference `f(i+) - f(i)` along `dir`.
pub fn graph_derivative(
    w: &World,
    f: &BTreeMap<AgentId, Rational64>,
    i: &AgentId,
    dir: &str,
) -> Result<Rational64, TopologyError> {
    let next = successor(w, i, dir)?;
    let at = |a: &AgentId| {
        f.get(a)
            .copied()
            .ok_or_else(|| TopologyError::MissingValue(a.clone()))
    };
    Ok(at(&next)? - at(i)?)
}

/// Half the number of `+adj` promises the agent makes.
pub fn local_dimension(w: &World, i: &AgentId) -> Result<Rational64, TopologyError> {
    if !w.contains_agent(i) {
        return Err(ModelError::UnknownAgent(i.clone()).into());
    }
    let k_out = w.adjacency_offers(i).count() as i64;
    Ok(Rational64::new(k_out, 2))
}
