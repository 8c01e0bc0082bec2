//! Knowledge-space layer over a world: concepts, typed associations with
//! inverses, stories, semantic and occurrence distance, index maps and
//! familiarity.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::coordinates::CoordinateChart;
use crate::model::{
    AgentId, AssociationType, Attributes, BodyKind, ModelError, Polarity, Promise, PromiseBody,
    World,
};
use crate::topology::{hop_distance, TopologyError};

pub const KIND_KEY: &str = "kind";
pub const CONCEPT: &str = "concept";
pub const FAMILIARITY: &str = "familiarity";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("concept {0} already exists")]
    DuplicateConcept(String),
    #[error("{0} is neither an agent nor a scalar label")]
    UnknownName(String),
    #[error("chart has no tuple for {0}")]
    ChartIncomplete(AgentId),
    #[error("index of {entries} entries exceeds the {agents} locations it indexes")]
    IndexTooLarge { entries: usize, agents: usize },
}

impl From<TopologyError> for SemanticError {
    fn from(e: TopologyError) -> Self {
        match e {
            TopologyError::Model(m) => SemanticError::Model(m),
            other => unreachable!("hop distance only fails on unknown agents: {other}"),
        }
    }
}

/// An agent together with the scalar labels it promises.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticElement {
    pub agent: AgentId,
    pub scalars: BTreeSet<String>,
}

pub fn element(w: &World, a: &AgentId) -> Result<SemanticElement, SemanticError> {
    w.require(a)?;
    Ok(SemanticElement {
        agent: a.clone(),
        scalars: w
            .scalar_promises(a)
            .filter(|p| p.polarity == Polarity::Plus)
            .map(|p| p.body.label.clone())
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConceptMode {
    /// A new hub agent offers the concept to each exemplar, which accepts it.
    #[default]
    Hub,
    /// Every exemplar offers the concept to every other; no hub.
    Clique,
}

pub fn define_concept(
    w: &World,
    name: &str,
    exemplars: &BTreeSet<AgentId>,
    mode: ConceptMode,
) -> Result<World, SemanticError> {
    for e in exemplars {
        w.require(e)?;
    }
    let body = PromiseBody::vector(name);
    let mut out = w.clone();
    match mode {
        ConceptMode::Hub => {
            let hub = AgentId::new(name)?;
            if w.contains_agent(&hub) {
                return Err(SemanticError::DuplicateConcept(name.to_string()));
            }
            let attrs: Attributes = [(KIND_KEY.to_string(), CONCEPT.to_string())].into();
            out.insert_agent(hub.clone(), attrs)?;
            for e in exemplars {
                out.insert_promise(Promise::plus(&hub, body.clone(), e))?;
                out.insert_promise(Promise::minus(e, body.clone(), &hub))?;
            }
        }
        ConceptMode::Clique => {
            for a in exemplars {
                for b in exemplars.iter().filter(|b| *b != a) {
                    let p = Promise::plus(a, body.clone(), b);
                    out.check_promise(&p)?;
                    out.push_unique(p);
                }
            }
        }
    }
    Ok(out)
}

/// Registers `t` and adds the four promises of the association and its
/// inverse. Repeating it changes nothing.
pub fn associate(
    w: &World,
    from: &AgentId,
    to: &AgentId,
    t: &AssociationType,
) -> Result<World, SemanticError> {
    w.require(from)?;
    w.require(to)?;
    let mut out = w.clone();
    out.insert_association(t.clone())?;
    let fwd = PromiseBody::vector(&t.label);
    let inv = PromiseBody::vector(&t.inverse);
    for p in [
        Promise::plus(from, fwd.clone(), to),
        Promise::minus(to, fwd, from),
        Promise::plus(to, inv.clone(), from),
        Promise::minus(from, inv, to),
    ] {
        out.check_promise(&p)?;
        out.push_unique(p);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoryStep {
    pub from: AgentId,
    pub label: String,
    pub to: AgentId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Story {
    pub steps: Vec<StoryStep>,
}

impl Story {
    pub fn end(&self) -> Option<&AgentId> {
        self.steps.last().map(|s| &s.to)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StoryConfig {
    /// Also follow containment, which is not quasi-transitive.
    pub include_containment: bool,
    /// Inference rules: labels rewritten before classification.
    pub relabel: BTreeMap<String, String>,
}

fn is_semantic(p: &Promise) -> bool {
    p.body.kind == BodyKind::Vector && !p.is_adjacency() && !p.body.is_self_loop()
}

/// Outgoing story links from each agent, sorted by (target, label).
fn story_links(w: &World, cfg: &StoryConfig) -> BTreeMap<AgentId, BTreeSet<(AgentId, String)>> {
    let mut out: BTreeMap<AgentId, BTreeSet<(AgentId, String)>> = BTreeMap::new();
    for p in w
        .promises()
        .iter()
        .filter(|p| p.polarity == Polarity::Plus && is_semantic(p))
    {
        let label = cfg.relabel.get(&p.body.label).unwrap_or(&p.body.label);
        let Some(t) = w.association(label) else {
            continue;
        };
        if t.class.is_quasi_transitive() || cfg.include_containment {
            out.entry(p.promiser.clone())
                .or_default()
                .insert((p.promisee.clone(), label.clone()));
        }
    }
    out
}

/// Every maximal simple chain of associations from `start` with at most
/// `max_len` steps. A chain is maximal when it reaches `max_len` or every
/// next link leads back onto it. Branches are explored in (target, label)
/// order.
pub fn stories(
    w: &World,
    start: &AgentId,
    max_len: usize,
    cfg: &StoryConfig,
) -> Result<Vec<Story>, SemanticError> {
    w.require(start)?;
    let links = story_links(w, cfg);
    let mut out = Vec::new();
    let mut path: Vec<StoryStep> = Vec::new();
    let mut on_path: BTreeSet<AgentId> = BTreeSet::from([start.clone()]);
    extend(&links, start, max_len, &mut path, &mut on_path, &mut out);
    Ok(out)
}

fn extend(
    links: &BTreeMap<AgentId, BTreeSet<(AgentId, String)>>,
    here: &AgentId,
    max_len: usize,
    path: &mut Vec<StoryStep>,
    on_path: &mut BTreeSet<AgentId>,
    out: &mut Vec<Story>,
) {
    let next: Vec<&(AgentId, String)> = if path.len() < max_len {
        links
            .get(here)
            .into_iter()
            .flatten()
            .filter(|(to, _)| !on_path.contains(to))
            .collect()
    } else {
        Vec::new()
    };
    if next.is_empty() {
        if !path.is_empty() {
            out.push(Story {
                steps: path.clone(),
            });
        }
        return;
    }
    for (to, label) in next {
        path.push(StoryStep {
            from: here.clone(),
            label: label.clone(),
            to: to.clone(),
        });
        on_path.insert(to.clone());
        extend(links, to, max_len, path, on_path, out);
        on_path.remove(to);
        path.pop();
    }
}

/// Checks a story against the world: steps chain, agents do not repeat, and
/// each step is an offered association of an allowed class.
pub fn story_is_sound(w: &World, s: &Story, cfg: &StoryConfig) -> bool {
    let links = story_links(w, cfg);
    let mut seen = BTreeSet::new();
    if let Some(first) = s.steps.first() {
        seen.insert(&first.from);
    }
    s.steps.windows(2).all(|p| p[0].to == p[1].from)
        && s.steps.iter().all(|st| {
            seen.insert(&st.to)
                && links
                    .get(&st.from)
                    .is_some_and(|l| l.contains(&(st.to.clone(), st.label.clone())))
        })
}

/// Hops over semantic links (any vector promise other than adjacency),
/// traversed both ways.
pub fn semantic_distance(
    w: &World,
    a: &AgentId,
    b: &AgentId,
) -> Result<Option<usize>, SemanticError> {
    w.require(a)?;
    w.require(b)?;
    let mut nb: BTreeMap<&AgentId, BTreeSet<&AgentId>> = BTreeMap::new();
    for p in w.promises().iter().filter(|p| is_semantic(p)) {
        nb.entry(&p.promiser).or_default().insert(&p.promisee);
        nb.entry(&p.promisee).or_default().insert(&p.promiser);
    }
    let mut dist = BTreeMap::from([(a, 0usize)]);
    let mut queue = VecDeque::from([a]);
    while let Some(u) = queue.pop_front() {
        if u == b {
            return Ok(Some(dist[u]));
        }
        for &v in nb.get(u).into_iter().flatten() {
            if !dist.contains_key(v) {
                dist.insert(v, dist[u] + 1);
                queue.push_back(v);
            }
        }
    }
    Ok(None)
}

/// Hops over spacetime adjacency only.
pub fn occurrence_distance(
    w: &World,
    a: &AgentId,
    b: &AgentId,
) -> Result<Option<usize>, SemanticError> {
    Ok(hop_distance(w, a, b)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexMap {
    /// Sorted by name, names unique.
    pub entries: Vec<(String, Vec<u32>)>,
}

/// Maps each name to the chart tuple of its carrier: the agent itself, or
/// the first agent in canonical order promising the name as a scalar.
pub fn build_index(
    w: &World,
    chart: &CoordinateChart,
    names: &BTreeSet<String>,
) -> Result<IndexMap, SemanticError> {
    if let Some(missing) = w.agents().find(|a| !chart.tuples.contains_key(*a)) {
        return Err(SemanticError::ChartIncomplete(missing.clone()));
    }
    if names.len() > w.agent_count() {
        return Err(SemanticError::IndexTooLarge {
            entries: names.len(),
            agents: w.agent_count(),
        });
    }
    let mut entries = Vec::with_capacity(names.len());
    for name in names {
        let carrier = AgentId::new(name.as_str())
            .ok()
            .filter(|a| w.contains_agent(a))
            .or_else(|| {
                w.agents()
                    .find(|a| {
                        w.scalar_promises(a)
                            .any(|p| p.polarity == Polarity::Plus && &p.body.label == name)
                    })
                    .cloned()
            })
            .ok_or_else(|| SemanticError::UnknownName(name.clone()))?;
        entries.push((name.clone(), chart.tuples[&carrier].clone()));
    }
    Ok(IndexMap { entries })
}

/// Increments the agent's familiarity counter, starting from 0.
pub fn visit(w: &World, a: &AgentId) -> Result<World, SemanticError> {
    w.require(a)?;
    let n: u64 = w
        .attribute(a, FAMILIARITY)
        .and_then(|v| v.parse().ok())
        .unwrap_or(0);
    Ok(w.set_attribute(a, FAMILIARITY, &(n + 1).to_string())?)
}

pub fn familiarity(w: &World, a: &AgentId) -> u64 {
    w.attribute(a, FAMILIARITY)
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}
