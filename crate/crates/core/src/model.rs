//! Agents, promises and the world value that holds them.
//!
//! A [`World`] is an immutable value: every operation borrows the current
//! world and returns a new one. Only the promiser named in a [`Promise`] can
//! introduce it, so no operation here creates a promise on behalf of a third
//! party.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Body label used for adjacency promises.
pub const ADJ: &str = "adj";
/// Body label of a diagonal (self) promise; the only label allowed to target its own promiser.
pub const SELF_LOOP: &str = "self-loop";

/// Characters that may never appear inside a token.
const RESERVED: &[char] = &[',', '{', '}', ':', '=', '#', '"'];

pub fn is_valid_token(s: &str) -> bool {
    !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || RESERVED.contains(&c))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid token {0:?}")]
    InvalidToken(String),
    #[error("agent {0} already exists")]
    DuplicateAgent(AgentId),
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("duplicate promise {0}")]
    DuplicatePromise(Box<Promise>),
    #[error("agent {0} cannot bind adjacency to itself")]
    SelfAdjacency(AgentId),
    #[error("promise from {0} to itself must use the {SELF_LOOP} label")]
    SelfPromise(AgentId),
    #[error("promise {0} has an empty scope")]
    EmptyScope(Box<Promise>),
    #[error("scalar body {0} cannot carry a direction")]
    ScalarWithDirection(String),
    #[error("adjacency body needs a direction")]
    MissingDirection,
    #[error("association label {0} is already registered differently")]
    ConflictingAssociation(String),
}

/// Name of an agent. Agents are ordered lexicographically by id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Result<Self, ModelError> {
        let id = id.into();
        if is_valid_token(&id) {
            Ok(AgentId(id))
        } else {
            Err(ModelError::InvalidToken(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for AgentId {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentId::new(s)
    }
}

/// Shorthand for building ids from literals in tests and fixtures. Panics on invalid tokens.
pub fn aid(id: &str) -> AgentId {
    AgentId::new(id).expect("valid agent id")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    /// Offer ("I will give").
    Plus,
    /// Acceptance ("I will use").
    Minus,
}

impl Polarity {
    pub fn symbol(self) -> char {
        match self {
            Polarity::Plus => '+',
            Polarity::Minus => '-',
        }
    }

    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Plus => Polarity::Minus,
            Polarity::Minus => Polarity::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BodyKind {
    /// Intrinsic property of the promiser.
    Scalar,
    /// Relation between promiser and promisee.
    Vector,
}

impl BodyKind {
    pub fn name(self) -> &'static str {
        match self {
            BodyKind::Scalar => "scalar",
            BodyKind::Vector => "vector",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PromiseBody {
    pub kind: BodyKind,
    pub label: String,
    pub payload: BTreeSet<String>,
    pub direction: Option<String>,
}

impl PromiseBody {
    pub fn scalar(label: &str) -> Self {
        PromiseBody {
            kind: BodyKind::Scalar,
            label: label.to_string(),
            payload: BTreeSet::new(),
            direction: None,
        }
    }

    pub fn vector(label: &str) -> Self {
        PromiseBody {
            kind: BodyKind::Vector,
            label: label.to_string(),
            payload: BTreeSet::new(),
            direction: None,
        }
    }

    pub fn adjacency(direction: &str) -> Self {
        PromiseBody {
            direction: Some(direction.to_string()),
            ..PromiseBody::vector(ADJ)
        }
    }

    pub fn self_loop() -> Self {
        PromiseBody::vector(SELF_LOOP)
    }

    pub fn with_payload<I, S>(mut self, items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.payload = items.into_iter().map(Into::into).collect();
        self
    }

    pub fn is_adjacency(&self) -> bool {
        self.kind == BodyKind::Vector && self.label == ADJ
    }

    pub fn is_self_loop(&self) -> bool {
        self.label == SELF_LOOP
    }

    /// Matching key: the label, suffixed with `_direction` when there is one (`adj_R`).
    pub fn key(&self) -> String {
        match &self.direction {
            Some(d) => format!("{}_{}", self.label, d),
            None => self.label.clone(),
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        if !is_valid_token(&self.label) {
            return Err(ModelError::InvalidToken(self.label.clone()));
        }
        if let Some(bad) = self.payload.iter().find(|p| !is_valid_token(p)) {
            return Err(ModelError::InvalidToken(bad.clone()));
        }
        match (&self.direction, self.kind) {
            (Some(_), BodyKind::Scalar) => Err(ModelError::ScalarWithDirection(self.label.clone())),
            (Some(d), _) if !is_valid_token(d) => Err(ModelError::InvalidToken(d.clone())),
            (None, BodyKind::Vector) if self.label == ADJ => Err(ModelError::MissingDirection),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Promise {
    pub promiser: AgentId,
    pub promisee: AgentId,
    pub polarity: Polarity,
    pub body: PromiseBody,
    pub scope: BTreeSet<AgentId>,
    /// Body label this promise is conditional on (`b1 | b2`).
    pub condition: Option<String>,
}

impl Promise {
    /// A promise with the default scope `{promiser, promisee}` and no condition.
    pub fn new(
        promiser: AgentId,
        polarity: Polarity,
        body: PromiseBody,
        promisee: AgentId,
    ) -> Self {
        let scope = [promiser.clone(), promisee.clone()].into_iter().collect();
        Promise {
            promiser,
            promisee,
            polarity,
            body,
            scope,
            condition: None,
        }
    }

    pub fn plus(promiser: &AgentId, body: PromiseBody, promisee: &AgentId) -> Self {
        Promise::new(promiser.clone(), Polarity::Plus, body, promisee.clone())
    }

    pub fn minus(promiser: &AgentId, body: PromiseBody, promisee: &AgentId) -> Self {
        Promise::new(promiser.clone(), Polarity::Minus, body, promisee.clone())
    }

    pub fn with_scope<I: IntoIterator<Item = AgentId>>(mut self, scope: I) -> Self {
        self.scope = scope.into_iter().collect();
        self
    }

    pub fn with_condition(mut self, label: &str) -> Self {
        self.condition = Some(label.to_string());
        self
    }

    pub fn default_scope(&self) -> BTreeSet<AgentId> {
        [self.promiser.clone(), self.promisee.clone()]
            .into_iter()
            .collect()
    }

    pub fn is_adjacency(&self) -> bool {
        self.body.is_adjacency()
    }

    /// True for `+adj` promises along `dir`.
    pub fn offers_adjacency(&self, dir: &str) -> bool {
        self.polarity == Polarity::Plus
            && self.body.is_adjacency()
            && self.body.direction.as_deref() == Some(dir)
    }

    /// The counterpart a well-formed binding needs: same body, opposite polarity, reversed.
    pub fn complement(&self) -> Promise {
        let mut c = Promise::new(
            self.promisee.clone(),
            self.polarity.flip(),
            self.body.clone(),
            self.promiser.clone(),
        );
        c.condition = self.condition.clone();
        c
    }

    /// Apply an agent renaming to every agent reference in the promise.
    pub fn renamed(&self, map: impl Fn(&AgentId) -> AgentId) -> Promise {
        Promise {
            promiser: map(&self.promiser),
            promisee: map(&self.promisee),
            polarity: self.polarity,
            body: self.body.clone(),
            scope: self.scope.iter().map(&map).collect(),
            condition: self.condition.clone(),
        }
    }
}

impl fmt::Display for Promise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} -({}{})-> {}",
            self.promiser,
            self.polarity.symbol(),
            self.body.key(),
            self.promisee
        )
    }
}

/// The three kinds of semantic association.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AssociationClass {
    Causation,
    Topology,
    Containment,
}

impl AssociationClass {
    pub fn name(self) -> &'static str {
        match self {
            AssociationClass::Causation => "causation",
            AssociationClass::Topology => "topology",
            AssociationClass::Containment => "containment",
        }
    }

    /// Causation and topology chain into stories; containment does not.
    pub fn is_quasi_transitive(self) -> bool {
        !matches!(self, AssociationClass::Containment)
    }
}

impl std::str::FromStr for AssociationClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "causation" => Ok(AssociationClass::Causation),
            "topology" => Ok(AssociationClass::Topology),
            "containment" => Ok(AssociationClass::Containment),
            other => Err(format!("unknown association class {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AssociationType {
    pub class: AssociationClass,
    pub label: String,
    pub inverse: String,
}

impl AssociationType {
    pub fn new(class: AssociationClass, label: &str, inverse: &str) -> Self {
        AssociationType {
            class,
            label: label.to_string(),
            inverse: inverse.to_string(),
        }
    }

    pub fn inverted(&self) -> AssociationType {
        AssociationType {
            class: self.class,
            label: self.inverse.clone(),
            inverse: self.label.clone(),
        }
    }
}

pub type Attributes = BTreeMap<String, String>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct World {
    agents: BTreeMap<AgentId, Attributes>,
    promises: Vec<Promise>,
    index: BTreeSet<Promise>,
    associations: BTreeMap<String, AssociationType>,
}

impl World {
    pub fn new() -> Self {
        World::default()
    }

    /// Agents in canonical (lexicographic) order.
    pub fn agents(&self) -> impl ExactSizeIterator<Item = &AgentId> + '_ {
        self.agents.keys()
    }

    pub fn agent_ids(&self) -> Vec<AgentId> {
        self.agents.keys().cloned().collect()
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn contains_agent(&self, id: &AgentId) -> bool {
        self.agents.contains_key(id)
    }

    pub fn attributes(&self, id: &AgentId) -> Option<&Attributes> {
        self.agents.get(id)
    }

    pub fn attribute(&self, id: &AgentId, key: &str) -> Option<&str> {
        self.agents
            .get(id)
            .and_then(|a| a.get(key))
            .map(String::as_str)
    }

    /// Promises in insertion order.
    pub fn promises(&self) -> &[Promise] {
        &self.promises
    }

    pub fn contains_promise(&self, p: &Promise) -> bool {
        self.index.contains(p)
    }

    pub fn associations(&self) -> impl Iterator<Item = &AssociationType> {
        self.associations.values()
    }

    /// Looks up an association by its forward or inverse label.
    pub fn association(&self, label: &str) -> Option<AssociationType> {
        if let Some(t) = self.associations.get(label) {
            return Some(t.clone());
        }
        self.associations
            .values()
            .find(|t| t.inverse == label)
            .map(AssociationType::inverted)
    }

    pub fn add_agent(&self, id: AgentId, attrs: Attributes) -> Result<World, ModelError> {
        let mut w = self.clone();
        w.insert_agent(id, attrs)?;
        Ok(w)
    }

    /// Removes an agent and withdraws every promise it is party to. Scope
    /// mentions are pruned; a promise whose scope becomes empty is withdrawn.
    pub fn remove_agent(&self, id: &AgentId) -> Result<World, ModelError> {
        self.require(id)?;
        let mut w = self.clone();
        w.agents.remove(id);
        let kept: Vec<Promise> = std::mem::take(&mut w.promises)
            .into_iter()
            .filter(|p| &p.promiser != id && &p.promisee != id)
            .filter_map(|mut p| {
                p.scope.remove(id);
                (!p.scope.is_empty()).then_some(p)
            })
            .collect();
        w.index.clear();
        for p in kept {
            // Pruning may collapse two promises onto the same tuple.
            w.push_unique(p);
        }
        Ok(w)
    }

    pub fn make_promise(&self, p: Promise) -> Result<World, ModelError> {
        let mut w = self.clone();
        w.insert_promise(p)?;
        Ok(w)
    }

    /// Withdraws a promise if present. Withdrawal is deletion.
    pub fn withdraw_promise(&self, p: &Promise) -> World {
        let mut w = self.clone();
        w.remove_promise(p);
        w
    }

    /// Adds the four promises of an adjacency binding between `a` and `b`
    /// along `dir`. Re-binding is a no-op.
    pub fn bind_adjacency(&self, a: &AgentId, b: &AgentId, dir: &str) -> Result<World, ModelError> {
        let mut w = self.clone();
        w.insert_binding(a, b, dir)?;
        Ok(w)
    }

    pub fn unbind_adjacency(&self, a: &AgentId, b: &AgentId, dir: &str) -> World {
        let mut w = self.clone();
        for p in binding_promises(a, b, dir) {
            w.remove_promise(&p);
        }
        w
    }

    /// Intersection of what `a1` offers (`+label`) to `a2` and what `a2`
    /// accepts (`-label`) from `a1`. `None` when either half is missing.
    ///
    /// `label` is matched against [`PromiseBody::key`], so adjacency is
    /// queried as `adj_<dir>`.
    pub fn binding(&self, a1: &AgentId, a2: &AgentId, label: &str) -> Option<BTreeSet<String>> {
        let payload = |from: &AgentId, to: &AgentId, pol: Polarity| {
            self.promises
                .iter()
                .filter(|p| &p.promiser == from && &p.promisee == to && p.polarity == pol)
                .filter(|p| p.body.key() == label)
                .fold(None::<BTreeSet<String>>, |acc, p| {
                    let mut s = acc.unwrap_or_default();
                    s.extend(p.body.payload.iter().cloned());
                    Some(s)
                })
        };
        let offered = payload(a1, a2, Polarity::Plus)?;
        let accepted = payload(a2, a1, Polarity::Minus)?;
        Some(offered.intersection(&accepted).cloned().collect())
    }

    /// Effective action `b1 ∩ b2`; empty when no binding exists.
    pub fn effective_binding(&self, a1: &AgentId, a2: &AgentId, label: &str) -> BTreeSet<String> {
        self.binding(a1, a2, label).unwrap_or_default()
    }

    /// The promises whose scope contains `observer`, in insertion order.
    pub fn observed_promises(&self, observer: &AgentId) -> Result<Vec<&Promise>, ModelError> {
        self.require(observer)?;
        Ok(self
            .promises
            .iter()
            .filter(|p| p.scope.contains(observer))
            .collect())
    }

    pub fn register_association(&self, t: AssociationType) -> Result<World, ModelError> {
        let mut w = self.clone();
        w.insert_association(t)?;
        Ok(w)
    }

    pub fn set_attribute(&self, id: &AgentId, key: &str, value: &str) -> Result<World, ModelError> {
        self.require(id)?;
        for t in [key, value] {
            if !is_valid_token(t) {
                return Err(ModelError::InvalidToken(t.to_string()));
            }
        }
        let mut w = self.clone();
        w.agents
            .get_mut(id)
            .expect("checked above")
            .insert(key.to_string(), value.to_string());
        Ok(w)
    }

    /// `+adj` promises made by `id`.
    pub fn adjacency_offers<'a>(
        &'a self,
        id: &'a AgentId,
    ) -> impl Iterator<Item = &'a Promise> + 'a {
        self.promises
            .iter()
            .filter(move |p| &p.promiser == id && p.polarity == Polarity::Plus && p.is_adjacency())
    }

    /// Scalar `+` promises made by `id`.
    pub fn scalar_promises<'a>(
        &'a self,
        id: &'a AgentId,
    ) -> impl Iterator<Item = &'a Promise> + 'a {
        self.promises
            .iter()
            .filter(move |p| &p.promiser == id && p.body.kind == BodyKind::Scalar)
    }

    pub(crate) fn require(&self, id: &AgentId) -> Result<(), ModelError> {
        if self.agents.contains_key(id) {
            Ok(())
        } else {
            Err(ModelError::UnknownAgent(id.clone()))
        }
    }

    pub(crate) fn insert_agent(
        &mut self,
        id: AgentId,
        attrs: Attributes,
    ) -> Result<(), ModelError> {
        if self.agents.contains_key(&id) {
            return Err(ModelError::DuplicateAgent(id));
        }
        if let Some(bad) = attrs
            .iter()
            .flat_map(|(k, v)| [k, v])
            .find(|t| !is_valid_token(t))
        {
            return Err(ModelError::InvalidToken(bad.clone()));
        }
        self.agents.insert(id, attrs);
        Ok(())
    }

    pub(crate) fn check_promise(&self, p: &Promise) -> Result<(), ModelError> {
        self.require(&p.promiser)?;
        self.require(&p.promisee)?;
        if p.scope.is_empty() {
            return Err(ModelError::EmptyScope(Box::new(p.clone())));
        }
        for s in &p.scope {
            self.require(s)?;
        }
        p.body.validate()?;
        if let Some(c) = &p.condition {
            if !is_valid_token(c) {
                return Err(ModelError::InvalidToken(c.clone()));
            }
        }
        if p.promiser == p.promisee && !p.body.is_self_loop() {
            return Err(ModelError::SelfPromise(p.promiser.clone()));
        }
        Ok(())
    }

    pub(crate) fn insert_promise(&mut self, p: Promise) -> Result<(), ModelError> {
        self.check_promise(&p)?;
        if self.index.contains(&p) {
            return Err(ModelError::DuplicatePromise(Box::new(p)));
        }
        self.index.insert(p.clone());
        self.promises.push(p);
        Ok(())
    }

    /// Inserts unless already present; returns whether it was new. Callers
    /// guarantee the promise is well-formed.
    pub(crate) fn push_unique(&mut self, p: Promise) -> bool {
        if self.index.insert(p.clone()) {
            self.promises.push(p);
            true
        } else {
            false
        }
    }

    pub(crate) fn remove_promise(&mut self, p: &Promise) -> bool {
        if self.index.remove(p) {
            self.promises.retain(|q| q != p);
            true
        } else {
            false
        }
    }

    /// Replaces promises in place, keeping insertion order. Replacements
    /// that duplicate an existing promise are dropped.
    pub(crate) fn rewrite_promises(&mut self, f: impl Fn(&Promise) -> Option<Promise>) {
        let old = std::mem::take(&mut self.promises);
        self.index.clear();
        for p in old {
            let q = f(&p).unwrap_or(p);
            self.push_unique(q);
        }
    }

    pub(crate) fn insert_binding(
        &mut self,
        a: &AgentId,
        b: &AgentId,
        dir: &str,
    ) -> Result<(), ModelError> {
        self.require(a)?;
        self.require(b)?;
        if a == b {
            return Err(ModelError::SelfAdjacency(a.clone()));
        }
        if !is_valid_token(dir) {
            return Err(ModelError::InvalidToken(dir.to_string()));
        }
        for p in binding_promises(a, b, dir) {
            self.push_unique(p);
        }
        Ok(())
    }

    /// One-way link: `a`'s `forward` neighbour is `b` and `b`'s `backward`
    /// neighbour is `a`, each offer matched by an acceptance.
    pub(crate) fn insert_directed_link(
        &mut self,
        a: &AgentId,
        b: &AgentId,
        forward: &str,
        backward: &str,
    ) -> Result<(), ModelError> {
        self.require(a)?;
        self.require(b)?;
        if a == b {
            return Err(ModelError::SelfAdjacency(a.clone()));
        }
        for p in directed_link_promises(a, b, forward, backward) {
            self.push_unique(p);
        }
        Ok(())
    }

    pub(crate) fn insert_association(&mut self, t: AssociationType) -> Result<(), ModelError> {
        for tok in [&t.label, &t.inverse] {
            if !is_valid_token(tok) {
                return Err(ModelError::InvalidToken(tok.clone()));
            }
        }
        if let Some(existing) = self.association(&t.label) {
            if existing != t {
                return Err(ModelError::ConflictingAssociation(t.label));
            }
            return Ok(());
        }
        if self.association(&t.inverse).is_some() {
            return Err(ModelError::ConflictingAssociation(t.inverse));
        }
        self.associations.insert(t.label.clone(), t);
        Ok(())
    }
}

/// The four promises of a symmetric adjacency binding, in canonical order.
pub fn binding_promises(a: &AgentId, b: &AgentId, dir: &str) -> [Promise; 4] {
    let body = PromiseBody::adjacency(dir);
    [
        Promise::plus(a, body.clone(), b),
        Promise::plus(b, body.clone(), a),
        Promise::minus(a, body.clone(), b),
        Promise::minus(b, body, a),
    ]
}

pub fn directed_link_promises(
    a: &AgentId,
    b: &AgentId,
    forward: &str,
    backward: &str,
) -> [Promise; 4] {
    let fwd = PromiseBody::adjacency(forward);
    let back = PromiseBody::adjacency(backward);
    [
        Promise::plus(a, fwd.clone(), b),
        Promise::minus(b, fwd, a),
        Promise::plus(b, back.clone(), a),
        Promise::minus(a, back, b),
    ]
}
