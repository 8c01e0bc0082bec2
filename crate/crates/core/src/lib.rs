//! Promise-theoretic semantic spacetime.
//!
//! A [`World`] of autonomous agents and the promises they make is the only
//! state. Space is the graph of adjacency bindings between agents; time is
//! what an observer can tell has changed. Everything else is a function of
//! a world:
//!
//! - [`topology`]: adjacency matrix, degrees, components, centrality,
//!   coarse-graining, boundaries.
//! - [`coordinates`]: matroid bases, matrix decomposition and coordinate
//!   tuples.
//! - [`motion`]: the three kinds of motion and observed speed.
//! - [`timeline`]: local clocks, causal order, overlap inference.
//! - [`semantics`]: concepts, associations, stories, index maps.
//! - [`sstg`], [`dot`], [`generate`]: text format, Graphviz export and
//!   regular topologies.

pub mod coordinates;
pub mod dot;
pub mod fixtures;
pub mod generate;
pub mod model;
pub mod motion;
pub mod semantics;
pub mod sstg;
pub mod timeline;
pub mod topology;

pub use model::{
    aid, AgentId, AssociationClass, AssociationType, Attributes, BodyKind, ModelError, Polarity,
    Promise, PromiseBody, World,
};
