//! Cluster-expansion toolkit: graph and tree combinatorics, Ursell
//! coefficients, pair-potential stability, Mayer-series bounds, abstract
//! polymer gases, the two-dimensional Ising model and hard-sphere overlap
//! integrals.

pub mod error;
pub mod graphs;
pub mod hardsphere;
pub mod ising;
pub mod mayer;
pub mod numeric;
pub mod polymer;
pub mod potentials;
pub mod report;
pub mod ursell;

pub use error::{Error, Result};
pub use graphs::{Caps, EdgeOrder, LabeledGraph, RootedTree};
pub use report::BoundReport;
pub use ursell::InteractionMatrix;
