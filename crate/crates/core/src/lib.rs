//! Random-cluster and Potts models on tori, thick tori and slabs.
//!
//! The crate bundles exact enumeration on small graphs, cluster Monte Carlo
//! (Swendsen-Wang, Chayes-Machta, single-bond heat bath), torus and slab
//! lattice Green functions, a numerical check of the infrared bound, and
//! finite-size crossing estimates of critical points.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod critical;
pub mod error;
pub mod exact;
pub mod graph;
pub mod greens;
pub mod irb;
pub mod lattice;
pub mod sampler;
pub mod union_find;

pub use error::{Error, Result};
pub use graph::{Graph, VertexId};
pub use lattice::{AxisSpec, BallSubgraph, Lattice, Wrap};
