//! Distributed constrained convex optimization over time-varying unbalanced
//! digraphs.
//!
//! The algorithm (D-RFP, distributed random-fixed projected) rewrites
//! min sum_j f_j(x) s.t. g_j(x) <= 0, x in X in epigraph form, which makes
//! every node's local objective the same linear function and removes the
//! dependence of the consensus limit on the graph's Perron weights. Each
//! round mixes neighbor states with row-stochastic weights, steps against
//! the linear cost, then takes one Polyak projection step toward a randomly
//! drawn local constraint and one toward the node's objective constraint.
//!
//! The crate bundles the engine, a plain distributed-subgradient baseline
//! that exhibits the unbalancedness failure, graph-sequence generation and
//! Perron diagnostics, centralized reference oracles, and a batch simulation
//! harness with a CLI.

pub mod convex;
pub mod engine;
pub mod error;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod problem;
pub mod stream;

pub use error::{Error, Result};
