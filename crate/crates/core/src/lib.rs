//! Executable machinery for normalized sparse-graph statistics: motif
//! counts under the s_p / t_p normalizations, step-kernel algebra, cut
//! norms and cut metrics, constructive weak and strong (ε,p)-regular
//! partitions, the balanced-partition density-matrix metric, and seeded
//! samplers for inhomogeneous random graphs and the standard
//! counterexample constructions.
//!
//! Everything is exact where exactness is tractable (integer counts,
//! enumerated cut norms) and explicitly budgeted and seeded where it is
//! not (heuristic cut search, sampled partition clouds, witness searches).

pub mod counts;
pub mod cutnorm;
pub mod error;
pub mod graph;
pub mod kernel;
pub mod motif;
pub mod partition_metric;
pub mod regularity;
pub mod sampler;

pub use error::{Error, Result};
pub use graph::{Graph, VertexSetPair};
pub use kernel::StepKernel;
pub use motif::Motif;
