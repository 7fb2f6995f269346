//! Stochastic dual coordinate ascent (SDCA) for L2-regularized linear
//! prediction, with exact coordinate updates for hinge, smoothed hinge,
//! absolute deviation, squared and logistic losses, duality-gap stopping,
//! Modified-SGD warm starts, and evaluators for the iteration-count bounds
//! so measured convergence can be laid against theory.

pub mod bounds;
pub mod data;
pub mod experiment;
pub mod losses;
pub mod solver;

pub use data::{normalize_to_unit_ball, parse_svmlight, Dataset, Example, SparseVector};
pub use losses::{CoordinateProblem, LossKind, LossSpec};
pub use solver::{SolverConfig, SolverState, TraceRecord};
