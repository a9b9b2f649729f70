//! Delay problems, their collocation, the interval-by-interval driver and
//! Floquet analysis.

mod floquet;
mod metrics;
mod problem;
mod solver;
mod system;

pub use floquet::{monodromy, stability_verdict, MonodromyOptions, MonodromyResult, Stability};
pub use metrics::{conservation, mean_error, relative_error, ConservationReport};
pub use problem::{DdeProblem, HistoryFn, LinearDdeProblem, QuasilinearDdeProblem, StateCoefficient, TimeCoefficient};
pub use solver::{
    interval_plan, solve, solve_from, IntervalRecord, IntervalSpan, SolveOptions, StepState, Trajectory, SNAP_TOLERANCE,
};
pub use system::{
    assemble_linear, assemble_quasilinear, discretize, DiscretizedSystem, LinearOperator, QuasilinearOperator,
};
