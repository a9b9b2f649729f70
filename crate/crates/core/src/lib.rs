//! Delay differential equations by Chebyshev collocation of the history
//! segment and Magnus time stepping.
//!
//! A single-delay linear problem
//!
//! ```text
//! x'(t) = A(t) x(t) + B(t) x(t - tau),    x(t) = phi(t) on [-tau, 0]
//! ```
//!
//! is replaced by an ordinary differential equation for the samples of
//! `x(t + theta_j)` at the `N + 1` shifted Chebyshev nodes `theta_j` of
//! `[-tau, 0]`. That system, of dimension `d (N + 1)`, is integrated
//! interval by interval with exponential Magnus integrators of order 2, 4
//! or 6. For periodic coefficients the same machinery propagates the
//! identity matrix over one period and returns the characteristic
//! multipliers. Quasilinear problems `x' = A(x(t - tau)) x(t)` use the
//! nonlinear Magnus schemes of order 2 and 3, which keep the total mass
//! and positivity of graph-Laplacian models at the interval ends.
//!
//! ```
//! use magdde::{dde, models};
//!
//! let bench = models::example1_scalar_periodic();
//! let opts = dde::SolveOptions::new(12, 8, 4, std::f64::consts::PI);
//! let traj = dde::solve(&bench.problem, &opts).unwrap();
//! assert_eq!(traj.intervals.len(), 2);
//! ```

pub mod dde;
pub mod error;
pub mod linalg;
pub mod magnus;
pub mod models;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{ComplexSpectrum, DenseMatrix};
