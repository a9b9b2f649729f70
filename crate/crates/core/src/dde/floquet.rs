//! Monodromy matrix and characteristic multipliers of periodic linear
//! problems.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::linalg::{eigenvalues, ComplexSpectrum, DenseMatrix};
use crate::magnus::{GuardPolicy, MagnusIntegrator, MagnusOrder};

use super::problem::{DdeProblem, LinearDdeProblem};
use super::solver::{interval_plan, run_guard};
use super::system::discretize;

#[derive(Debug, Clone)]
pub struct MonodromyOptions {
    pub n: usize,
    pub steps_per_delay: usize,
    pub order: u32,
    /// Number of periods to propagate over (the result is `U(T)^periods`).
    pub periods: usize,
    pub guard: GuardPolicy,
}

impl MonodromyOptions {
    pub fn new(n: usize, steps_per_delay: usize, order: u32) -> Self {
        Self {
            n,
            steps_per_delay,
            order,
            periods: 1,
            guard: GuardPolicy::Warn,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MonodromyResult {
    pub monodromy: DenseMatrix,
    pub multipliers: ComplexSpectrum,
    pub n: usize,
    pub steps_per_delay: usize,
    pub order: u32,
    pub horizon: f64,
}

/// Propagate `Y(0) = I` over `[0, periods * T]` and take the eigenvalues of
/// `Y`. Steps are aligned to the multiples of the delay as in
/// [`solve`](super::solve).
pub fn monodromy(problem: &LinearDdeProblem, opts: &MonodromyOptions) -> Result<MonodromyResult> {
    let period = problem
        .period()
        .ok_or_else(|| invalid(format!("problem '{}' has no period set", problem.label())))?;
    if opts.periods == 0 {
        return Err(invalid("number of periods must be at least 1"));
    }
    let order = MagnusOrder::try_from(opts.order)?;
    let integ = MagnusIntegrator::new(order).with_guard(opts.guard);
    let horizon = period * opts.periods as f64;

    let wrapped = DdeProblem::Linear(problem.clone());
    let system = discretize(&wrapped, opts.n)?;
    let op = system.linear_operator(problem);
    let dim = system.big_dim();
    let plan = interval_plan(problem.tau(), 0, horizon, opts.steps_per_delay)?;
    let integ = run_guard(integ, &op, 0.0, plan[0].step_size())?;
    let mut y = DenseMatrix::identity(dim, dim);
    for span in plan {
        let h = span.step_size();
        for k in 0..span.steps {
            let t = span.t_start + k as f64 * h;
            y = integ.step_matrix(&op, t, h, &y)?;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState {
                    interval: span.index,
                    step: k,
                });
            }
        }
    }
    let multipliers = eigenvalues(&y)?;
    Ok(MonodromyResult {
        monodromy: y,
        multipliers,
        n: opts.n,
        steps_per_delay: opts.steps_per_delay,
        order: opts.order,
        horizon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Stable => "stable",
            Self::Unstable => "unstable",
            Self::Marginal => "marginal",
        })
    }
}

/// Stable when every multiplier has modulus below `1 - tol`, unstable when
/// one exceeds `1 + tol`, marginal otherwise.
pub fn stability_verdict(multipliers: &ComplexSpectrum, tol: f64) -> Stability {
    let r = multipliers.spectral_radius();
    if r < 1.0 - tol {
        Stability::Stable
    } else if r > 1.0 + tol {
        Stability::Unstable
    } else {
        Stability::Marginal
    }
}
