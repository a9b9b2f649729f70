//! Method of steps over the intervals `[i tau, (i + 1) tau]`.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::error::{invalid, Error, Result};
use log::warn;

use crate::magnus::{nonlinear_magnus_step, GuardPolicy, MagnusIntegrator, MagnusOrder, NonlinearOrder, TimeMatrix};

use super::problem::DdeProblem;
use super::system::{discretize, DiscretizedSystem};

/// Relative slack (in units of `tau`) under which an end time is snapped
/// onto the nearest multiple of the delay.
pub const SNAP_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Number of collocation intervals (`N + 1` nodes).
    pub n: usize,
    /// Steps per delay interval.
    pub steps_per_delay: usize,
    /// 2, 4 or 6 for linear problems, 2 or 3 for quasilinear ones.
    pub order: u32,
    pub t_final: f64,
    /// Keep the state after every step, not just at interval ends.
    pub store_steps: bool,
    pub guard: GuardPolicy,
}

impl SolveOptions {
    pub fn new(n: usize, steps_per_delay: usize, order: u32, t_final: f64) -> Self {
        Self {
            n,
            steps_per_delay,
            order,
            t_final,
            store_steps: false,
            guard: GuardPolicy::Warn,
        }
    }

    pub fn store_steps(mut self, yes: bool) -> Self {
        self.store_steps = yes;
        self
    }

    pub fn guard(mut self, guard: GuardPolicy) -> Self {
        self.guard = guard;
        self
    }
}

/// One piece of the time axis integrated with equal steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalSpan {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl IntervalSpan {
    pub fn step_size(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps as f64
    }
}

/// Break `[first * tau, t_end]` at the multiples of `tau`. Full intervals get
/// `steps_per_delay` steps; a trailing partial one gets
/// `ceil(steps_per_delay * fraction)` equal steps ending exactly at `t_end`.
pub fn interval_plan(tau: f64, first: usize, t_end: f64, steps_per_delay: usize) -> Result<Vec<IntervalSpan>> {
    if steps_per_delay == 0 {
        return Err(invalid("steps per delay interval must be at least 1"));
    }
    let start = first as f64 * tau;
    if !(t_end.is_finite() && t_end > start) {
        return Err(invalid(format!(
            "final time {t_end} must exceed the start time {start}"
        )));
    }
    let ratio = t_end / tau;
    let nearest = ratio.round();
    let (full_end, partial) = if (ratio - nearest).abs() <= SNAP_TOLERANCE && nearest as usize > first {
        (nearest as usize, None)
    } else {
        (ratio.floor() as usize, Some(t_end))
    };
    let mut spans: Vec<IntervalSpan> = (first..full_end)
        .map(|i| IntervalSpan {
            index: i,
            t_start: i as f64 * tau,
            t_end: (i + 1) as f64 * tau,
            steps: steps_per_delay,
        })
        .collect();
    if let Some(end) = partial {
        let t_start = full_end.max(first) as f64 * tau;
        let frac = (end - t_start) / tau;
        spans.push(IntervalSpan {
            index: full_end.max(first),
            t_start,
            t_end: end,
            steps: ((steps_per_delay as f64 * frac).ceil() as usize).max(1),
        });
    }
    Ok(spans)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepState {
    pub t: f64,
    pub state: Vec<f64>,
}

/// Result of integrating one span.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRecord {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
    /// State at `t_end`: block `j` approximates `x(t_end + theta_j)`.
    pub state: Vec<f64>,
    /// Intermediate states, only with [`SolveOptions::store_steps`].
    pub step_states: Vec<StepState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dim: usize,
    pub n: usize,
    pub tau: f64,
    pub steps_per_delay: usize,
    pub order: u32,
    pub problem_label: String,
    pub problem_hash: u64,
    pub t_initial: f64,
    pub initial_state: Vec<f64>,
    pub intervals: Vec<IntervalRecord>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.intervals.last().map_or(&self.initial_state, |r| &r.state)
    }

    pub fn final_time(&self) -> f64 {
        self.intervals.last().map_or(self.t_initial, |r| r.t_end)
    }

    /// Value of the solution at the end of the run (block 0 of the state).
    pub fn final_value(&self) -> &[f64] {
        &self.final_state()[..self.dim]
    }
}

fn label_hash(label: &str, dim: usize, tau: f64) -> u64 {
    let mut h = DefaultHasher::new();
    label.hash(&mut h);
    dim.hash(&mut h);
    tau.to_bits().hash(&mut h);
    h.finish()
}

/// Under [`GuardPolicy::Warn`] check the bound once for the whole run and
/// step with the guard off, instead of logging at every step.
pub(crate) fn run_guard<A: TimeMatrix + ?Sized>(
    integ: MagnusIntegrator,
    a: &A,
    t: f64,
    h: f64,
) -> Result<MagnusIntegrator> {
    if integ.guard != GuardPolicy::Warn {
        return Ok(integ);
    }
    let estimate = integ.bound_estimate(a, t, h)?;
    if estimate >= std::f64::consts::PI {
        warn!("h*||A_N||_2 ~ {estimate:.3e} >= pi at the first step; convergence of the Magnus expansion is not guaranteed");
    }
    Ok(integ.with_guard(GuardPolicy::Ignore))
}

enum Stepper {
    Linear(MagnusIntegrator),
    Quasilinear(NonlinearOrder),
}

fn stepper_for(problem: &DdeProblem, opts: &SolveOptions) -> Result<Stepper> {
    let bad = || {
        invalid(format!(
            "order {} is not admissible for a {} problem; admissible orders: {:?}",
            opts.order,
            match problem {
                DdeProblem::Linear(_) => "linear",
                DdeProblem::Quasilinear(_) => "quasilinear",
            },
            problem.admissible_orders()
        ))
    };
    Ok(match problem {
        DdeProblem::Linear(_) => Stepper::Linear(
            MagnusIntegrator::new(MagnusOrder::try_from(opts.order).map_err(|_| bad())?).with_guard(opts.guard),
        ),
        DdeProblem::Quasilinear(_) => Stepper::Quasilinear(NonlinearOrder::try_from(opts.order).map_err(|_| bad())?),
    })
}

/// Integrate from the history at `t = 0` up to `opts.t_final`.
pub fn solve(problem: &DdeProblem, opts: &SolveOptions) -> Result<Trajectory> {
    let system = discretize(problem, opts.n)?;
    let phi = system.phi_n().to_vec();
    solve_from(problem, &system, 0, phi, opts)
}

/// Continue from `state`, the collocated solution at `start_interval * tau`.
///
/// Chaining `solve_from` calls reproduces a single long run bit for bit.
pub fn solve_from(
    problem: &DdeProblem,
    system: &DiscretizedSystem,
    start_interval: usize,
    state: Vec<f64>,
    opts: &SolveOptions,
) -> Result<Trajectory> {
    if system.grid().n() != opts.n {
        return Err(invalid(format!(
            "system discretized with N = {} but options ask for N = {}",
            system.grid().n(),
            opts.n
        )));
    }
    if state.len() != system.big_dim() {
        return Err(invalid(format!(
            "initial state has length {}, expected {}",
            state.len(),
            system.big_dim()
        )));
    }
    let tau = problem.tau();
    let plan = interval_plan(tau, start_interval, opts.t_final, opts.steps_per_delay)?;
    let stepper = match (stepper_for(problem, opts)?, problem) {
        (Stepper::Linear(integ), DdeProblem::Linear(p)) => {
            let first = plan[0];
            Stepper::Linear(run_guard(
                integ,
                &system.linear_operator(p),
                first.t_start,
                first.step_size(),
            )?)
        }
        (s, _) => s,
    };

    let mut traj = Trajectory {
        dim: problem.dim(),
        n: opts.n,
        tau,
        steps_per_delay: opts.steps_per_delay,
        order: opts.order,
        problem_label: problem.label().to_string(),
        problem_hash: label_hash(problem.label(), problem.dim(), tau),
        t_initial: start_interval as f64 * tau,
        initial_state: state.clone(),
        intervals: Vec::with_capacity(plan.len()),
    };

    let mut y = state;
    for span in plan {
        let h = span.step_size();
        let mut step_states = Vec::new();
        for k in 0..span.steps {
            let t = span.t_start + k as f64 * h;
            y = match (&stepper, problem) {
                (Stepper::Linear(integ), DdeProblem::Linear(p)) => integ.step(&system.linear_operator(p), t, h, &y)?,
                (Stepper::Quasilinear(order), DdeProblem::Quasilinear(p)) => {
                    nonlinear_magnus_step(&system.quasilinear_operator(p), h, &y, *order)?
                }
                _ => unreachable!("stepper built from the same problem"),
            };
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState {
                    interval: span.index,
                    step: k,
                });
            }
            if opts.store_steps && k + 1 < span.steps {
                step_states.push(StepState {
                    t: t + h,
                    state: y.clone(),
                });
            }
        }
        traj.intervals.push(IntervalRecord {
            index: span.index,
            t_start: span.t_start,
            t_end: span.t_end,
            steps: span.steps,
            state: y.clone(),
            step_states,
        });
    }
    Ok(traj)
}
