use std::f64::consts::PI;

use log::warn;

use crate::error::{invalid, Error, Result};
use crate::linalg::{commutator, expm, norm_2_estimate, DenseMatrix};

/// Coefficient matrix `A(t)` of `y' = A(t) y`.
pub trait TimeMatrix {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64) -> Result<DenseMatrix>;
}

/// Closure-backed [`TimeMatrix`].
pub struct FnTimeMatrix<F> {
    dim: usize,
    f: F,
}

impl<F> FnTimeMatrix<F>
where
    F: Fn(f64) -> DenseMatrix,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> TimeMatrix for FnTimeMatrix<F>
where
    F: Fn(f64) -> DenseMatrix,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64) -> Result<DenseMatrix> {
        Ok((self.f)(t))
    }
}

pub(crate) fn checked_eval<A: TimeMatrix + ?Sized>(a: &A, t: f64) -> Result<DenseMatrix> {
    let m = a.eval(t)?;
    let n = a.dim();
    if m.shape() != (n, n) {
        return Err(Error::Evaluation(format!(
            "coefficient at t = {t} has shape {:?}, expected ({n}, {n})",
            m.shape()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation(format!("coefficient at t = {t} is not finite")));
    }
    Ok(m)
}

/// Order of the linear Magnus scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MagnusOrder {
    /// Exponential midpoint rule.
    Two,
    /// Two-point Gauss-Legendre with one commutator.
    Four,
    /// Three-point Gauss-Legendre with three commutators.
    Six,
}

impl MagnusOrder {
    pub fn as_u32(self) -> u32 {
        match self {
            Self::Two => 2,
            Self::Four => 4,
            Self::Six => 6,
        }
    }
}

impl TryFrom<u32> for MagnusOrder {
    type Error = Error;

    fn try_from(v: u32) -> Result<Self> {
        match v {
            2 => Ok(Self::Two),
            4 => Ok(Self::Four),
            6 => Ok(Self::Six),
            _ => Err(invalid(format!("linear Magnus order must be one of 2, 4, 6 (got {v})"))),
        }
    }
}

/// What to do when `h ||A(t_mid)||_2 >= pi`, outside the region where the
/// Magnus series is known to converge.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum GuardPolicy {
    #[default]
    Warn,
    Deny,
    Ignore,
}

#[derive(Debug, Clone, Copy)]
pub struct MagnusIntegrator {
    pub order: MagnusOrder,
    pub guard: GuardPolicy,
}

impl MagnusIntegrator {
    pub fn new(order: MagnusOrder) -> Self {
        Self {
            order,
            guard: GuardPolicy::default(),
        }
    }

    pub fn with_guard(mut self, guard: GuardPolicy) -> Self {
        self.guard = guard;
        self
    }

    /// Truncated Magnus exponent `Omega(h)` for the step `[t, t + h]`.
    pub fn exponent<A: TimeMatrix + ?Sized>(&self, a: &A, t: f64, h: f64) -> Result<DenseMatrix> {
        if !(h.is_finite() && h > 0.0) {
            return Err(invalid(format!("step size must be positive, got {h}")));
        }
        let (omega, mid) = match self.order {
            MagnusOrder::Two => {
                let a_mid = checked_eval(a, t + 0.5 * h)?;
                (&a_mid * h, a_mid)
            }
            MagnusOrder::Four => {
                let c = 3f64.sqrt() / 6.0;
                let a1 = checked_eval(a, t + (0.5 - c) * h)?;
                let a2 = checked_eval(a, t + (0.5 + c) * h)?;
                let comm = commutator(&a1, &a2)?;
                let omega = (&a1 + &a2) * (0.5 * h) - comm * (h * h * 3f64.sqrt() / 12.0);
                // no node at the midpoint for this rule; average the two Gauss values
                (omega, (a1 + a2) * 0.5)
            }
            MagnusOrder::Six => {
                let c = 15f64.sqrt() / 10.0;
                let a1 = checked_eval(a, t + (0.5 - c) * h)?;
                let a2 = checked_eval(a, t + 0.5 * h)?;
                let a3 = checked_eval(a, t + (0.5 + c) * h)?;
                let alpha1 = &a2 * h;
                let alpha2 = (&a3 - &a1) * (15f64.sqrt() * h / 3.0);
                let alpha3 = (&a3 - &a2 * 2.0 + &a1) * (10.0 * h / 3.0);
                let c1 = commutator(&alpha1, &alpha2)?;
                let c2 = commutator(&alpha1, &(&alpha3 * 2.0 + &c1))? * (-1.0 / 60.0);
                let left = &alpha1 * -20.0 - &alpha3 + &c1;
                let right = &alpha2 + &c2;
                let omega = &alpha1 + &alpha3 / 12.0 + commutator(&left, &right)? / 240.0;
                (omega, a2)
            }
        };
        self.check_bound(t, h, &mid)?;
        Ok(omega)
    }

    /// `h ||A(t + h/2)||_2`; the expansion converges when this is below pi.
    pub fn bound_estimate<A: TimeMatrix + ?Sized>(&self, a: &A, t: f64, h: f64) -> Result<f64> {
        Ok(h * norm_2_estimate(&checked_eval(a, t + 0.5 * h)?))
    }

    fn check_bound(&self, t: f64, h: f64, a_mid: &DenseMatrix) -> Result<()> {
        if self.guard == GuardPolicy::Ignore {
            return Ok(());
        }
        let estimate = h * norm_2_estimate(a_mid);
        if estimate >= PI {
            match self.guard {
                GuardPolicy::Deny => return Err(Error::ConvergenceBound { t, estimate }),
                _ => warn!(
                    "Magnus step at t = {t}: h*||A||_2 ~ {estimate:.3e} >= pi, convergence of the expansion not guaranteed"
                ),
            }
        }
        Ok(())
    }

    pub fn step<A: TimeMatrix + ?Sized>(&self, a: &A, t: f64, h: f64, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != a.dim() {
            return Err(invalid(format!("state has length {}, expected {}", y.len(), a.dim())));
        }
        let e = expm(&self.exponent(a, t, h)?)?;
        Ok((e * nalgebra::DVector::from_column_slice(y)).data.into())
    }

    pub fn step_matrix<A: TimeMatrix + ?Sized>(&self, a: &A, t: f64, h: f64, y: &DenseMatrix) -> Result<DenseMatrix> {
        if y.nrows() != a.dim() {
            return Err(invalid(format!("state has {} rows, expected {}", y.nrows(), a.dim())));
        }
        Ok(expm(&self.exponent(a, t, h)?)? * y)
    }
}

/// Magnus exponent with the default (warning) guard.
pub fn magnus_exponent<A: TimeMatrix + ?Sized>(a: &A, t: f64, h: f64, order: MagnusOrder) -> Result<DenseMatrix> {
    MagnusIntegrator::new(order).exponent(a, t, h)
}

/// `y_{k+1} = exp(Omega(h)) y_k`.
pub fn magnus_step<A: TimeMatrix + ?Sized>(a: &A, t: f64, h: f64, y: &[f64], order: MagnusOrder) -> Result<Vec<f64>> {
    MagnusIntegrator::new(order).step(a, t, h, y)
}

/// Matrix-valued state: `Y_{k+1} = exp(Omega(h)) Y_k`.
pub fn magnus_step_matrix<A: TimeMatrix + ?Sized>(
    a: &A,
    t: f64,
    h: f64,
    y: &DenseMatrix,
    order: MagnusOrder,
) -> Result<DenseMatrix> {
    MagnusIntegrator::new(order).step_matrix(a, t, h, y)
}
