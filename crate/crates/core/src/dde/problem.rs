use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::linalg::DenseMatrix;

pub type TimeCoefficient = Arc<dyn Fn(f64) -> Result<DenseMatrix> + Send + Sync>;
pub type StateCoefficient = Arc<dyn Fn(&[f64]) -> Result<DenseMatrix> + Send + Sync>;
pub type HistoryFn = Arc<dyn Fn(f64) -> Result<Vec<f64>> + Send + Sync>;

fn check_matrix(m: DenseMatrix, dim: usize, what: &str) -> Result<DenseMatrix> {
    if m.shape() != (dim, dim) {
        return Err(Error::Evaluation(format!(
            "{what} has shape {:?}, expected ({dim}, {dim})",
            m.shape()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation(format!("{what} is not finite")));
    }
    Ok(m)
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("delay must be positive and finite, got {tau}")))
    }
}

/// `x'(t) = A(t) x(t) + B(t) x(t - tau)` with history `phi` on `[-tau, 0]`.
#[derive(Clone)]
pub struct LinearDdeProblem {
    dim: usize,
    tau: f64,
    a: TimeCoefficient,
    b: TimeCoefficient,
    history: HistoryFn,
    period: Option<f64>,
    label: String,
}

impl LinearDdeProblem {
    pub fn new<FA, FB, FH>(dim: usize, tau: f64, a: FA, b: FB, history: FH) -> Result<Self>
    where
        FA: Fn(f64) -> Result<DenseMatrix> + Send + Sync + 'static,
        FB: Fn(f64) -> Result<DenseMatrix> + Send + Sync + 'static,
        FH: Fn(f64) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(invalid("state dimension must be at least 1"));
        }
        check_tau(tau)?;
        Ok(Self {
            dim,
            tau,
            a: Arc::new(a),
            b: Arc::new(b),
            history: Arc::new(history),
            period: None,
            label: "linear".into(),
        })
    }

    /// Declare the coefficients `T`-periodic. Periodicity is taken on trust.
    pub fn with_period(mut self, period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(invalid(format!("period must be positive, got {period}")));
        }
        self.period = Some(period);
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Replace the initial function, keeping the coefficients.
    pub fn with_history<FH>(mut self, history: FH) -> Self
    where
        FH: Fn(f64) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        self.history = Arc::new(history);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn a(&self, t: f64) -> Result<DenseMatrix> {
        check_matrix((self.a)(t)?, self.dim, "A(t)")
    }

    pub fn b(&self, t: f64) -> Result<DenseMatrix> {
        check_matrix((self.b)(t)?, self.dim, "B(t)")
    }

    pub fn history(&self, t: f64) -> Result<Vec<f64>> {
        check_history((self.history)(t)?, self.dim, t)
    }
}

impl fmt::Debug for LinearDdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearDdeProblem")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("tau", &self.tau)
            .field("period", &self.period)
            .finish_non_exhaustive()
    }
}

fn check_history(v: Vec<f64>, dim: usize, t: f64) -> Result<Vec<f64>> {
    if v.len() != dim {
        return Err(Error::Evaluation(format!(
            "history at t = {t} has {} components, expected {dim}",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Evaluation(format!("history at t = {t} is not finite")));
    }
    Ok(v)
}

/// `x'(t) = A(x(t - tau)) x(t)` with history `phi` on `[-tau, 0]`.
///
/// Only the autonomous form is supported; explicit time dependence can be
/// carried as an extra state component with `t' = 1`.
#[derive(Clone)]
pub struct QuasilinearDdeProblem {
    dim: usize,
    tau: f64,
    a: StateCoefficient,
    history: HistoryFn,
    label: String,
}

impl QuasilinearDdeProblem {
    pub fn new<FA, FH>(dim: usize, tau: f64, a_of_delayed: FA, history: FH) -> Result<Self>
    where
        FA: Fn(&[f64]) -> Result<DenseMatrix> + Send + Sync + 'static,
        FH: Fn(f64) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(invalid("state dimension must be at least 1"));
        }
        check_tau(tau)?;
        Ok(Self {
            dim,
            tau,
            a: Arc::new(a_of_delayed),
            history: Arc::new(history),
            label: "quasilinear".into(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_history<FH>(mut self, history: FH) -> Self
    where
        FH: Fn(f64) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        self.history = Arc::new(history);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Coefficient as a function of the delayed state `x(t - tau)`.
    pub fn a(&self, delayed: &[f64]) -> Result<DenseMatrix> {
        if delayed.len() != self.dim {
            return Err(invalid(format!(
                "delayed state has {} components, expected {}",
                delayed.len(),
                self.dim
            )));
        }
        check_matrix((self.a)(delayed)?, self.dim, "A(x(t - tau))")
    }

    pub fn history(&self, t: f64) -> Result<Vec<f64>> {
        check_history((self.history)(t)?, self.dim, t)
    }
}

impl fmt::Debug for QuasilinearDdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuasilinearDdeProblem")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("tau", &self.tau)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum DdeProblem {
    Linear(LinearDdeProblem),
    Quasilinear(QuasilinearDdeProblem),
}

impl DdeProblem {
    pub fn dim(&self) -> usize {
        match self {
            Self::Linear(p) => p.dim(),
            Self::Quasilinear(p) => p.dim(),
        }
    }

    pub fn tau(&self) -> f64 {
        match self {
            Self::Linear(p) => p.tau(),
            Self::Quasilinear(p) => p.tau(),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Self::Linear(p) => p.label(),
            Self::Quasilinear(p) => p.label(),
        }
    }

    pub fn history(&self, t: f64) -> Result<Vec<f64>> {
        match self {
            Self::Linear(p) => p.history(t),
            Self::Quasilinear(p) => p.history(t),
        }
    }

    pub fn as_linear(&self) -> Option<&LinearDdeProblem> {
        match self {
            Self::Linear(p) => Some(p),
            Self::Quasilinear(_) => None,
        }
    }

    /// Orders accepted by [`solve`](super::solve) for this kind of problem.
    pub fn admissible_orders(&self) -> &'static [u32] {
        match self {
            Self::Linear(_) => &[2, 4, 6],
            Self::Quasilinear(_) => &[2, 3],
        }
    }
}

impl From<LinearDdeProblem> for DdeProblem {
    fn from(p: LinearDdeProblem) -> Self {
        Self::Linear(p)
    }
}

impl From<QuasilinearDdeProblem> for DdeProblem {
    fn from(p: QuasilinearDdeProblem) -> Self {
        Self::Quasilinear(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_validation() {
        let zero = |_: f64| Ok(DenseMatrix::zeros(1, 1));
        let hist = |_: f64| Ok(vec![1.0]);
        assert!(LinearDdeProblem::new(0, 1.0, zero, zero, hist).is_err());
        assert!(LinearDdeProblem::new(1, -1.0, zero, zero, hist).is_err());
        let p = LinearDdeProblem::new(1, 1.0, zero, zero, hist).unwrap();
        assert!(p.clone().with_period(0.0).is_err());
        assert_eq!(p.with_period(2.0).unwrap().period(), Some(2.0));
    }

    #[test]
    fn evaluator_shape_and_finiteness() {
        let p = LinearDdeProblem::new(
            2,
            1.0,
            |_| Ok(DenseMatrix::zeros(1, 1)),
            |t| Ok(DenseMatrix::from_element(2, 2, 1.0 / t)),
            |_| Ok(vec![1.0]),
        )
        .unwrap();
        assert!(matches!(p.a(0.0), Err(Error::Evaluation(_))));
        assert!(matches!(p.b(0.0), Err(Error::Evaluation(_))));
        assert!(p.b(1.0).is_ok());
        assert!(matches!(p.history(0.0), Err(Error::Evaluation(_))));

        let q = QuasilinearDdeProblem::new(
            1,
            1.0,
            |x| Ok(DenseMatrix::from_element(1, 1, -x[0].ln())),
            |_| Ok(vec![1.0]),
        )
        .unwrap();
        assert!(q.a(&[1.0]).is_ok());
        assert!(q.a(&[-1.0]).is_err());
        assert!(q.a(&[1.0, 2.0]).is_err());
        assert_eq!(DdeProblem::from(q).admissible_orders(), &[2, 3]);
    }
}
