use nalgebra::DVector;

use crate::error::{invalid, Error, Result};
use crate::linalg::{commutator, expm, DenseMatrix};

/// State-dependent coefficient of the autonomous system `y' = A(y) y`.
pub trait StateMatrix {
    fn dim(&self) -> usize;
    fn eval(&self, y: &[f64]) -> Result<DenseMatrix>;

    /// When `Some(d)`, every exponent built by the schemes keeps rows
    /// `0..d` zero outside columns `0..d` (see [`structure_check`]); debug
    /// builds assert it after each stage.
    fn block_dim(&self) -> Option<usize> {
        None
    }
}

/// Closure-backed [`StateMatrix`].
pub struct FnStateMatrix<F> {
    dim: usize,
    f: F,
}

impl<F> FnStateMatrix<F>
where
    F: Fn(&[f64]) -> DenseMatrix,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> StateMatrix for FnStateMatrix<F>
where
    F: Fn(&[f64]) -> DenseMatrix,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, y: &[f64]) -> Result<DenseMatrix> {
        Ok((self.f)(y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NonlinearOrder {
    Two,
    Three,
}

impl NonlinearOrder {
    pub fn as_u32(self) -> u32 {
        match self {
            Self::Two => 2,
            Self::Three => 3,
        }
    }
}

impl TryFrom<u32> for NonlinearOrder {
    type Error = Error;

    fn try_from(v: u32) -> Result<Self> {
        match v {
            2 => Ok(Self::Two),
            3 => Ok(Self::Three),
            _ => Err(invalid(format!("quasilinear Magnus order must be 2 or 3 (got {v})"))),
        }
    }
}

fn h_eval<A: StateMatrix + ?Sized>(a: &A, h: f64, y: &[f64]) -> Result<DenseMatrix> {
    let m = a.eval(y)?;
    let n = a.dim();
    if m.shape() != (n, n) {
        return Err(Error::Evaluation(format!(
            "state coefficient has shape {:?}, expected ({n}, {n})",
            m.shape()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation("state coefficient is not finite".into()));
    }
    Ok(m * h)
}

fn exp_apply(u: &DenseMatrix, y: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(expm(u)? * y)
}

fn debug_structure<A: StateMatrix + ?Sized>(a: &A, stages: &[&DenseMatrix]) {
    if cfg!(debug_assertions) {
        if let Some(d) = a.block_dim() {
            for (i, m) in stages.iter().enumerate() {
                debug_assert!(
                    structure_check(m, d).unwrap_or(false),
                    "stage {i} lost the block structure"
                );
            }
        }
    }
}

/// One step of the quasilinear Magnus scheme of order 2 or 3.
///
/// Order 2 (trapezoidal):
/// `u = h A(y)`, `v = (u + h A(e^u y)) / 2`, `y' = e^v y`.
///
/// Order 3:
/// ```text
/// Q1 = h A(y)
/// Q2 = h A(e^{Q1/2} y) - Q1
/// u1 = Q1/2 + Q2/4
/// u2 = Q1 + Q2
/// Q3 = -u2 + h A(e^{u1} y)
/// Q4 = -u2 - Q2 + h A(e^{u2} y)
/// u3 = u2 + 2/3 Q3 + 1/6 Q4 - 1/6 [Q1, Q2]
/// y' = e^{u3} y
/// ```
pub fn nonlinear_magnus_step<A: StateMatrix + ?Sized>(
    a: &A,
    h: f64,
    y: &[f64],
    order: NonlinearOrder,
) -> Result<Vec<f64>> {
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid(format!("step size must be positive, got {h}")));
    }
    if y.len() != a.dim() {
        return Err(invalid(format!("state has length {}, expected {}", y.len(), a.dim())));
    }
    let yv = DVector::from_column_slice(y);
    let next = match order {
        NonlinearOrder::Two => {
            let u = h_eval(a, h, y)?;
            let y_u = exp_apply(&u, &yv)?;
            let v = (&u + h_eval(a, h, y_u.as_slice())?) * 0.5;
            debug_structure(a, &[&u, &v]);
            exp_apply(&v, &yv)?
        }
        NonlinearOrder::Three => {
            let q1 = h_eval(a, h, y)?;
            let y_half = exp_apply(&(&q1 * 0.5), &yv)?;
            let q2 = h_eval(a, h, y_half.as_slice())? - &q1;
            let u1 = &q1 * 0.5 + &q2 * 0.25;
            let u2 = &q1 + &q2;
            let y1 = exp_apply(&u1, &yv)?;
            let q3 = h_eval(a, h, y1.as_slice())? - &u2;
            let y2 = exp_apply(&u2, &yv)?;
            let q4 = h_eval(a, h, y2.as_slice())? - &u2 - &q2;
            let comm = commutator(&q1, &q2)?;
            let u3 = &u2 + &q3 * (2.0 / 3.0) + &q4 / 6.0 - comm / 6.0;
            debug_structure(a, &[&q1, &q2, &q3, &q4, &u1, &u2, &u3]);
            exp_apply(&u3, &yv)?
        }
    };
    Ok(next.data.into())
}

/// `true` iff rows `0..d` of `m` vanish outside columns `0..d`, the shape
/// of the assembled collocation matrix.
pub fn structure_check(m: &DenseMatrix, d: usize) -> Result<bool> {
    if !m.is_square() {
        return Err(invalid(format!(
            "structure check needs a square matrix, got {:?}",
            m.shape()
        )));
    }
    let n = m.nrows();
    if d == 0 || !n.is_multiple_of(d) || n < d {
        return Err(invalid(format!("dimension {n} is not a multiple of block size {d}")));
    }
    Ok((0..d).all(|i| (d..n).all(|j| m[(i, j)] == 0.0)))
}

/// Graph-Laplacian predicate: nonnegative off-diagonal entries,
/// nonpositive diagonal and column sums within `tol` of zero.
pub fn is_graph_laplacian(m: &DenseMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.nrows();
    for j in 0..n {
        let mut sum = 0.0;
        let mut scale = 0.0;
        for i in 0..n {
            let v = m[(i, j)];
            if (i == j && v > 0.0) || (i != j && v < 0.0) {
                return false;
            }
            sum += v;
            scale += v.abs();
        }
        if sum.abs() > tol * scale.max(1.0) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic_decay() -> FnStateMatrix<impl Fn(&[f64]) -> DenseMatrix> {
        // y' = -y^2, exact y(t) = 1 / (1 + t) from y(0) = 1
        FnStateMatrix::new(1, |y: &[f64]| DenseMatrix::from_element(1, 1, -y[0]))
    }

    fn local_error(order: NonlinearOrder, h: f64) -> f64 {
        let y = nonlinear_magnus_step(&quadratic_decay(), h, &[1.0], order).unwrap();
        (y[0] - 1.0 / (1.0 + h)).abs()
    }

    #[test]
    fn constant_coefficient_is_exact() {
        let c = DenseMatrix::from_row_slice(2, 2, &[-1.0, 0.5, 1.0, -0.5]);
        let cc = c.clone();
        let a = FnStateMatrix::new(2, move |_: &[f64]| cc.clone());
        let exact = expm(&(&c * 0.3)).unwrap() * DVector::from_vec(vec![0.2, 0.8]);
        for order in [NonlinearOrder::Two, NonlinearOrder::Three] {
            let y = nonlinear_magnus_step(&a, 0.3, &[0.2, 0.8], order).unwrap();
            assert!((y[0] - exact[0]).abs() < 1e-15 && (y[1] - exact[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn order_two_local_error() {
        let e1 = local_error(NonlinearOrder::Two, 0.02);
        assert!(e1 <= 1e-3);
        let ratio = e1 / local_error(NonlinearOrder::Two, 0.01);
        assert!((ratio - 8.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn order_three_local_error() {
        let ratio = local_error(NonlinearOrder::Three, 0.1) / local_error(NonlinearOrder::Three, 0.05);
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn orders_and_arguments() {
        assert!(NonlinearOrder::try_from(4).is_err());
        assert_eq!(NonlinearOrder::try_from(3).unwrap().as_u32(), 3);
        assert!(nonlinear_magnus_step(&quadratic_decay(), 0.0, &[1.0], NonlinearOrder::Two).is_err());
        assert!(nonlinear_magnus_step(&quadratic_decay(), 0.1, &[1.0, 2.0], NonlinearOrder::Two).is_err());
        let logy = FnStateMatrix::new(1, |y: &[f64]| DenseMatrix::from_element(1, 1, -y[0].ln()));
        assert!(matches!(
            nonlinear_magnus_step(&logy, 0.1, &[-1.0], NonlinearOrder::Three),
            Err(Error::Evaluation(_))
        ));
    }

    #[test]
    fn structure_predicate() {
        assert!(structure_check(&DenseMatrix::zeros(6, 6), 2).unwrap());
        assert!(!structure_check(&DenseMatrix::from_element(6, 6, 1.0), 2).unwrap());
        let mut m = DenseMatrix::from_element(6, 6, 1.0);
        for i in 0..2 {
            for j in 2..6 {
                m[(i, j)] = 0.0;
            }
        }
        assert!(structure_check(&m, 2).unwrap());
        assert!(structure_check(&m, 4).is_err());
        assert!(structure_check(&DenseMatrix::zeros(2, 3), 1).is_err());
    }

    #[test]
    fn laplacian_predicate() {
        let l = DenseMatrix::from_row_slice(3, 3, &[-0.3, 0.0, 0.0, 0.3, -1.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(is_graph_laplacian(&l, 1e-15));
        assert!(!is_graph_laplacian(&(-&l), 1e-15));
        let mut bad = l.clone();
        bad[(2, 1)] = 0.9;
        assert!(!is_graph_laplacian(&bad, 1e-15));
    }
}
