//! Dense kernels for the small matrices (`d (N + 1)` up to a few hundred)
//! this crate works with.

mod eigen;
mod expm;

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Result};

pub use eigen::eigenvalues;
pub use expm::{expm, TAYLOR_DEGREES, TAYLOR_THETA};

pub type DenseMatrix = DMatrix<f64>;

/// `AB - BA`.
pub fn commutator(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(invalid(format!(
            "commutator needs square matrices of equal size, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a * b - b * a)
}

/// Maximum absolute column sum.
pub fn norm_1(m: &DenseMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Maximum absolute row sum.
pub fn norm_inf(m: &DenseMatrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Upper bound on the spectral norm, `sqrt(||M||_1 ||M||_inf)`.
pub fn norm_2_estimate(m: &DenseMatrix) -> f64 {
    (norm_1(m) * norm_inf(m)).sqrt()
}

pub(crate) fn ensure_square_finite(m: &DenseMatrix, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(invalid(format!("{what} needs a square matrix, got {:?}", m.shape())));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(invalid(format!("{what}: matrix has non-finite entries")));
    }
    Ok(())
}

/// Eigenvalues sorted by modulus, then real part, then imaginary part, all
/// descending. The order is total, so downstream tables are reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    values: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn new(mut values: Vec<Complex64>) -> Self {
        values.sort_by(spectrum_order);
        Self { values }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest-modulus value.
    pub fn dominant(&self) -> Option<Complex64> {
        self.values.first().copied()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.dominant().map_or(0.0, |z| z.norm())
    }

    /// The value closest to `target` (first one on ties).
    pub fn closest_to(&self, target: Complex64) -> Option<Complex64> {
        self.values
            .iter()
            .copied()
            .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.values
    }
}

fn spectrum_order(a: &Complex64, b: &Complex64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(b.im.total_cmp(&a.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutator_identities() {
        let a = DenseMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = DenseMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(
            commutator(&a, &b).unwrap(),
            DenseMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
        );
        assert_eq!(commutator(&a, &a).unwrap(), DenseMatrix::zeros(2, 2));
        assert_eq!(
            commutator(&DenseMatrix::identity(2, 2), &b).unwrap(),
            DenseMatrix::zeros(2, 2)
        );
        assert!(commutator(&a, &DenseMatrix::zeros(3, 3)).is_err());
        assert!(commutator(&DenseMatrix::zeros(2, 3), &DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn spectrum_sort_ties() {
        let s = ComplexSpectrum::new(vec![
            Complex64::new(0.0, -1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.0),
        ]);
        let v = s.values();
        assert_eq!(v[0], Complex64::new(1.0, 0.0));
        assert_eq!(v[1], Complex64::new(0.0, 1.0));
        assert_eq!(v[2], Complex64::new(0.0, -1.0));
        assert_eq!(v[3], Complex64::new(-1.0, 0.0));
        assert_eq!(v[4], Complex64::new(0.5, 0.0));
        assert_eq!(s.closest_to(Complex64::new(0.1, 0.8)), Some(Complex64::new(0.0, 1.0)));
    }

    #[test]
    fn norms() {
        let m = DenseMatrix::from_row_slice(2, 2, &[1.0, -2.0, 3.0, 4.0]);
        assert_eq!(norm_1(&m), 6.0);
        assert_eq!(norm_inf(&m), 7.0);
        assert!((norm_2_estimate(&m) - 42f64.sqrt()).abs() < 1e-15);
    }
}
