//! Chebyshev collocation on the delay interval.
//!
//! Nodes are ordered descending: block `j` of every state vector in this
//! crate holds the value at `theta_j`, so block 0 is the present time and
//! block `N` is the delayed time `t - tau`.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::linalg::DenseMatrix;

/// Chebyshev points `t_j = cos(j pi / N)`, `j = 0..=N`, on `[-1, 1]`.
///
/// Evaluated as `sin(pi (N - 2j) / 2N)`, which is the same number but
/// exactly antisymmetric about the middle node.
pub fn chebyshev_nodes(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("Chebyshev grid needs N >= 1 (at least two nodes)"));
    }
    let nf = n as f64;
    Ok((0..=n)
        .map(|j| (PI * (nf - 2.0 * j as f64) / (2.0 * nf)).sin())
        .collect())
}

/// Spectral differentiation matrix on the Chebyshev points of `[-1, 1]`.
///
/// Off-diagonal entries are `(c_j / c_k) (-1)^(j+k) / (t_j - t_k)` with
/// `c_0 = c_N = 2`, `c_j = 1` otherwise; the diagonal is the negative sum
/// of the row so that constants are differentiated to zero.
pub fn differentiation_matrix(n: usize) -> Result<DenseMatrix> {
    let t = chebyshev_nodes(n)?;
    let c = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
    let mut d = DenseMatrix::zeros(n + 1, n + 1);
    for j in 0..=n {
        let mut row_sum = 0.0;
        for k in 0..=n {
            if j == k {
                continue;
            }
            let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
            let v = c(j) / c(k) * sign / (t[j] - t[k]);
            d[(j, k)] = v;
            row_sum += v;
        }
        d[(j, j)] = -row_sum;
    }
    Ok(d)
}

/// Collocation grid on `[-tau, 0]` together with its differentiation matrix.
///
/// Immutable once built.
#[derive(Debug, Clone)]
pub struct ChebyshevGrid {
    n: usize,
    delay: f64,
    nodes_reference: Vec<f64>,
    nodes_shifted: Vec<f64>,
    diff_matrix: DenseMatrix,
}

impl ChebyshevGrid {
    pub fn new(n: usize, delay: f64) -> Result<Self> {
        if !(delay.is_finite() && delay > 0.0) {
            return Err(invalid(format!("delay must be positive and finite, got {delay}")));
        }
        let nodes_reference = chebyshev_nodes(n)?;
        let nodes_shifted = nodes_reference.iter().map(|&t| (t - 1.0) * delay / 2.0).collect();
        Ok(Self {
            n,
            delay,
            nodes_reference,
            nodes_shifted,
            diff_matrix: differentiation_matrix(n)?,
        })
    }

    /// Number of intervals; the grid has `n() + 1` nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_nodes(&self) -> usize {
        self.n + 1
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn nodes_reference(&self) -> &[f64] {
        &self.nodes_reference
    }

    /// `theta_j = (t_j - 1) tau / 2`, from `0` down to `-tau`.
    pub fn nodes_shifted(&self) -> &[f64] {
        &self.nodes_shifted
    }

    /// Differentiation matrix on the reference interval `[-1, 1]`.
    pub fn diff_matrix(&self) -> &DenseMatrix {
        &self.diff_matrix
    }

    /// Differentiation matrix for functions of `theta` on `[-tau, 0]`.
    pub fn scaled_diff_matrix(&self) -> DenseMatrix {
        &self.diff_matrix * (2.0 / self.delay)
    }

    /// Times `anchor + theta_j` represented by a state whose block 0 sits
    /// at `anchor`.
    pub fn node_times(&self, anchor: f64) -> Vec<f64> {
        self.nodes_shifted.iter().map(|&th| anchor + th).collect()
    }

    /// Evaluate the interpolant of a block-structured state at time `t`.
    ///
    /// `values` holds `dim` components per node, block `j` sitting at
    /// abscissa `interval_index * tau + theta_j`, i.e. the state reached at
    /// the end of the interval `[(i - 1) tau, i tau]`.
    pub fn interpolate(&self, values: &[f64], dim: usize, interval_index: usize, t: f64) -> Result<Vec<f64>> {
        self.interpolate_at(values, dim, interval_index as f64 * self.delay, t)
    }

    /// As [`interpolate`](Self::interpolate) with block 0 at an arbitrary
    /// anchor time (for states that end between multiples of the delay).
    ///
    /// Barycentric formula of the second kind with Chebyshev weights
    /// `(-1)^j delta_j`, `delta_0 = delta_N = 1/2`.
    pub fn interpolate_at(&self, values: &[f64], dim: usize, anchor: f64, t: f64) -> Result<Vec<f64>> {
        if dim == 0 || values.len() != dim * self.num_nodes() {
            return Err(invalid(format!(
                "state has length {}, expected {} x {}",
                values.len(),
                dim,
                self.num_nodes()
            )));
        }
        let tol = 1e-14 * self.delay;
        let (lower, upper) = (anchor - self.delay, anchor);
        if !(t >= lower - tol && t <= upper + tol) {
            return Err(Error::OutOfRange { t, lower, upper });
        }
        for (j, th) in self.nodes_shifted.iter().enumerate() {
            if (t - (anchor + th)).abs() < tol {
                return Ok(values[j * dim..(j + 1) * dim].to_vec());
            }
        }

        let x = 1.0 + 2.0 * (t - anchor) / self.delay;
        let mut num = vec![0.0; dim];
        let mut den = 0.0;
        for (j, tj) in self.nodes_reference.iter().enumerate() {
            let mut w = if j == 0 || j == self.n { 0.5 } else { 1.0 };
            if j % 2 == 1 {
                w = -w;
            }
            let c = w / (x - tj);
            den += c;
            for (acc, v) in num.iter_mut().zip(&values[j * dim..(j + 1) * dim]) {
                *acc += c * v;
            }
        }
        Ok(num.into_iter().map(|v| v / den).collect())
    }
}
