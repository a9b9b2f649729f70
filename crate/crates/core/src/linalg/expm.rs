//! Matrix exponential by scaling and squaring of a truncated Taylor series.
//!
//! The degree is the smallest entry of [`TAYLOR_DEGREES`] whose threshold
//! bounds `||M||_1`; past the last threshold the matrix is scaled by
//! `2^-s`. Each `TAYLOR_THETA[i]` is the largest `theta` for which the
//! relative backward error of the degree-`m` Taylor polynomial,
//! `log(e^{-X} T_m(X))`, stays below `u = 2^-53` whenever
//! `||X||_1 <= theta` (series bound evaluated in 60-digit arithmetic).

use super::{ensure_square_finite, norm_1, DenseMatrix};
use crate::error::Result;

pub const TAYLOR_DEGREES: [usize; 6] = [1, 2, 4, 8, 12, 18];

#[allow(clippy::excessive_precision)]
pub const TAYLOR_THETA: [f64; 6] = [
    2.220446049250313e-16,
    2.580956802971767e-8,
    3.397168839976962e-4,
    4.991228871115323e-2,
    2.996158913811580e-1,
    1.090863719290036,
];

/// `exp(M)` for a square matrix with finite entries.
pub fn expm(m: &DenseMatrix) -> Result<DenseMatrix> {
    ensure_square_finite(m, "expm")?;
    let n = m.nrows();
    let norm = norm_1(m);
    if norm == 0.0 {
        return Ok(DenseMatrix::identity(n, n));
    }

    let (degree, squarings) = match TAYLOR_THETA.iter().position(|&th| norm <= th) {
        Some(i) => (TAYLOR_DEGREES[i], 0),
        None => {
            let theta = TAYLOR_THETA[TAYLOR_THETA.len() - 1];
            (
                TAYLOR_DEGREES[TAYLOR_DEGREES.len() - 1],
                (norm / theta).log2().ceil() as i32,
            )
        }
    };

    let scaled = if squarings > 0 {
        m * 2f64.powi(-squarings)
    } else {
        m.clone()
    };
    let mut result = taylor(&scaled, degree);
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

/// Taylor polynomial `sum_{k<=degree} X^k / k!` by Paterson-Stockmeyer:
/// powers up to `X^q`, `q ~ sqrt(degree)`, then Horner in `X^q`.
fn taylor(x: &DenseMatrix, degree: usize) -> DenseMatrix {
    let n = x.nrows();
    let mut coeff = Vec::with_capacity(degree + 1);
    let mut c = 1.0;
    for k in 0..=degree {
        if k > 0 {
            c /= k as f64;
        }
        coeff.push(c);
    }

    let q = ((degree as f64).sqrt().ceil() as usize).max(1);
    let mut powers = Vec::with_capacity(q + 1);
    powers.push(DenseMatrix::identity(n, n));
    powers.push(x.clone());
    for k in 2..=q {
        let next = &powers[k - 1] * x;
        powers.push(next);
    }

    // p(X) = sum_i B_i (X^q)^i, B_i = sum_{j<q} c_{iq+j} X^j
    let chunk = |i: usize| -> DenseMatrix {
        let mut b = DenseMatrix::zeros(n, n);
        for (j, pw) in powers.iter().take(q).enumerate() {
            let k = i * q + j;
            if k > degree {
                break;
            }
            b += pw * coeff[k];
        }
        // the final power X^q belongs to the last block when degree is a multiple of q
        if i * q + q == degree {
            b += &powers[q] * coeff[degree];
        }
        b
    };
    let blocks = if degree.is_multiple_of(q) {
        degree / q - 1
    } else {
        degree / q
    };
    let mut acc = chunk(blocks);
    for i in (0..blocks).rev() {
        acc = &acc * &powers[q] + chunk(i);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_matrix(rng: &mut impl Rng, n: usize, target_norm1: f64) -> DenseMatrix {
        let m = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let s = norm_1(&m);
        m * (target_norm1 / s)
    }

    fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        (a - b).amax()
    }

    #[test]
    fn taylor_matches_naive_sum() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let x = random_matrix(&mut rng, 5, 0.7);
        for degree in [1, 2, 3, 4, 5, 8, 9, 12, 16, 18] {
            let mut naive = DenseMatrix::identity(5, 5);
            let mut term = DenseMatrix::identity(5, 5);
            for k in 1..=degree {
                term = &term * &x / k as f64;
                naive += &term;
            }
            assert!(max_abs_diff(&taylor(&x, degree), &naive) < 1e-15, "degree {degree}");
        }
    }

    #[test]
    fn zero_gives_identity() {
        assert_eq!(expm(&DenseMatrix::zeros(4, 4)).unwrap(), DenseMatrix::identity(4, 4));
    }

    #[test]
    fn diagonal() {
        for (a, b) in [(0.3, -2.0), (5.0, -7.5), (1e-9, 40.0)] {
            let e = expm(&DenseMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![a, b]))).unwrap();
            assert!(((e[(0, 0)] - a.exp()) / a.exp()).abs() < 1e-15 * 4.0);
            assert!(((e[(1, 1)] - b.exp()) / b.exp()).abs() < 1e-14);
            assert_eq!(e[(0, 1)], 0.0);
            assert_eq!(e[(1, 0)], 0.0);
        }
    }

    #[test]
    fn nilpotent() {
        let e = expm(&DenseMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!(e, DenseMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]));
    }

    #[test]
    fn rotation_generator() {
        let th = 2.3;
        let e = expm(&DenseMatrix::from_row_slice(2, 2, &[0.0, -th, th, 0.0])).unwrap();
        let r = DenseMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        assert!(max_abs_diff(&e, &r) < 1e-15 * 8.0);
    }

    #[test]
    fn scaling_identity() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let s = rng.gen_range(0.01..1.0);
            let m = random_matrix(&mut rng, 10, s);
            let full = expm(&m).unwrap();
            let half = expm(&(&m * 0.5)).unwrap();
            assert!(max_abs_diff(&full, &(&half * &half)) < 1e-13);
        }
    }

    #[test]
    fn inverse_identity() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(17);
        for _ in 0..20 {
            let s = rng.gen_range(0.1..10.0);
            let m = random_matrix(&mut rng, 8, s);
            let p = expm(&m).unwrap() * expm(&(-&m)).unwrap();
            assert!(max_abs_diff(&p, &DenseMatrix::identity(8, 8)) < 1e-12);
        }
    }

    #[test]
    fn block_structure_preserved() {
        // rows 0..d vanish outside columns 0..d
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let (d, n) = (2, 8);
        let mut m = random_matrix(&mut rng, n, 6.0);
        for i in 0..d {
            for j in d..n {
                m[(i, j)] = 0.0;
            }
        }
        let e = expm(&m).unwrap();
        for i in 0..d {
            for j in d..n {
                assert_eq!(e[(i, j)], 0.0);
            }
        }
        let top = expm(&m.view((0, 0), (d, d)).into_owned()).unwrap();
        assert!(max_abs_diff(&e.view((0, 0), (d, d)).into_owned(), &top) < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(expm(&DenseMatrix::zeros(2, 3)).is_err());
        let mut m = DenseMatrix::zeros(2, 2);
        m[(0, 1)] = f64::INFINITY;
        assert!(expm(&m).is_err());
    }
}
