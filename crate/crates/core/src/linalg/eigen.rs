//! Eigenvalues of real nonsymmetric matrices: balancing, Householder
//! reduction to upper Hessenberg form, then Francis double-shift QR with
//! exceptional shifts (the EISPACK `hqr` iteration).

use num_complex::Complex64;

use super::{ensure_square_finite, ComplexSpectrum, DenseMatrix};
use crate::error::{Error, Result};

/// Total QR sweeps allowed, per unit of dimension.
const SWEEPS_PER_DIM: usize = 40;

/// All eigenvalues of `m`, with multiplicity, in spectrum order.
pub fn eigenvalues(m: &DenseMatrix) -> Result<ComplexSpectrum> {
    ensure_square_finite(m, "eigenvalues")?;
    let n = m.nrows();
    let mut a = m.clone();
    balance(&mut a);
    hessenberg(&mut a);
    let values = hqr(&mut a)?;
    debug_assert_eq!(values.len(), n);
    Ok(ComplexSpectrum::new(values))
}

/// Diagonal similarity by powers of two so that row and column norms are
/// comparable. Exact in floating point.
fn balance(a: &mut DenseMatrix) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let ginv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= ginv;
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut DenseMatrix) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let norm = (k + 1..n).map(|i| a[(i, k)] * a[(i, k)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[(k + 1, k)] > 0.0 { -norm } else { norm };
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = (k + 1..n).map(|i| v[i] * v[i]).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;

        // from the left, columns k..n
        for j in k..n {
            let s: f64 = (k + 1..n).map(|i| v[i] * a[(i, j)]).sum::<f64>() * beta;
            for i in k + 1..n {
                a[(i, j)] -= s * v[i];
            }
        }
        // from the right, all rows
        for i in 0..n {
            let s: f64 = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum::<f64>() * beta;
            for j in k + 1..n {
                a[(i, j)] -= s * v[j];
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of an upper Hessenberg matrix (destroyed in the process).
fn hqr(a: &mut DenseMatrix) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let mut out: Vec<Complex64> = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }

    let cap = SWEEPS_PER_DIM * n;
    let mut sweeps = 0usize;
    let mut nn = n - 1;
    let mut t = 0.0;
    // `nn` is the index of the last undeflated row; the loop ends once every
    // row has produced its eigenvalue.
    'outer: loop {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 1 {
                let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[(l, l - 1)].abs() + s == s {
                    a[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }

            let mut x = a[(nn, nn)];
            if l == nn {
                out.push(Complex64::new(x + t, 0.0));
                if nn == 0 {
                    break 'outer;
                }
                nn -= 1;
                break;
            }
            let mut y = a[(nn - 1, nn - 1)];
            let mut w = a[(nn, nn - 1)] * a[(nn - 1, nn)];
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    let hi = x + z;
                    let lo = if z != 0.0 { x - w / z } else { hi };
                    out.push(Complex64::new(lo, 0.0));
                    out.push(Complex64::new(hi, 0.0));
                } else {
                    out.push(Complex64::new(x + p, -z));
                    out.push(Complex64::new(x + p, z));
                }
                if nn < 2 {
                    break 'outer;
                }
                nn -= 2;
                break;
            }

            if sweeps >= cap {
                return Err(Error::NoConvergence {
                    iterations: sweeps,
                    dim: n,
                    partial: out,
                });
            }
            if its == 10 || its == 20 {
                t += x;
                for i in 0..=nn {
                    a[(i, i)] -= x;
                }
                let s = a[(nn, nn - 1)].abs() + a[(nn - 1, nn - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            sweeps += 1;

            // look for two consecutive small subdiagonal elements
            let mut m = nn - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - rr - ss;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }

            // double QR sweep on rows l..=nn, columns m..=nn
            let mut xk = 0.0;
            for k in m..nn {
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = if k != nn - 1 { a[(k + 2, k - 1)] } else { 0.0 };
                    xk = p.abs() + q.abs() + r.abs();
                    if xk != 0.0 {
                        p /= xk;
                        q /= xk;
                        r /= xk;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a[(k, k - 1)] = -a[(k, k - 1)];
                    }
                } else {
                    a[(k, k - 1)] = -s * xk;
                }
                p += s;
                let hx = p / s;
                let hy = q / s;
                let hz = r / s;
                q /= p;
                r /= p;
                for j in k..=nn {
                    let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                    if k != nn - 1 {
                        pp += r * a[(k + 2, j)];
                        a[(k + 2, j)] -= pp * hz;
                    }
                    a[(k + 1, j)] -= pp * hy;
                    a[(k, j)] -= pp * hx;
                }
                let mmin = if nn < k + 3 { nn } else { k + 3 };
                for i in l..=mmin {
                    let mut pp = hx * a[(i, k)] + hy * a[(i, k + 1)];
                    if k != nn - 1 {
                        pp += hz * a[(i, k + 2)];
                        a[(i, k + 2)] -= pp * r;
                    }
                    a[(i, k + 1)] -= pp * q;
                    a[(i, k)] -= pp;
                }
            }
        }
    }
    Ok(out)
}
