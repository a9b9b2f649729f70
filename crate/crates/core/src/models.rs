//! Built-in benchmark problems with their reference data.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use log::warn;
use num_complex::Complex64;

use crate::dde::{DdeProblem, LinearDdeProblem, QuasilinearDdeProblem};
use crate::error::{invalid, Error, Result};
use crate::linalg::{ComplexSpectrum, DenseMatrix};

pub type ExactSolution = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 4] = ["example1", "mathieu", "nonlinear-scalar", "sir"];

/// Reference multiplier of the delayed Mathieu equation at
/// `delta = 1.5, epsilon = 0.5, b = -0.2`, `tau = T = 2 pi`.
#[allow(clippy::excessive_precision)]
pub const MATHIEU_REFERENCE_MULTIPLIER: Complex64 =
    Complex64::new(0.22751840350292177638239482513, 1.417175174215530683457881875737);

/// Delay gain at which the delayed Mathieu equation with `delta = 2`,
/// `epsilon = 1` has 1 as a characteristic multiplier. It is not the
/// dominant one: a complex pair of modulus about 1.416 sits outside.
pub const MATHIEU_CRITICAL_B: f64 = 0.7068337166604264;

/// Which computed multiplier is compared with the reference value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierMatch {
    /// The multiplier of largest modulus.
    Dominant,
    /// The multiplier nearest the reference.
    Closest,
}

#[derive(Clone)]
pub struct BenchmarkProblem {
    pub name: String,
    pub problem: DdeProblem,
    pub exact: Option<ExactSolution>,
    pub reference_multiplier: Option<Complex64>,
    pub multiplier_match: MultiplierMatch,
    /// Where the reference data comes from.
    pub provenance: String,
    /// Sum of the components, for models that conserve it.
    pub conserved_total: Option<f64>,
}

impl BenchmarkProblem {
    /// The computed multiplier to compare with [`reference_multiplier`](Self::reference_multiplier).
    pub fn tracked_multiplier(&self, spectrum: &ComplexSpectrum) -> Option<Complex64> {
        let reference = self.reference_multiplier?;
        match self.multiplier_match {
            MultiplierMatch::Dominant => spectrum.dominant(),
            MultiplierMatch::Closest => spectrum.closest_to(reference),
        }
    }
}

impl fmt::Debug for BenchmarkProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchmarkProblem")
            .field("name", &self.name)
            .field("problem", &self.problem)
            .field("has_exact", &self.exact.is_some())
            .field("reference_multiplier", &self.reference_multiplier)
            .field("multiplier_match", &self.multiplier_match)
            .field("provenance", &self.provenance)
            .finish()
    }
}

fn scalar(v: f64) -> DenseMatrix {
    DenseMatrix::from_element(1, 1, v)
}

/// `x'(t) = cos(t) x(t) - e^{sin t + cos t} x(t - pi/2)`, the linearization
/// of `z' = -log(z(t - pi/2)) z` about `z = e^{sin t}`. Its exact solution
/// `x = e^{sin t} cos t` is 2 pi-periodic, so 1 is a multiplier.
pub fn example1_scalar_periodic() -> BenchmarkProblem {
    let exact = |t: f64| t.sin().exp() * t.cos();
    let problem = LinearDdeProblem::new(
        1,
        FRAC_PI_2,
        |t: f64| Ok(scalar(t.cos())),
        |t: f64| Ok(scalar(-(t.sin() + t.cos()).exp())),
        move |t| Ok(vec![exact(t)]),
    )
    .and_then(|p| p.with_period(2.0 * PI))
    .expect("valid constants")
    .with_label("example1");
    BenchmarkProblem {
        name: "example1".into(),
        problem: problem.into(),
        exact: Some(Arc::new(move |t| vec![exact(t)])),
        reference_multiplier: Some(Complex64::new(1.0, 0.0)),
        // 1 is a double multiplier here; the dominant copy is tracked
        multiplier_match: MultiplierMatch::Dominant,
        provenance: "exact periodic solution x(t) = e^{sin t} cos t; multiplier 1 follows from its periodicity".into(),
        conserved_total: None,
    }
}

/// Delayed Mathieu equation `x'' + (delta + epsilon cos t) x = b x(t - 2 pi)`
/// in first-order form, `tau = T = 2 pi`, history `(t, 1)`.
pub fn example2_delayed_mathieu(delta: f64, epsilon: f64, b: f64) -> BenchmarkProblem {
    let problem = LinearDdeProblem::new(
        2,
        2.0 * PI,
        move |t: f64| {
            Ok(DenseMatrix::from_row_slice(
                2,
                2,
                &[0.0, 1.0, -(delta + epsilon * t.cos()), 0.0],
            ))
        },
        move |_| Ok(DenseMatrix::from_row_slice(2, 2, &[0.0, 0.0, b, 0.0])),
        |t| Ok(vec![t, 1.0]),
    )
    .and_then(|p| p.with_period(2.0 * PI))
    .expect("valid constants")
    .with_label(format!("mathieu(delta={delta}, epsilon={epsilon}, b={b})"));

    let (reference_multiplier, provenance) = if (delta, epsilon, b) == (1.5, 0.5, -0.2) {
        (
            Some(MATHIEU_REFERENCE_MULTIPLIER),
            "multiplier from a Floquet semi-discretization reference, 30 significant digits".to_string(),
        )
    } else if (delta, epsilon, b) == (2.0, 1.0, MATHIEU_CRITICAL_B) {
        (
            Some(Complex64::new(1.0, 0.0)),
            "critical delay gain: 1 is a multiplier (another multiplier has modulus about 1.416)".to_string(),
        )
    } else {
        (None, "no reference data for these parameters".to_string())
    };
    BenchmarkProblem {
        name: "mathieu".into(),
        problem: problem.into(),
        exact: None,
        reference_multiplier,
        multiplier_match: MultiplierMatch::Closest,
        provenance,
        conserved_total: None,
    }
}

/// `z'(t) = -log(z(t - pi/2)) z(t)` with periodic solution `z = e^{sin t}`.
pub fn example3_scalar_nonlinear() -> BenchmarkProblem {
    let exact = |t: f64| t.sin().exp();
    let problem = QuasilinearDdeProblem::new(
        1,
        FRAC_PI_2,
        |x: &[f64]| {
            if x[0] > 0.0 {
                Ok(scalar(-x[0].ln()))
            } else {
                Err(Error::Evaluation(format!("log of non-positive delayed state {}", x[0])))
            }
        },
        move |t| Ok(vec![exact(t)]),
    )
    .expect("valid constants")
    .with_label("nonlinear-scalar");
    BenchmarkProblem {
        name: "nonlinear-scalar".into(),
        problem: problem.into(),
        exact: Some(Arc::new(move |t| vec![exact(t)])),
        reference_multiplier: None,
        multiplier_match: MultiplierMatch::Closest,
        provenance: "exact periodic solution z(t) = e^{sin t}".into(),
        conserved_total: None,
    }
}

/// Parameters of the delayed SIR model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirParams {
    /// 0 for bilinear incidence, 1 for saturated incidence.
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub tau: f64,
    pub s0: f64,
    pub i0: f64,
    pub r0: f64,
    /// History of the infected class is `I(t) = i0 + history_slope * t`;
    /// `-0.5` and `+0.5` are the two standard scenarios. S and R are held
    /// at `s0`, `r0` on `[-tau, 0]` (only `I(t - tau)` enters the model).
    pub history_slope: f64,
}

impl Default for SirParams {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            beta: 1.0,
            gamma: 1.0,
            tau: 1.0,
            s0: 0.7,
            i0: 0.2,
            r0: 0.1,
            history_slope: -0.5,
        }
    }
}

/// Coefficient of the SIR model at delayed state `x = (S, I, R)`:
///
/// ```text
/// [ -q    0    0 ]
/// [  q  -gamma 0 ]      q = beta I / (1 + alpha I)
/// [  0   gamma 0 ]
/// ```
///
/// `beta` sits inside `q` so that `x' = A(x(t - tau)) x(t)` is the usual
/// delayed SIR system for any infection rate. Column sums vanish, and for
/// `I >= 0` the matrix is a graph Laplacian.
pub fn sir_matrix(p: &SirParams, delayed: &[f64]) -> DenseMatrix {
    let i = delayed[1];
    let q = p.beta * i / (1.0 + p.alpha * i);
    DenseMatrix::from_row_slice(3, 3, &[-q, 0.0, 0.0, q, -p.gamma, 0.0, 0.0, p.gamma, 0.0])
}

pub fn example4_delayed_sir(params: SirParams) -> Result<BenchmarkProblem> {
    if !(params.beta > 0.0 && params.gamma > 0.0) {
        return Err(invalid(format!(
            "SIR rates must be positive (beta = {}, gamma = {})",
            params.beta, params.gamma
        )));
    }
    if params.alpha != 0.0 && params.alpha != 1.0 {
        warn!("SIR incidence parameter alpha = {} is neither 0 nor 1", params.alpha);
    }
    let p = params;
    let problem = QuasilinearDdeProblem::new(
        3,
        p.tau,
        move |x: &[f64]| Ok(sir_matrix(&p, x)),
        move |t| Ok(vec![p.s0, p.i0 + p.history_slope * t, p.r0]),
    )?
    .with_label(format!(
        "sir(alpha={}, beta={}, gamma={}, tau={}, s0={}, i0={}, r0={}, slope={})",
        p.alpha, p.beta, p.gamma, p.tau, p.s0, p.i0, p.r0, p.history_slope
    ));
    Ok(BenchmarkProblem {
        name: "sir".into(),
        problem: problem.into(),
        exact: None,
        reference_multiplier: None,
        multiplier_match: MultiplierMatch::Closest,
        provenance: "no closed form; compare against refined runs".into(),
        conserved_total: Some(p.s0 + p.i0 + p.r0),
    })
}

/// Tunable parameters of a builtin problem with their default values, in a
/// fixed order.
pub fn builtin_parameters(name: &str) -> Result<Vec<(&'static str, f64)>> {
    let d = SirParams::default();
    Ok(match name {
        "example1" | "nonlinear-scalar" => vec![],
        "mathieu" => vec![("delta", 1.5), ("epsilon", 0.5), ("b", -0.2)],
        "sir" => vec![
            ("alpha", d.alpha),
            ("beta", d.beta),
            ("gamma", d.gamma),
            ("tau", d.tau),
            ("s0", d.s0),
            ("i0", d.i0),
            ("r0", d.r0),
            ("history_slope", d.history_slope),
        ],
        other => {
            return Err(invalid(format!(
                "unknown problem '{other}'; available: {}",
                BUILTIN_NAMES.join(", ")
            )))
        }
    })
}

/// Defaults of [`builtin_parameters`] with `overrides` applied (last one
/// wins). Unknown keys are an error.
pub fn resolve_parameters(name: &str, overrides: &[(String, f64)]) -> Result<Vec<(&'static str, f64)>> {
    let mut values = builtin_parameters(name)?;
    for (key, v) in overrides {
        match values.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = *v,
            None => {
                let known: Vec<&str> = values.iter().map(|(k, _)| *k).collect();
                return Err(invalid(if known.is_empty() {
                    format!("problem '{name}' takes no parameters (got '{key}')")
                } else {
                    format!("problem '{name}' has no parameter '{key}'; known: {}", known.join(", "))
                }));
            }
        }
    }
    Ok(values)
}

/// Look up a benchmark by name, applying `key = value` overrides.
pub fn builtin(name: &str, params: &[(String, f64)]) -> Result<BenchmarkProblem> {
    let values = resolve_parameters(name, params)?;
    let get = |key: &str| {
        values
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .expect("declared parameter")
    };
    Ok(match name {
        "example1" => example1_scalar_periodic(),
        "nonlinear-scalar" => example3_scalar_nonlinear(),
        "mathieu" => example2_delayed_mathieu(get("delta"), get("epsilon"), get("b")),
        "sir" => example4_delayed_sir(SirParams {
            alpha: get("alpha"),
            beta: get("beta"),
            gamma: get("gamma"),
            tau: get("tau"),
            s0: get("s0"),
            i0: get("i0"),
            r0: get("r0"),
            history_slope: get("history_slope"),
        })?,
        _ => unreachable!("name checked by builtin_parameters"),
    })
}
