use std::f64::consts::SQRT_2;

use magdde::dde::{assemble_linear, discretize, solve, solve_from, DdeProblem, LinearDdeProblem, SolveOptions};
use magdde::linalg::{eigenvalues, expm};
use magdde::spectral::ChebyshevGrid;
use magdde::DenseMatrix;
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

fn constant_problem(dim: usize, tau: f64, a: DenseMatrix, b: DenseMatrix) -> LinearDdeProblem {
    LinearDdeProblem::new(
        dim,
        tau,
        move |_| Ok(a.clone()),
        move |_| Ok(b.clone()),
        move |t| Ok((0..dim).map(|c| (t * (c + 1) as f64).cos()).collect()),
    )
    .unwrap()
}

/// The explicit 5x5 matrix for d = 1, N = 4, without the `2 / tau` factor.
fn a4_reference(a: f64, b: f64, tau: f64) -> [[f64; 5]; 5] {
    let r = SQRT_2;
    [
        [tau / 2.0 * a, 0.0, 0.0, 0.0, tau / 2.0 * b],
        [1.0 + r / 2.0, -r / 2.0, -r, r / 2.0, -1.0 / (2.0 + r)],
        [-0.5, r, 0.0, -r, 0.5],
        [1.0 / (2.0 + r), -r / 2.0, r, r / 2.0, -1.0 - r / 2.0],
        [-0.5, 4.0 / (2.0 + r), -2.0, 4.0 / (2.0 - r), -5.5],
    ]
}

#[test]
fn a4_matches_explicit_matrix() {
    for (a, b, tau) in [(0.7, -0.4, 1.3), (-2.0, 3.0, std::f64::consts::FRAC_PI_2)] {
        let p = constant_problem(
            1,
            tau,
            DenseMatrix::from_element(1, 1, a),
            DenseMatrix::from_element(1, 1, b),
        );
        let m = assemble_linear(&p, &ChebyshevGrid::new(4, tau).unwrap(), 0.0).unwrap();
        let reference = a4_reference(a, b, tau);
        let scale = 2.0 / tau;
        for i in 0..5 {
            for j in 0..5 {
                let want = scale * reference[i][j];
                let err = (m[(i, j)] - want).abs();
                assert!(
                    err <= 1e-14 * want.abs().max(scale),
                    "({i},{j}): {} vs {want}",
                    m[(i, j)]
                );
            }
        }
    }
}

#[test]
fn first_interval_of_pure_delay_equation() {
    // x' = -x(t - 1), phi = 1: x(t) = 1 - t on [0, 1]. The segment has a kink
    // at t = 0, so the grid only converges algebraically; A_N is constant,
    // so all orders give the same state.
    let p = LinearDdeProblem::new(
        1,
        1.0,
        |_| Ok(DenseMatrix::zeros(1, 1)),
        |_| Ok(DenseMatrix::from_element(1, 1, -1.0)),
        |_| Ok(vec![1.0]),
    )
    .unwrap();
    let problem = DdeProblem::from(p);
    let mut max_errors = Vec::new();
    for n in [8, 20, 40] {
        let grid = ChebyshevGrid::new(n, 1.0).unwrap();
        let states: Vec<Vec<f64>> = [2, 4, 6]
            .iter()
            .map(|&order| {
                solve(&problem, &SolveOptions::new(n, 3, order, 1.0))
                    .unwrap()
                    .final_state()
                    .to_vec()
            })
            .collect();
        for s in &states[1..] {
            for (a, b) in s.iter().zip(&states[0]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let err = grid
            .nodes_shifted()
            .iter()
            .zip(&states[0])
            .map(|(th, u)| (u - (1.0 - (1.0 + th))).abs())
            .fold(0.0, f64::max);
        max_errors.push((err, states[0][0].abs()));
    }
    assert!(
        max_errors.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1),
        "{max_errors:?}"
    );
    assert!(max_errors[2].1 < 1e-5);
}

/// Newton iteration on `lambda + e^{-lambda} = 0`.
fn newton_root(mut z: Complex64) -> Complex64 {
    for _ in 0..50 {
        let f = z + (-z).exp();
        let df = 1.0 - (-z).exp();
        let step = f / df;
        z -= step;
        if step.norm() < 1e-16 {
            break;
        }
    }
    z
}

#[test]
fn rightmost_eigenvalue_converges_to_characteristic_root() {
    let root = newton_root(Complex64::new(-0.3, 1.3));
    assert!((root - Complex64::new(-0.31813, 1.33724)).norm() < 1e-5);
    let mut errors = Vec::new();
    for n in [5, 10, 20] {
        let p = constant_problem(1, 1.0, DenseMatrix::zeros(1, 1), DenseMatrix::from_element(1, 1, -1.0));
        let m = assemble_linear(&p, &ChebyshevGrid::new(n, 1.0).unwrap(), 0.0).unwrap();
        let spec = eigenvalues(&m).unwrap();
        let rightmost = spec
            .values()
            .iter()
            .copied()
            .filter(|z| z.im >= 0.0)
            .max_by(|a, b| a.re.total_cmp(&b.re))
            .unwrap();
        errors.push((rightmost - root).norm());
    }
    assert!(errors[2] <= 1e-8, "{errors:?}");
    assert!(errors[0] > errors[1] && errors[1] > errors[2]);
}

fn random_matrix(rng: &mut impl FnMut() -> f64, d: usize) -> DenseMatrix {
    DenseMatrix::from_fn(d, d, |_, _| rng())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn autonomous_step_is_exact(seed in any::<u64>(), order in prop::sample::select(vec![2u32, 4, 6])) {
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let a = random_matrix(&mut next, 2);
        let b = random_matrix(&mut next, 2);
        let tau = 1.0;
        let p = constant_problem(2, tau, a, b);
        let problem = DdeProblem::from(p.clone());
        let sys = discretize(&problem, 10).unwrap();
        let m = assemble_linear(&p, sys.grid(), 0.0).unwrap();
        let exact = expm(&(m * tau)).unwrap() * DVector::from_column_slice(sys.phi_n());
        let traj = solve(&problem, &SolveOptions::new(10, 1, order, tau)).unwrap();
        let got = DVector::from_column_slice(traj.final_state());
        prop_assert!((got - &exact).norm() <= 1e-13 * exact.norm());
    }

    #[test]
    fn chained_runs_match_single_run(split in 1usize..4, m in 2usize..6) {
        let p = LinearDdeProblem::new(
            1,
            1.0,
            |t: f64| Ok(DenseMatrix::from_element(1, 1, -0.5 + 0.2 * t.sin())),
            |t: f64| Ok(DenseMatrix::from_element(1, 1, 0.3 * t.cos())),
            |t| Ok(vec![1.0 + t]),
        )
        .unwrap();
        let problem = DdeProblem::from(p);
        let sys = discretize(&problem, 6).unwrap();
        let whole = solve(&problem, &SolveOptions::new(6, m, 4, 5.0)).unwrap();
        let head = solve(&problem, &SolveOptions::new(6, m, 4, split as f64)).unwrap();
        let tail = solve_from(&problem, &sys, split, head.final_state().to_vec(), &SolveOptions::new(6, m, 4, 5.0)).unwrap();
        prop_assert_eq!(whole.final_state(), tail.final_state());
        prop_assert_eq!(&whole.intervals[..split], &head.intervals[..]);
        prop_assert_eq!(&whole.intervals[split..], &tail.intervals[..]);
    }
}
