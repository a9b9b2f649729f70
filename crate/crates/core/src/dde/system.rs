//! Assembly of the collocated `d (N + 1)`-dimensional ordinary differential
//! equation.
//!
//! The first `d` rows carry the equation itself (`A` in the leading block,
//! `B` in the trailing one); the remaining rows are `(2 / tau) (D ⊗ I_d)`
//! and transport the history segment.

use crate::error::{invalid, Result};
use crate::linalg::DenseMatrix;
use crate::magnus::{StateMatrix, TimeMatrix};
use crate::spectral::ChebyshevGrid;

use super::problem::{DdeProblem, LinearDdeProblem, QuasilinearDdeProblem};

/// Lower rows of the collocation matrix, with the first `d` rows left zero.
fn transport_rows(grid: &ChebyshevGrid, d: usize) -> DenseMatrix {
    let np1 = grid.num_nodes();
    let scale = 2.0 / grid.delay();
    let dm = grid.diff_matrix();
    let mut m = DenseMatrix::zeros(d * np1, d * np1);
    for j in 1..np1 {
        for k in 0..np1 {
            let v = scale * dm[(j, k)];
            for c in 0..d {
                m[(j * d + c, k * d + c)] = v;
            }
        }
    }
    m
}

fn check_grid(grid: &ChebyshevGrid, tau: f64) -> Result<()> {
    if (grid.delay() - tau).abs() > 1e-15 * tau {
        return Err(invalid(format!(
            "grid built for delay {} but problem has delay {tau}",
            grid.delay()
        )));
    }
    Ok(())
}

fn place_block(m: &mut DenseMatrix, block: &DenseMatrix, col: usize) {
    let d = block.nrows();
    m.view_mut((0, col), (d, d)).copy_from(block);
}

/// Collocation matrix of a linear problem at time `t`.
pub fn assemble_linear(problem: &LinearDdeProblem, grid: &ChebyshevGrid, t: f64) -> Result<DenseMatrix> {
    check_grid(grid, problem.tau())?;
    let d = problem.dim();
    let mut m = transport_rows(grid, d);
    fill_linear(&mut m, problem, grid.n(), t)?;
    Ok(m)
}

fn fill_linear(m: &mut DenseMatrix, problem: &LinearDdeProblem, n: usize, t: f64) -> Result<()> {
    let d = problem.dim();
    place_block(m, &problem.a(t)?, 0);
    place_block(m, &problem.b(t)?, n * d);
    Ok(())
}

/// Collocation matrix of a quasilinear problem: `A` is evaluated at the
/// last block of `state` (the delayed value) and the trailing block is zero.
pub fn assemble_quasilinear(
    problem: &QuasilinearDdeProblem,
    grid: &ChebyshevGrid,
    state: &[f64],
) -> Result<DenseMatrix> {
    check_grid(grid, problem.tau())?;
    let d = problem.dim();
    let mut m = transport_rows(grid, d);
    fill_quasilinear(&mut m, problem, grid.n(), state)?;
    Ok(m)
}

fn fill_quasilinear(m: &mut DenseMatrix, problem: &QuasilinearDdeProblem, n: usize, state: &[f64]) -> Result<()> {
    let d = problem.dim();
    if state.len() != d * (n + 1) {
        return Err(invalid(format!(
            "state has length {}, expected {}",
            state.len(),
            d * (n + 1)
        )));
    }
    place_block(m, &problem.a(&state[n * d..])?, 0);
    Ok(())
}

/// A problem sampled on a Chebyshev grid: initial vector plus a cached
/// copy of the constant (transport) part of the collocation matrix.
#[derive(Debug, Clone)]
pub struct DiscretizedSystem {
    grid: ChebyshevGrid,
    dim: usize,
    phi_n: Vec<f64>,
    transport: DenseMatrix,
}

impl DiscretizedSystem {
    pub fn grid(&self) -> &ChebyshevGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn big_dim(&self) -> usize {
        self.dim * self.grid.num_nodes()
    }

    /// History sampled at the shifted nodes, block `j` = `phi(theta_j)`.
    pub fn phi_n(&self) -> &[f64] {
        &self.phi_n
    }

    pub fn linear_operator<'a>(&'a self, problem: &'a LinearDdeProblem) -> LinearOperator<'a> {
        LinearOperator { system: self, problem }
    }

    pub fn quasilinear_operator<'a>(&'a self, problem: &'a QuasilinearDdeProblem) -> QuasilinearOperator<'a> {
        QuasilinearOperator { system: self, problem }
    }
}

/// Sample the history on an `N`-interval grid.
pub fn discretize(problem: &DdeProblem, n: usize) -> Result<DiscretizedSystem> {
    let grid = ChebyshevGrid::new(n, problem.tau())?;
    let dim = problem.dim();
    let mut phi_n = Vec::with_capacity(dim * grid.num_nodes());
    for &th in grid.nodes_shifted() {
        phi_n.extend(problem.history(th)?);
    }
    let transport = transport_rows(&grid, dim);
    Ok(DiscretizedSystem {
        grid,
        dim,
        phi_n,
        transport,
    })
}

/// `t -> A_N(t)` for a linear problem.
pub struct LinearOperator<'a> {
    system: &'a DiscretizedSystem,
    problem: &'a LinearDdeProblem,
}

impl TimeMatrix for LinearOperator<'_> {
    fn dim(&self) -> usize {
        self.system.big_dim()
    }

    fn eval(&self, t: f64) -> Result<DenseMatrix> {
        let mut m = self.system.transport.clone();
        fill_linear(&mut m, self.problem, self.system.grid.n(), t)?;
        Ok(m)
    }
}

/// `U -> A_N(U)` for a quasilinear problem.
pub struct QuasilinearOperator<'a> {
    system: &'a DiscretizedSystem,
    problem: &'a QuasilinearDdeProblem,
}

impl StateMatrix for QuasilinearOperator<'_> {
    fn dim(&self) -> usize {
        self.system.big_dim()
    }

    fn eval(&self, y: &[f64]) -> Result<DenseMatrix> {
        let mut m = self.system.transport.clone();
        fill_quasilinear(&mut m, self.problem, self.system.grid.n(), y)?;
        Ok(m)
    }

    fn block_dim(&self) -> Option<usize> {
        Some(self.system.dim)
    }
}
