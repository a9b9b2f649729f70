//! Error and conservation measures on collocated states.

use crate::error::{invalid, Result};
use crate::spectral::ChebyshevGrid;

/// Mean over the nodes of `|x_c(anchor + theta_j) - U_{j,c}|` for one
/// component `c` of the block layout.
///
/// For first-order forms of higher-order equations pick the component that
/// carries the position (component 0 for the delayed Mathieu system).
pub fn mean_error<F>(
    state: &[f64],
    grid: &ChebyshevGrid,
    dim: usize,
    anchor: f64,
    reference: F,
    component: usize,
) -> Result<f64>
where
    F: Fn(f64) -> Vec<f64>,
{
    check_layout(state, grid, dim, component)?;
    let total: f64 = grid
        .node_times(anchor)
        .iter()
        .enumerate()
        .map(|(j, &t)| (reference(t)[component] - state[j * dim + component]).abs())
        .sum();
    Ok(total / grid.num_nodes() as f64)
}

/// `||x - x_ref|| / ||x_ref||` in the Euclidean norm.
pub fn relative_error(value: &[f64], reference: &[f64]) -> f64 {
    let diff: f64 = value.iter().zip(reference).map(|(a, b)| (a - b).powi(2)).sum();
    let norm: f64 = reference.iter().map(|b| b * b).sum();
    (diff / norm).sqrt()
}

/// Conservation and positivity of a state whose components should sum to
/// `total` at every node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationReport {
    /// `|sum - total|` at block 0 (the interval end point).
    pub boundary_error: f64,
    /// Mean of `|sum - total|` over all nodes.
    pub mean_node_error: f64,
    /// Smallest component over all nodes.
    pub min_component: f64,
    /// Smallest component at block 0.
    pub min_boundary_component: f64,
}

pub fn conservation(state: &[f64], dim: usize, total: f64) -> Result<ConservationReport> {
    if dim == 0 || state.is_empty() || !state.len().is_multiple_of(dim) {
        return Err(invalid(format!(
            "state of length {} does not split into blocks of {dim}",
            state.len()
        )));
    }
    let blocks: Vec<&[f64]> = state.chunks(dim).collect();
    let err = |b: &[f64]| (b.iter().sum::<f64>() - total).abs();
    let min = |b: &[f64]| b.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ConservationReport {
        boundary_error: err(blocks[0]),
        mean_node_error: blocks.iter().map(|b| err(b)).sum::<f64>() / blocks.len() as f64,
        min_component: blocks.iter().map(|b| min(b)).fold(f64::INFINITY, f64::min),
        min_boundary_component: min(blocks[0]),
    })
}

fn check_layout(state: &[f64], grid: &ChebyshevGrid, dim: usize, component: usize) -> Result<()> {
    if state.len() != dim * grid.num_nodes() {
        return Err(invalid(format!(
            "state has length {}, expected {} x {}",
            state.len(),
            dim,
            grid.num_nodes()
        )));
    }
    if component >= dim {
        return Err(invalid(format!(
            "component {component} out of range for dimension {dim}"
        )));
    }
    Ok(())
}
