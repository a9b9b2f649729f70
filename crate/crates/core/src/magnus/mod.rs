//! One-step exponential integrators built from truncated Magnus expansions.

mod linear;
mod nonlinear;

pub use linear::{
    magnus_exponent, magnus_step, magnus_step_matrix, FnTimeMatrix, GuardPolicy, MagnusIntegrator, MagnusOrder,
    TimeMatrix,
};
pub use nonlinear::{
    is_graph_laplacian, nonlinear_magnus_step, structure_check, FnStateMatrix, NonlinearOrder, StateMatrix,
};
