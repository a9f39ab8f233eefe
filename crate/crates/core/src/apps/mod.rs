//! Application workloads that produce linear systems for the solver stack.

pub mod heat;
pub mod powerflow;

pub use heat::{heat_matrix, HeatSpec};
pub use powerflow::{
    assemble_y_bus, nr_solve, Branch, Bus, BusKind, LinearSolver, NRFailure, NRRecord, NRTrace,
    PowerFlowCase,
};
