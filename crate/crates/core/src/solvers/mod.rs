//! Component extractors: damped leapfrog sparse PCA, ISTA sparse PCA and
//! plain PCA, plus the deflation driver that chains them.

mod config;
mod deflation;
mod ista;
mod leapfrog;
mod potential;
mod restarts;

pub use config::{
    HamiltonianState, LoadingsMatrix, SolverConfig, SolverTrace, Termination, TraceRecord,
};
pub(crate) use deflation::extract_progressive;
pub use deflation::{deflate, extract_components, transform, Method};
pub use ista::{default_ista_step, soft_threshold, solve_ista, sphere_prox};
pub use leapfrog::{leapfrog_step, solve_leapfrog, stable_step, Constraint, LeapfrogScheme};
pub use potential::{exact_objective, grad_potential, l1_norm, potential, smooth_l1};
