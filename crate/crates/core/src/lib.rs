//! Sparse principal component analysis by damped Hamiltonian dynamics.

pub mod bench;
pub mod classify;
pub mod data;
pub mod error;
pub mod linalg;
pub mod seed;
pub mod solvers;

pub use error::{Error, Result};
