//! The sparse PCA energy `V(x) = −xᵀSx + λ Σᵢ √(xᵢ² + δ)` and its gradient.
//!
//! Both are defined on all of `Rᵈ`; the solvers only ever evaluate them on
//! the unit sphere.

use ndarray::{Array1, ArrayView1, Zip};

use crate::error::{Error, Result};
use crate::linalg::CovarianceMatrix;

/// `Σᵢ √(xᵢ² + δ)`, a differentiable upper bound on `‖x‖₁`.
pub fn smooth_l1(x: ArrayView1<f64>, delta: f64) -> f64 {
    x.iter().map(|v| (v * v + delta).sqrt()).sum()
}

pub fn l1_norm(x: ArrayView1<f64>) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

fn check_dim(x: ArrayView1<f64>, s: &CovarianceMatrix) -> Result<()> {
    if x.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            context: "vector vs covariance",
            expected: s.dim(),
            found: x.len(),
        });
    }
    Ok(())
}

pub fn potential(x: ArrayView1<f64>, s: &CovarianceMatrix, lambda: f64, delta: f64) -> Result<f64> {
    check_dim(x, s)?;
    Ok(potential_from(x, s.apply(x).view(), lambda, delta))
}

/// V(x) given a precomputed `Sx`.
pub(crate) fn potential_from(
    x: ArrayView1<f64>,
    sx: ArrayView1<f64>,
    lambda: f64,
    delta: f64,
) -> f64 {
    -x.dot(&sx) + lambda * smooth_l1(x, delta)
}

/// `−xᵀSx + λ‖x‖₁` with the exact, non-smooth penalty.
pub fn exact_objective(x: ArrayView1<f64>, s: &CovarianceMatrix, lambda: f64) -> Result<f64> {
    check_dim(x, s)?;
    Ok(-s.quadratic_form(x) + lambda * l1_norm(x))
}

/// `∇V(x) = −2Sx + λ (xᵢ / √(xᵢ² + δ))ᵢ`.
pub fn grad_potential(
    x: ArrayView1<f64>,
    s: &CovarianceMatrix,
    lambda: f64,
    delta: f64,
) -> Result<Array1<f64>> {
    check_dim(x, s)?;
    Ok(grad_from(x, s.apply(x).view(), lambda, delta))
}

pub(crate) fn grad_from(
    x: ArrayView1<f64>,
    sx: ArrayView1<f64>,
    lambda: f64,
    delta: f64,
) -> Array1<f64> {
    let mut g = Array1::zeros(x.len());
    Zip::from(&mut g)
        .and(x)
        .and(sx)
        .for_each(|g, &xi, &sxi| *g = -2.0 * sxi + lambda * xi / (xi * xi + delta).sqrt());
    g
}
