//! Proximal-gradient (ISTA) solver for `max xᵀSx − λ‖x‖₁` on the unit sphere.
//!
//! Each iteration takes an ascent step on the quadratic, applies the
//! soft-threshold prox of the exact L1 penalty, and renormalizes:
//!
//! `x ← P(soft_threshold(x + 2ηSx, ηλ))`
//!
//! where `P` is the exact prox of `ηλ‖·‖₁` restricted to the sphere: the
//! normalized soft-threshold when it is nonzero, otherwise the signed basis
//! vector of the largest `|zᵢ|`.

use ndarray::{Array1, ArrayView1};

use super::config::{SolverConfig, SolverTrace, Termination, TraceRecord};
use super::potential::{grad_from, l1_norm, potential_from};
use super::restarts::{best_of_restarts, RunOutcome};
use crate::error::{Error, Result};
use crate::linalg::{
    norm, project_unit_sphere, random_unit_vector, CovarianceMatrix, UnitVector, DEGENERATE_NORM,
};

/// Power steps used to estimate the spectral radius for the default η.
const STEP_ESTIMATE_ITERS: usize = 20;

/// Elementwise `sign(zᵢ) · max(|zᵢ| − t, 0)`.
pub fn soft_threshold(z: ArrayView1<f64>, t: f64) -> Array1<f64> {
    z.mapv(|v| v.signum() * (v.abs() - t).max(0.0))
}

/// `argmin_{‖x‖=1} ½‖x − z‖² + t‖x‖₁`.
pub fn sphere_prox(z: ArrayView1<f64>, t: f64) -> Result<UnitVector> {
    let shrunk = soft_threshold(z, t);
    if norm(shrunk.view()) > DEGENERATE_NORM {
        return project_unit_sphere(shrunk.view());
    }
    // Every |zᵢ| ≤ t: Σ|xᵢ|(|zᵢ| − t) is maximized by a single coordinate.
    let zn = norm(z);
    if zn.is_nan() || zn <= DEGENERATE_NORM {
        return Err(Error::DegenerateVector { norm: zn });
    }
    let mut best = 0;
    for (i, v) in z.iter().enumerate() {
        if v.abs() > z[best].abs() {
            best = i;
        }
    }
    let mut e = Array1::zeros(z.len());
    e[best] = z[best].signum();
    UnitVector::new(e)
}

/// `0.9 / (2 ρ̂)` with ρ̂ = ‖Sv‖ after a short seeded power run.
pub fn default_ista_step(s: &CovarianceMatrix, seed: u64) -> f64 {
    let mut v = random_unit_vector(s.dim(), seed).into_inner();
    let mut rho = 0.0;
    for _ in 0..STEP_ESTIMATE_ITERS {
        let w = s.apply(v.view());
        rho = norm(w.view());
        if rho.is_nan() || rho <= DEGENERATE_NORM {
            break;
        }
        v = w / rho;
    }
    if rho > DEGENERATE_NORM && rho.is_finite() {
        0.9 / (2.0 * rho)
    } else {
        // S ≈ 0: the quadratic step is a no-op, any η works.
        1.0
    }
}

pub fn solve_ista(
    s: &CovarianceMatrix,
    config: &SolverConfig,
) -> Result<(UnitVector, SolverTrace)> {
    config.validate()?;
    let eta = config
        .ista_step
        .unwrap_or_else(|| default_ista_step(s, config.seed));
    let (lambda, delta) = (config.lambda, config.delta);
    let threshold = eta * lambda;

    best_of_restarts(s, config, eta, |restart| {
        let seed = config.seed.wrapping_add(restart as u64);
        let mut x = random_unit_vector(s.dim(), seed).into_inner();
        let mut sx = s.apply(x.view());
        let mut records = Vec::new();
        let mut termination = Termination::MaxIter;
        let mut degenerate = false;

        for _ in 0..config.max_iter {
            let z = &x + &((2.0 * eta) * &sx);
            let x_new = match sphere_prox(z.view(), threshold) {
                Ok(u) => u.into_inner(),
                Err(Error::DegenerateVector { .. }) => {
                    degenerate = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            let sx_new = s.apply(x_new.view());
            let step = norm((&x_new - &x).view());
            let v = potential_from(x_new.view(), sx_new.view(), lambda, delta);
            records.push(TraceRecord {
                potential: v,
                exact_objective: -x_new.dot(&sx_new) + lambda * l1_norm(x_new.view()),
                hamiltonian: v,
                grad_norm: norm(grad_from(x_new.view(), sx_new.view(), lambda, delta).view()),
                step,
            });
            x = x_new;
            sx = sx_new;
            if step < config.x_tol {
                termination = Termination::Converged;
                break;
            }
        }
        Ok(RunOutcome {
            potential: potential_from(x.view(), sx.view(), lambda, delta),
            x,
            records,
            termination,
            degenerate,
        })
    })
}
