//! Damped leapfrog integration of `H(x, p) = ½‖p‖² + V(x)` on the unit sphere.
//!
//! One step, in order:
//!
//! 1. `p½ = γ p − (Δt/2) ∇V(x)`
//! 2. `x′ = (x + Δt p½) / ‖x + Δt p½‖`
//! 3. `p½ ← p½ − (p½ · x′) x′` (drop the radial part)
//! 4. `p′ = p½ − (Δt/2) ∇V(x′)`
//!
//! With `γ = 1` and step 3 skipped this is the plain leapfrog scheme with a
//! sphere projection after the drift; [`Constraint::Free`] drops the
//! projection as well, which is what the energy-conservation tests use.

use ndarray::{Array1, ArrayView1};

use super::config::{HamiltonianState, SolverConfig, SolverTrace, Termination, TraceRecord};
use super::potential::{grad_from, l1_norm, potential_from};
use super::restarts::{best_of_restarts, RunOutcome};
use crate::error::{Error, Result};
use crate::linalg::{norm, project_unit_sphere, random_unit_vector, CovarianceMatrix, UnitVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// Unconstrained motion in `Rᵈ`.
    Free,
    /// Re-normalize `x` after the drift; optionally remove the radial
    /// momentum component.
    Sphere { tangent_momentum: bool },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeapfrogScheme {
    pub dt: f64,
    pub damping: f64,
    pub constraint: Constraint,
}

impl LeapfrogScheme {
    pub fn from_config(config: &SolverConfig) -> Self {
        Self {
            dt: config.dt,
            damping: config.effective_damping(),
            constraint: Constraint::Sphere {
                tangent_momentum: !config.literal,
            },
        }
    }

    /// Advances `(x, p)` by one step. `grad_x` must be `∇V(x)`; the returned
    /// triple is `(x′, p′, ∇V(x′))` so callers can reuse the gradient.
    pub fn step<G>(
        &self,
        x: ArrayView1<f64>,
        p: ArrayView1<f64>,
        grad_x: ArrayView1<f64>,
        mut grad: G,
    ) -> Result<(Array1<f64>, Array1<f64>, Array1<f64>)>
    where
        G: FnMut(ArrayView1<f64>) -> Array1<f64>,
    {
        let half = 0.5 * self.dt;
        let mut p_half = self.damping * &p - half * &grad_x;
        let drifted = &x + &(self.dt * &p_half);
        let x_new = match self.constraint {
            Constraint::Free => drifted,
            Constraint::Sphere { tangent_momentum } => {
                let x_new = project_unit_sphere(drifted.view())?.into_inner();
                if tangent_momentum {
                    let radial = p_half.dot(&x_new);
                    p_half.scaled_add(-radial, &x_new);
                }
                x_new
            }
        };
        let g_new = grad(x_new.view());
        let p_new = p_half - half * &g_new;
        Ok((x_new, p_new, g_new))
    }
}

/// One leapfrog step of the sparse PCA dynamics, using the config's Δt,
/// damping and mode (no stability cap is applied here).
pub fn leapfrog_step(
    state: &HamiltonianState,
    s: &CovarianceMatrix,
    config: &SolverConfig,
) -> Result<HamiltonianState> {
    if state.x.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            context: "state vs covariance",
            expected: s.dim(),
            found: state.x.dim(),
        });
    }
    let scheme = LeapfrogScheme::from_config(config);
    let grad = |x: ArrayView1<f64>| grad_from(x, s.apply(x).view(), config.lambda, config.delta);
    let g = grad(state.x.view());
    let (x, p, _) = scheme.step(state.x.view(), state.p.view(), g.view(), grad)?;
    Ok(HamiltonianState {
        x: UnitVector::new(x)?,
        p,
    })
}

/// Largest step for which the linearized dynamics stay comfortably inside
/// the leapfrog stability region (`Δt ω < 2`, with a factor 2 margin).
///
/// `ω² ≤ 2ρ(S) + λ/√δ` bounds the curvature of V; ρ is bounded by the
/// smaller of the Frobenius and max-row-sum norms.
pub fn stable_step(s: &CovarianceMatrix, lambda: f64, delta: f64) -> f64 {
    let m = s.values();
    let frob = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let row_sum = m
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let omega_sq = 2.0 * frob.min(row_sum) + lambda / delta.sqrt();
    if omega_sq > 0.0 {
        1.0 / omega_sq.sqrt()
    } else {
        f64::INFINITY
    }
}

/// Minimizes V on the unit sphere by damped Hamiltonian dynamics.
///
/// Each restart `r` starts from the seeded draw `seed + r` with zero
/// momentum and runs until `‖x_{k+1} − x_k‖₂ < x_tol` or `max_iter`. The run
/// with the lowest final V wins; its iterations are recorded in the trace.
pub fn solve_leapfrog(
    s: &CovarianceMatrix,
    config: &SolverConfig,
) -> Result<(UnitVector, SolverTrace)> {
    config.validate()?;
    let dt = if config.literal {
        config.dt
    } else {
        config.dt.min(stable_step(s, config.lambda, config.delta))
    };
    let scheme = LeapfrogScheme {
        dt,
        ..LeapfrogScheme::from_config(config)
    };
    let (lambda, delta) = (config.lambda, config.delta);

    best_of_restarts(s, config, dt, |restart| {
        let seed = config.seed.wrapping_add(restart as u64);
        let mut x = random_unit_vector(s.dim(), seed).into_inner();
        let mut p = Array1::zeros(s.dim());
        let mut sx = s.apply(x.view());
        let mut g = grad_from(x.view(), sx.view(), lambda, delta);
        let mut records = Vec::new();
        let mut termination = Termination::MaxIter;
        let mut degenerate = false;

        for _ in 0..config.max_iter {
            let mut sx_new = None;
            let stepped = scheme.step(x.view(), p.view(), g.view(), |xn| {
                let sxn = s.apply(xn);
                let gn = grad_from(xn, sxn.view(), lambda, delta);
                sx_new = Some(sxn);
                gn
            });
            let (x_new, p_new, g_new) = match stepped {
                Ok(t) => t,
                Err(Error::DegenerateVector { .. }) => {
                    degenerate = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            let sx_n = sx_new.expect("gradient closure ran");
            let step = norm((&x_new - &x).view());
            let v = potential_from(x_new.view(), sx_n.view(), lambda, delta);
            records.push(TraceRecord {
                potential: v,
                exact_objective: -x_new.dot(&sx_n) + lambda * l1_norm(x_new.view()),
                hamiltonian: 0.5 * p_new.dot(&p_new) + v,
                grad_norm: norm(g_new.view()),
                step,
            });
            x = x_new;
            p = p_new;
            g = g_new;
            sx = sx_n;
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
