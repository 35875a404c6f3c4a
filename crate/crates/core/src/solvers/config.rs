use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::UnitVector;

/// Hyperparameters shared by the sparse solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Sparsity weight λ.
    pub lambda: f64,
    /// Smoothing δ of the L1 surrogate.
    pub delta: f64,
    /// Leapfrog time step Δt.
    pub dt: f64,
    /// Momentum decay γ applied at the start of every leapfrog step.
    pub damping: f64,
    /// ISTA step size η; `None` picks `0.9 / (2 ρ̂)` from a short power run.
    pub ista_step: Option<f64>,
    pub max_iter: usize,
    /// Stop once `‖x_{k+1} − x_k‖₂` drops below this.
    pub x_tol: f64,
    pub seed: u64,
    pub restarts: usize,
    /// Undamped, no momentum tangent projection: the plain textbook scheme.
    pub literal: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            delta: 1e-4,
            dt: 0.05,
            damping: 0.95,
            ista_step: None,
            max_iter: 5000,
            x_tol: 1e-7,
            seed: 0,
            restarts: 3,
            literal: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return fail(format!(
                "lambda must be a finite value >= 0, got {}",
                self.lambda
            ));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return fail(format!("delta must be > 0, got {}", self.delta));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return fail(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return fail(format!("damping must lie in (0, 1], got {}", self.damping));
        }
        if let Some(eta) = self.ista_step {
            if !(eta > 0.0 && eta.is_finite()) {
                return fail(format!("ista_step must be > 0, got {eta}"));
            }
        }
        if self.max_iter == 0 {
            return fail("max_iter must be at least 1".into());
        }
        if self.x_tol.is_nan() || self.x_tol <= 0.0 {
            return fail(format!("x_tol must be > 0, got {}", self.x_tol));
        }
        if self.restarts == 0 {
            return fail("restarts must be at least 1".into());
        }
        Ok(())
    }

    /// Momentum decay actually applied (1 in literal mode).
    pub fn effective_damping(&self) -> f64 {
        if self.literal {
            1.0
        } else {
            self.damping
        }
    }
}

/// Position on the unit sphere plus conjugate momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianState {
    pub x: UnitVector,
    pub p: Array1<f64>,
}

impl HamiltonianState {
    pub fn new(x: UnitVector, p: Array1<f64>) -> Result<Self> {
        if p.len() != x.dim() {
            return Err(Error::DimensionMismatch {
                context: "momentum length",
                expected: x.dim(),
                found: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("momentum has non-finite entries".into()));
        }
        Ok(Self { x, p })
    }

    /// Zero momentum at `x`.
    pub fn at_rest(x: UnitVector) -> Self {
        let p = Array1::zeros(x.dim());
        Self { x, p }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIter,
    RestartExhausted,
}

/// One iteration's observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    /// Smooth potential V(x).
    pub potential: f64,
    /// `−xᵀSx + λ‖x‖₁` with the exact L1 norm.
    pub exact_objective: f64,
    /// `½‖p‖² + V(x)`; equals V for ISTA, which carries no momentum.
    pub hamiltonian: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
    pub termination: Termination,
    /// V at the returned vector.
    pub final_potential: f64,
    /// Restart index (0-based) that produced the returned vector.
    pub restart: usize,
    /// Step size used by the winning run (leapfrog Δt after the stability
    /// cap, or ISTA η).
    pub step_size: f64,
}

/// `d x k` matrix of unit-norm loadings plus the variance each one captured
/// from the (deflated) covariance it was extracted from.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadingsMatrix {
    columns: Array2<f64>,
    explained: Vec<f64>,
}

impl LoadingsMatrix {
    pub fn new(columns: Array2<f64>, explained: Vec<f64>) -> Result<Self> {
        let k = columns.ncols();
        if k == 0 {
            return Err(Error::EmptyInput("loadings need at least one column"));
        }
        if explained.len() != k {
            return Err(Error::DimensionMismatch {
                context: "explained values",
                expected: k,
                found: explained.len(),
            });
        }
        for (j, col) in columns.columns().into_iter().enumerate() {
            let n = col.dot(&col).sqrt();
            if (n - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidData(format!("loading {j} has norm {n}")));
            }
        }
        if explained.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("explained values must be finite".into()));
        }
        Ok(Self { columns, explained })
    }

    pub fn from_components(components: &[UnitVector], explained: Vec<f64>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::EmptyInput("loadings need at least one column"));
        };
        let d = first.dim();
        let mut columns = Array2::zeros((d, components.len()));
        for (j, c) in components.iter().enumerate() {
            if c.dim() != d {
                return Err(Error::DimensionMismatch {
                    context: "component length",
                    expected: d,
                    found: c.dim(),
                });
            }
            columns.column_mut(j).assign(&c.view());
        }
        Self::new(columns, explained)
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.columns
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.columns.column(j)
    }

    pub fn explained(&self) -> &[f64] {
        &self.explained
    }

    /// Feature dimension `d`.
    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    /// Number of components `k`.
    pub fn n_components(&self) -> usize {
        self.columns.ncols()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = SolverConfig::default();
        let cases = [
            SolverConfig {
                lambda: -1.0,
                ..base.clone()
            },
            SolverConfig {
                delta: 0.0,
                ..base.clone()
            },
            SolverConfig {
                dt: 0.0,
                ..base.clone()
            },
            SolverConfig {
                damping: 0.0,
                ..base.clone()
            },
            SolverConfig {
                damping: 1.5,
                ..base.clone()
            },
            SolverConfig {
                ista_step: Some(-0.1),
                ..base.clone()
            },
            SolverConfig {
                max_iter: 0,
                ..base.clone()
            },
            SolverConfig {
                restarts: 0,
                ..base.clone()
            },
            SolverConfig { x_tol: 0.0, ..base },
        ];
        for c in cases {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn loadings_reject_non_unit_columns() {
        let m = Array2::from_shape_vec((2, 1), vec![1.0, 1.0]).unwrap();
        assert!(LoadingsMatrix::new(m, vec![1.0]).is_err());
    }
}
