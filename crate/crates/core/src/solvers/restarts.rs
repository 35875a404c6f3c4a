use ndarray::Array1;

use super::config::{SolverConfig, SolverTrace, Termination, TraceRecord};
use crate::error::Result;
use crate::linalg::{CovarianceMatrix, UnitVector};

/// Result of a single restart.
pub(crate) struct RunOutcome {
    /// Last valid iterate (before the failure, for degenerate runs).
    pub x: Array1<f64>,
    pub potential: f64,
    pub records: Vec<TraceRecord>,
    pub termination: Termination,
    pub degenerate: bool,
}

/// Runs `config.restarts` independent solves and keeps the lowest-V one.
/// Earlier restarts win ties. If every run degenerated, the best-effort
/// iterate is returned with [`Termination::RestartExhausted`].
pub(crate) fn best_of_restarts<F>(
    s: &CovarianceMatrix,
    config: &SolverConfig,
    step_size: f64,
    mut run: F,
) -> Result<(UnitVector, SolverTrace)>
where
    F: FnMut(usize) -> Result<RunOutcome>,
{
    debug_assert!(config.restarts >= 1);
    let mut best: Option<(usize, RunOutcome)> = None;
    let mut best_degenerate: Option<(usize, RunOutcome)> = None;
    for r in 0..config.restarts {
        let outcome = run(r)?;
        let slot = if outcome.degenerate {
            &mut best_degenerate
        } else {
            &mut best
        };
        let better = slot
            .as_ref()
            .is_none_or(|(_, b)| outcome.potential < b.potential);
        if better {
            *slot = Some((r, outcome));
        }
    }
    let (restart, outcome, termination) = match (best, best_degenerate) {
        (Some((r, o)), _) => {
            let t = o.termination;
            (r, o, t)
        }
        (None, Some((r, o))) => (r, o, Termination::RestartExhausted),
        (None, None) => unreachable!("at least one restart runs"),
    };
    debug_assert_eq!(s.dim(), outcome.x.len());
    let x = UnitVector::new(outcome.x)?.canonical_sign();
    Ok((
        x,
        SolverTrace {
            records: outcome.records,
            termination,
            final_potential: outcome.potential,
            restart,
            step_size,
        },
    ))
}
