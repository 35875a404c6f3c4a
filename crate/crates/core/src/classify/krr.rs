use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scores within this relative distance of the maximum count as tied.
const SCORE_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// `exp(−‖a − b‖² / (2σ²))`
    Rbf { bandwidth: f64 },
    /// `aᵀb`
    Linear,
}

impl Kernel {
    pub fn kind(&self) -> KernelKind {
        match self {
            Kernel::Rbf { .. } => KernelKind::Rbf,
            Kernel::Linear => KernelKind::Linear,
        }
    }

    pub fn bandwidth(&self) -> Option<f64> {
        match self {
            Kernel::Rbf { bandwidth } => Some(*bandwidth),
            Kernel::Linear => None,
        }
    }

    pub fn eval(&self, a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
        match *self {
            Kernel::Rbf { bandwidth } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-d2 / (2.0 * bandwidth * bandwidth)).exp()
            }
            Kernel::Linear => a.dot(&b),
        }
    }

    /// `K[i, j] = k(aᵢ, bⱼ)` over the rows of `a` and `b`.
    pub fn matrix(&self, a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
        Array2::from_shape_fn((a.nrows(), b.nrows()), |(i, j)| {
            self.eval(a.row(i), b.row(j))
        })
    }
}

/// Kernel family without its parameters, as named in configs and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
    Linear,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Rbf => "rbf",
            KernelKind::Linear => "linear",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rbf" => Ok(KernelKind::Rbf),
            "linear" => Ok(KernelKind::Linear),
            other => Err(Error::InvalidConfig(format!(
                "unknown kernel {other:?} (expected rbf or linear)"
            ))),
        }
    }
}

/// Median of the pairwise Euclidean distances between rows (`i < j`).
/// Returns `None` for fewer than two rows.
pub fn median_pairwise_distance(features: ArrayView2<f64>) -> Option<f64> {
    let n = features.nrows();
    if n < 2 {
        return None;
    }
    let mut d = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let a = features.row(i);
            let b = features.row(j);
            d.push(
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt(),
            );
        }
    }
    d.sort_unstable_by(f64::total_cmp);
    let m = d.len();
    Some(if m % 2 == 1 {
        d[m / 2]
    } else {
        0.5 * (d[m / 2 - 1] + d[m / 2])
    })
}

/// One-vs-all kernel ridge regression on one-hot targets.
#[derive(Debug, Clone, PartialEq)]
pub struct KrrModel {
    train_features: Array2<f64>,
    dual_weights: Array2<f64>,
    kernel: Kernel,
    ridge: f64,
    classes: Vec<usize>,
    residual: f64,
}

impl KrrModel {
    /// Solves `(K + αI) W = Y` by Cholesky with one refinement step. Fails if
    /// the factorization breaks down or the residual exceeds
    /// `1e-8 · max(1, ‖Y‖∞)`.
    pub fn fit(
        features: Array2<f64>,
        labels: &[usize],
        kernel: Kernel,
        ridge: f64,
    ) -> Result<Self> {
        let n = features.nrows();
        if n == 0 {
            return Err(Error::EmptyInput(
                "kernel ridge regression needs training points",
            ));
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                context: "KRR labels",
                expected: n,
                found: labels.len(),
            });
        }
        if !(ridge > 0.0 && ridge.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "ridge must be > 0, got {ridge}"
            )));
        }
        if let Kernel::Rbf { bandwidth } = kernel {
            if !(bandwidth > 0.0 && bandwidth.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "bandwidth must be > 0, got {bandwidth}"
                )));
            }
        }
        let mut classes = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        let mut targets = Array2::zeros((n, classes.len()));
        for (i, l) in labels.iter().enumerate() {
            let c = classes.binary_search(l).expect("label is in class list");
            targets[[i, c]] = 1.0;
        }

        let mut system = kernel.matrix(features.view(), features.view());
        for i in 0..n {
            system[[i, i]] += ridge;
        }
        let chol = cholesky(&system)?;
        let mut weights = cholesky_solve(&chol, &targets);
        let correction = cholesky_solve(&chol, &(&targets - &system.dot(&weights)));
        weights += &correction;

        let residual = max_abs(&(system.dot(&weights) - &targets));
        let bound = 1e-8 * max_abs(&targets).max(1.0);
        if residual.is_nan() || residual > bound {
            return Err(Error::SingularSystem(format!(
                "residual {residual:e} exceeds {bound:e}"
            )));
        }
        Ok(Self {
            train_features: features,
            dual_weights: weights,
            kernel,
            ridge,
            classes,
            residual,
        })
    }

    pub fn dual_weights(&self) -> &Array2<f64> {
        &self.dual_weights
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// ∞-norm of `(K + αI)W − Y` after fitting.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `m x C` score matrix `K_query W`.
    pub fn scores(&self, queries: ArrayView2<f64>) -> Result<Array2<f64>> {
        if queries.ncols() != self.train_features.ncols() {
            return Err(Error::DimensionMismatch {
                context: "KRR query features",
                expected: self.train_features.ncols(),
                found: queries.ncols(),
            });
        }
        Ok(self
            .kernel
            .matrix(queries, self.train_features.view())
            .dot(&self.dual_weights))
    }

    /// Class with the highest score; near-ties go to the lower class.
    pub fn predict(&self, queries: ArrayView2<f64>) -> Result<Vec<usize>> {
        let scores = self.scores(queries)?;
        Ok(scores
            .rows()
            .into_iter()
            .map(|row| self.classes[argmax_lowest(row)])
            .collect())
    }
}

fn argmax_lowest(row: ArrayView1<f64>) -> usize {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = SCORE_TIE_TOL * max.abs().max(1.0);
    row.iter().position(|&v| v >= max - tol).unwrap_or(0)
}

fn max_abs(m: &Array2<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Lower-triangular `L` with `A = L Lᵀ`.
fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut diag = a[[j, j]];
        for k in 0..j {
            diag -= l[[j, k]] * l[[j, k]];
        }
        if diag.is_nan() || diag <= 0.0 {
            return Err(Error::SingularSystem(format!(
                "matrix is not positive definite (pivot {j} = {diag:e})"
            )));
        }
        let ljj = diag.sqrt();
        l[[j, j]] = ljj;
        for i in (j + 1)..n {
            let mut v = a[[i, j]];
            for k in 0..j {
                v -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = v / ljj;
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let mut x = b.clone();
    for c in 0..x.ncols() {
        for i in 0..n {
            let mut v = x[[i, c]];
            for k in 0..i {
                v -= l[[i, k]] * x[[k, c]];
            }
            x[[i, c]] = v / l[[i, i]];
        }
        for i in (0..n).rev() {
            let mut v = x[[i, c]];
            for k in (i + 1)..n {
                v -= l[[k, i]] * x[[k, c]];
            }
            x[[i, c]] = v / l[[i, i]];
        }
    }
    x
}
