//! Dense matrix and vector primitives shared by the solvers, classifiers and
//! the experiment pipeline.
//!
//! Everything here is a pure function of its inputs. Random starting vectors
//! are drawn from a ChaCha stream keyed by an explicit seed, so every result is
//! reproducible bit-for-bit.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Norms below this are treated as the zero vector.
pub const DEGENERATE_NORM: f64 = 1e-300;

/// Row-major sample matrix (rows are samples, columns are features) with
/// optional integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Array2<f64>,
    labels: Option<Vec<usize>>,
}

impl DataMatrix {
    pub fn new(values: Array2<f64>, labels: Option<Vec<usize>>) -> Result<Self> {
        let (n, d) = values.dim();
        if n == 0 {
            return Err(Error::EmptyInput("data matrix has no rows"));
        }
        if d == 0 {
            return Err(Error::EmptyInput("data matrix has no columns"));
        }
        if let Some((idx, _)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite entry at row {}, column {}",
                idx / d,
                idx % d
            )));
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "label count",
                    expected: n,
                    found: labels.len(),
                });
            }
        }
        Ok(Self { values, labels })
    }

    pub fn unlabeled(values: Array2<f64>) -> Result<Self> {
        Self::new(values, None)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn into_parts(self) -> (Array2<f64>, Option<Vec<usize>>) {
        (self.values, self.labels)
    }

    /// Same labels, new feature values. Used by transforms that change `d`.
    pub(crate) fn with_values(&self, values: Array2<f64>) -> Result<Self> {
        Self::new(values, self.labels.clone())
    }
}

/// Symmetric `d x d` covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(Array2<f64>);

impl CovarianceMatrix {
    /// Wraps a square, finite matrix that is symmetric up to
    /// `1e-10 * max(1, max|S_ij|)`.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (r, c) = values.dim();
        if r != c {
            return Err(Error::DimensionMismatch {
                context: "covariance must be square",
                expected: r,
                found: c,
            });
        }
        if r == 0 {
            return Err(Error::EmptyInput("covariance matrix is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData(
                "covariance has non-finite entries".into(),
            ));
        }
        let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let asym = max_asymmetry(values.view());
        if asym > 1e-10 * scale {
            return Err(Error::InvalidData(format!(
                "covariance is not symmetric (max |S_ij - S_ji| = {asym:e})"
            )));
        }
        Ok(Self(values))
    }

    /// Caller guarantees exact symmetry and finiteness.
    pub(crate) fn from_symmetric(values: Array2<f64>) -> Self {
        debug_assert_eq!(max_asymmetry(values.view()), 0.0);
        Self(values)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.0.diag().sum()
    }

    pub fn mean_diagonal(&self) -> f64 {
        self.trace() / self.dim() as f64
    }

    pub fn apply(&self, x: ArrayView1<f64>) -> Array1<f64> {
        self.0.dot(&x)
    }

    /// `xᵀ S x`.
    pub fn quadratic_form(&self, x: ArrayView1<f64>) -> f64 {
        x.dot(&self.0.dot(&x))
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }
}

fn max_asymmetry(m: ArrayView2<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[[i, j]] - m[[j, i]]).abs());
        }
    }
    worst
}

/// A vector with Euclidean norm 1 (within 1e-10).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Array1<f64>);

impl UnitVector {
    /// Checks the norm; use [`project_unit_sphere`] to normalize arbitrary input.
    pub fn new(entries: Array1<f64>) -> Result<Self> {
        let n = norm(entries.view());
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidData(format!(
                "vector norm is {n}, expected 1"
            )));
        }
        Ok(Self(entries))
    }

    /// The `i`-th standard basis vector of `R^d`.
    pub fn basis(d: usize, i: usize) -> Self {
        let mut e = Array1::zeros(d);
        e[i] = 1.0;
        Self(e)
    }

    pub fn view(&self) -> ArrayView1<'_, f64> {
        self.0.view()
    }

    pub fn as_array(&self) -> &Array1<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Array1<f64> {
        self.0
    }

    /// Flips the sign so the entry of largest magnitude is positive
    /// (first such entry on ties).
    pub fn canonical_sign(self) -> Self {
        let mut best = 0;
        for (i, v) in self.0.iter().enumerate() {
            if v.abs() > self.0[best].abs() {
                best = i;
            }
        }
        if self.0[best] < 0.0 {
            Self(-self.0)
        } else {
            self
        }
    }
}

pub fn norm(x: ArrayView1<f64>) -> f64 {
    x.dot(&x).sqrt()
}

/// Centers `train` by its column means and shifts `test` by the same means.
pub fn center(
    train: &DataMatrix,
    test: &DataMatrix,
) -> Result<(DataMatrix, DataMatrix, Array1<f64>)> {
    if train.n_features() != test.n_features() {
        return Err(Error::DimensionMismatch {
            context: "train/test feature count",
            expected: train.n_features(),
            found: test.n_features(),
        });
    }
    let mean = train
        .values()
        .mean_axis(Axis(0))
        .expect("DataMatrix has at least one row");
    let centered_train = train.with_values(train.values() - &mean)?;
    let centered_test = test.with_values(test.values() - &mean)?;
    Ok((centered_train, centered_test, mean))
}

/// Sample covariance `XᵀX / (n-1)` of an already centered matrix.
pub fn covariance(centered: &DataMatrix) -> Result<CovarianceMatrix> {
    let x = centered.values();
    let n = x.nrows();
    if n < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            found: n,
        });
    }
    let scale = x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let means = x.mean_axis(Axis(0)).expect("n >= 2");
    if means.iter().any(|m| m.abs() > 1e-8 * scale) {
        return Err(Error::InvalidData(
            "covariance input is not centered".into(),
        ));
    }
    let mut s = x.t().dot(x) / (n - 1) as f64;
    // Mirror the upper triangle so the result is exactly symmetric.
    let d = s.nrows();
    for i in 0..d {
        for j in (i + 1)..d {
            s[[j, i]] = s[[i, j]];
        }
    }
    Ok(CovarianceMatrix::from_symmetric(s))
}

/// `x / ‖x‖₂`.
pub fn project_unit_sphere(x: ArrayView1<f64>) -> Result<UnitVector> {
    let n = norm(x);
    if n.is_nan() || n <= DEGENERATE_NORM || n.is_infinite() {
        return Err(Error::DegenerateVector { norm: n });
    }
    Ok(UnitVector(x.mapv(|v| v / n)))
}

/// Seeded standard-normal draw projected onto the unit sphere.
pub fn random_unit_vector(d: usize, seed: u64) -> UnitVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v: Array1<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Ok(u) = project_unit_sphere(v.view()) {
            return u;
        }
    }
}

/// Dominant (algebraically largest) eigenpair of a symmetric matrix.
///
/// Stops once `‖Sv − λv‖₂ ≤ tol · max(1, |λ|)` with `λ = vᵀSv`. If the plain
/// iteration locks onto a negative eigenvalue, or fails to settle, it is rerun
/// on `S + cI` with a Gershgorin shift `c` that makes the spectrum
/// non-negative. The returned vector follows [`UnitVector::canonical_sign`].
pub fn power_iteration(
    s: &CovarianceMatrix,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<(UnitVector, f64)> {
    let start = random_unit_vector(s.dim(), seed);
    let first = shifted_power(s, 0.0, start.clone(), max_iter, tol);
    if let Ok((_, lambda)) = &first {
        if *lambda >= 0.0 {
            return first.map(|(v, l)| (v.canonical_sign(), l));
        }
    }
    let shift = gershgorin_shift(s);
    if shift == 0.0 {
        return first.map(|(v, l)| (v.canonical_sign(), l));
    }
    shifted_power(s, shift, start, max_iter, tol).map(|(v, l)| (v.canonical_sign(), l))
}

fn gershgorin_shift(s: &CovarianceMatrix) -> f64 {
    let lower = s
        .values()
        .rows()
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let off: f64 = row
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| v.abs())
                .sum();
            row[i] - off
        })
        .fold(f64::INFINITY, f64::min);
    (-lower).max(0.0)
}

fn shifted_power(
    s: &CovarianceMatrix,
    shift: f64,
    start: UnitVector,
    max_iter: usize,
    tol: f64,
) -> Result<(UnitVector, f64)> {
    let mut v = start.into_inner();
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let sv = s.apply(v.view());
        let lambda = v.dot(&sv);
        residual = norm((&sv - &(lambda * &v)).view());
        if residual <= tol * lambda.abs().max(1.0) {
            return Ok((UnitVector(v), lambda));
        }
        let w = sv + shift * &v;
        match project_unit_sphere(w.view()) {
            Ok(u) => v = u.into_inner(),
            // Sv = -shift v: v is already an eigenvector of the shifted problem.
            Err(_) => return Ok((UnitVector(v), lambda)),
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}
