use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classify::KernelKind;
use crate::data::{DatasetPair, SynthParams};
use crate::error::{Error, Result};
use crate::solvers::{Method, SolverConfig};

/// Component counts evaluated when none are given.
pub const DEFAULT_DIMS: [usize; 5] = [20, 30, 40, 50, 60];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Knn,
    Krr,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 2] = [ClassifierKind::Knn, ClassifierKind::Krr];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Krr => "krr",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "knn" => Ok(ClassifierKind::Knn),
            "krr" => Ok(ClassifierKind::Krr),
            other => Err(Error::InvalidConfig(format!(
                "unknown classifier {other:?} (expected knn or krr)"
            ))),
        }
    }
}

/// Where the train/test split comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum DatasetSource {
    /// Two labeled CSV files.
    Csv {
        train: PathBuf,
        test: PathBuf,
    },
    /// Two directories of `<label>_<name>.pgm` images.
    Pgm {
        train: PathBuf,
        test: PathBuf,
    },
    Synth(SynthParams),
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Synth(SynthParams::default())
    }
}

/// Solver hyperparameters as configured; `lambda = None` means
/// `0.1 · mean(diag S)` of the training covariance. The PCA baseline uses
/// `pca_max_iter` instead of `max_iter`, since power iteration crawls
/// through the clustered noise eigenvalues of small-sample covariances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub lambda: Option<f64>,
    pub delta: f64,
    pub dt: f64,
    pub damping: f64,
    pub ista_step: Option<f64>,
    pub max_iter: usize,
    pub x_tol: f64,
    pub restarts: usize,
    pub pca_max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let base = SolverConfig::default();
        Self {
            lambda: None,
            delta: base.delta,
            dt: base.dt,
            damping: base.damping,
            ista_step: base.ista_step,
            max_iter: base.max_iter,
            x_tol: base.x_tol,
            restarts: base.restarts,
            pca_max_iter: 100_000,
        }
    }
}

impl SolverSettings {
    /// Concrete solver config for one grid cell.
    pub fn resolve(&self, lambda: f64, seed: u64) -> SolverConfig {
        SolverConfig {
            lambda,
            delta: self.delta,
            dt: self.dt,
            damping: self.damping,
            ista_step: self.ista_step,
            max_iter: self.max_iter,
            x_tol: self.x_tol,
            seed,
            restarts: self.restarts,
            literal: false,
        }
    }
}

/// `bandwidth = None` selects the median pairwise training distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSettings {
    pub k_neighbors: usize,
    pub kernel: KernelKind,
    pub bandwidth: Option<f64>,
    pub ridge: f64,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        Self {
            k_neighbors: 1,
            kernel: KernelKind::Rbf,
            bandwidth: None,
            ridge: 1e-3,
        }
    }
}

/// Everything needed to reproduce one evaluation grid.
///
/// The TOML form mirrors the struct: top-level scalars and lists, then
/// `[dataset]`, `[solver]` and `[classifier]` tables. Every field has a
/// default except `seed`, which must come from the file or the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub methods: Vec<Method>,
    pub dims: Vec<usize>,
    pub classifiers: Vec<ClassifierKind>,
    /// Record per-cell wall time. Off makes report bytes reproducible.
    pub timings: bool,
    pub output: Option<PathBuf>,
    pub markdown: Option<PathBuf>,
    pub dataset: DatasetSource,
    pub solver: SolverSettings,
    pub classifier: ClassifierSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: None,
            methods: Method::ALL.to_vec(),
            dims: DEFAULT_DIMS.to_vec(),
            classifiers: ClassifierKind::ALL.to_vec(),
            timings: true,
            output: None,
            markdown: None,
            dataset: DatasetSource::default(),
            solver: SolverSettings::default(),
            classifier: ClassifierSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            Error::InvalidConfig("a seed is required (config file or --seed)".into())
        })
    }

    /// Dataset-independent checks.
    pub fn validate(&self) -> Result<()> {
        self.require_seed()?;
        let fail = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.methods.is_empty() {
            return fail("methods must not be empty");
        }
        if self.dims.is_empty() {
            return fail("dims must not be empty");
        }
        if self.classifiers.is_empty() {
            return fail("classifiers must not be empty");
        }
        if self.dims.contains(&0) {
            return fail("every component count must be at least 1");
        }
        let unique = |n: usize, set: usize| n == set;
        if !unique(
            self.methods.len(),
            self.methods.iter().collect::<BTreeSet<_>>().len(),
        ) || !unique(
            self.dims.len(),
            self.dims.iter().collect::<BTreeSet<_>>().len(),
        ) || !unique(
            self.classifiers.len(),
            self.classifiers.iter().collect::<BTreeSet<_>>().len(),
        ) {
            return fail("methods, dims and classifiers must not contain duplicates");
        }
        self.solver.resolve(0.0, 0).validate()?;
        if self.solver.pca_max_iter == 0 {
            return fail("pca_max_iter must be at least 1");
        }
        if let Some(l) = self.solver.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return fail("lambda must be a finite value >= 0");
            }
        }
        let c = &self.classifier;
        if c.k_neighbors == 0 {
            return fail("k_neighbors must be at least 1");
        }
        if !(c.ridge > 0.0 && c.ridge.is_finite()) {
            return fail("ridge must be > 0");
        }
        if let Some(b) = c.bandwidth {
            if !(b > 0.0 && b.is_finite()) {
                return fail("bandwidth must be > 0");
            }
        }
        Ok(())
    }

    /// Checks that depend on the loaded data.
    pub fn validate_for(&self, pair: &DatasetPair) -> Result<()> {
        let d = pair.meta.n_features;
        let n = pair.train.n_samples();
        if let Some(&bad) = self.dims.iter().find(|&&k| k > d || k > n) {
            return Err(Error::InvalidConfig(format!(
                "component count {bad} exceeds the feature dimension ({d}) or training size ({n})"
            )));
        }
        if self.classifiers.contains(&ClassifierKind::Knn) && self.classifier.k_neighbors > n {
            return Err(Error::InvalidConfig(format!(
                "k_neighbors {} exceeds the training size {n}",
                self.classifier.k_neighbors
            )));
        }
        Ok(())
    }
}
