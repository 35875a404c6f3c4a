//! Runs the (method × d × classifier) evaluation grid.
//!
//! Each method extracts `max(dims)` components once; the cell for `d` uses
//! the first `d` of them, which is exactly what extracting `d` components
//! with the same seed would return.

use std::time::{Duration, Instant};

use ndarray::{s, Array1};
use rayon::prelude::*;

use super::config::{ClassifierKind, DatasetSource, ExperimentConfig};
use super::report::{CellStatus, EvaluationReport, ReportRow};
use crate::classify::{accuracy, median_pairwise_distance, Kernel, KernelKind, KnnModel, KrrModel};
use crate::data::{load_csv, load_pgm_dirs, synth_dataset, DatasetPair};
use crate::error::{Error, Result};
use crate::linalg::{center, covariance, CovarianceMatrix, DataMatrix};
use crate::seed::derive_seed;
use crate::solvers::{extract_progressive, LoadingsMatrix, Method, SolverConfig};

pub fn load_dataset(source: &DatasetSource) -> Result<DatasetPair> {
    match source {
        DatasetSource::Csv { train, test } => load_csv(train, test),
        DatasetSource::Pgm { train, test } => load_pgm_dirs(train, test),
        DatasetSource::Synth(params) => synth_dataset(params),
    }
}

/// A dataset centered by its training means, with the training covariance.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub train: DataMatrix,
    pub test: DataMatrix,
    pub mean: Array1<f64>,
    pub covariance: CovarianceMatrix,
}

impl Prepared {
    pub fn new(pair: &DatasetPair) -> Result<Self> {
        let (train, test, mean) = center(&pair.train, &pair.test)?;
        let covariance = covariance(&train)?;
        Ok(Self {
            train,
            test,
            mean,
            covariance,
        })
    }

    /// `0.1 · mean(diag S)`.
    pub fn default_lambda(&self) -> f64 {
        0.1 * self.covariance.mean_diagonal()
    }
}

/// Seed used by every cell of `method`.
pub fn method_seed(global: u64, method: Method) -> u64 {
    let index = Method::ALL
        .iter()
        .position(|&m| m == method)
        .expect("listed in ALL");
    derive_seed(global, index as u64)
}

/// The resolved solver configuration for one method.
pub fn method_config(
    config: &ExperimentConfig,
    prepared: &Prepared,
    method: Method,
) -> Result<SolverConfig> {
    let seed = method_seed(config.require_seed()?, method);
    let lambda = config
        .solver
        .lambda
        .unwrap_or_else(|| prepared.default_lambda());
    let mut solver = config.solver.resolve(lambda, seed);
    if method == Method::Pca {
        solver.max_iter = config.solver.pca_max_iter;
    }
    Ok(solver)
}

/// One method's components, with the cumulative time spent up to each one.
#[derive(Debug)]
pub struct Extraction {
    pub method: Method,
    pub config: SolverConfig,
    components: Vec<crate::linalg::UnitVector>,
    explained: Vec<f64>,
    elapsed: Vec<Duration>,
    failure: Option<Error>,
}

impl Extraction {
    pub fn run(
        prepared: &Prepared,
        method: Method,
        k: usize,
        config: SolverConfig,
    ) -> Result<Self> {
        let start = Instant::now();
        let mut elapsed = Vec::with_capacity(k);
        let progress = extract_progressive(&prepared.covariance, k, method, &config, |_| {
            elapsed.push(start.elapsed())
        })?;
        Ok(Self {
            method,
            config,
            components: progress.components,
            explained: progress.explained,
            elapsed,
            failure: progress.failure,
        })
    }

    /// The first `d` components, or the error that stopped extraction
    /// before reaching them.
    pub fn loadings(&self, d: usize) -> Result<LoadingsMatrix> {
        if d <= self.components.len() {
            return LoadingsMatrix::from_components(
                &self.components[..d],
                self.explained[..d].to_vec(),
            );
        }
        Err(match &self.failure {
            Some(e) => Error::InvalidData(e.to_string()),
            None => Error::InvalidConfig(format!(
                "only {} components were extracted, {d} requested",
                self.components.len()
            )),
        })
    }

    fn elapsed_through(&self, d: usize) -> Duration {
        d.checked_sub(1)
            .and_then(|i| self.elapsed.get(i))
            .copied()
            .unwrap_or_default()
    }
}

struct Scored {
    accuracy: f64,
    bandwidth: Option<f64>,
}

fn classify(
    config: &ExperimentConfig,
    classifier: ClassifierKind,
    train: &DataMatrix,
    test: &DataMatrix,
    train_labels: &[usize],
    test_labels: &[usize],
) -> Result<Scored> {
    let settings = &config.classifier;
    let (predicted, bandwidth) = match classifier {
        ClassifierKind::Knn => {
            let model = KnnModel::fit(
                train.values().clone(),
                train_labels.to_vec(),
                settings.k_neighbors,
            )?;
            (model.predict(test.values().view())?, None)
        }
        ClassifierKind::Krr => {
            let kernel = match settings.kernel {
                KernelKind::Linear => Kernel::Linear,
                KernelKind::Rbf => {
                    let bandwidth = match settings.bandwidth {
                        Some(b) => b,
                        None => median_pairwise_distance(train.values().view())
                            .filter(|b| *b > 0.0)
                            .ok_or_else(|| {
                                Error::InvalidData("all projected training points coincide".into())
                            })?,
                    };
                    Kernel::Rbf { bandwidth }
                }
            };
            let model =
                KrrModel::fit(train.values().clone(), train_labels, kernel, settings.ridge)?;
            (model.predict(test.values().view())?, kernel.bandwidth())
        }
    };
    Ok(Scored {
        accuracy: accuracy(&predicted, test_labels)?,
        bandwidth,
    })
}

fn project(prepared: &Prepared, loadings: &LoadingsMatrix) -> (DataMatrix, DataMatrix) {
    let w = loadings.matrix();
    let train = prepared
        .train
        .with_values(prepared.train.values().dot(w))
        .expect("finite product");
    let test = prepared
        .test
        .with_values(prepared.test.values().dot(w))
        .expect("finite product");
    (train, test)
}

fn cell(
    config: &ExperimentConfig,
    prepared: &Prepared,
    pair: &DatasetPair,
    extraction: &Extraction,
    d: usize,
    classifier: ClassifierKind,
) -> ReportRow {
    let method = extraction.method;
    let solver = &extraction.config;
    let settings = &config.classifier;
    let is_knn = classifier == ClassifierKind::Knn;
    let mut row = ReportRow {
        method,
        d,
        classifier,
        lambda: method.is_sparse().then_some(solver.lambda),
        delta: method.is_sparse().then_some(solver.delta),
        dt: (method == Method::Leapfrog).then_some(solver.dt),
        damping: (method == Method::Leapfrog).then_some(solver.damping),
        k_neighbors: is_knn.then_some(settings.k_neighbors),
        kernel: (!is_knn).then_some(settings.kernel),
        bandwidth: None,
        ridge: (!is_knn).then_some(settings.ridge),
        seed: solver.seed,
        accuracy: None,
        seconds: None,
        status: CellStatus::Failed,
        error: None,
    };
    let start = Instant::now();
    let outcome = extraction.loadings(d).and_then(|loadings| {
        let (train, test) = project(prepared, &loadings);
        classify(
            config,
            classifier,
            &train,
            &test,
            pair.train_labels(),
            pair.test_labels(),
        )
    });
    match outcome {
        Ok(scored) => {
            row.accuracy = Some(scored.accuracy);
            row.bandwidth = scored.bandwidth;
            row.status = CellStatus::Ok;
            if config.timings {
                row.seconds = Some((extraction.elapsed_through(d) + start.elapsed()).as_secs_f64());
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Loads the configured dataset and runs the grid.
pub fn run_pipeline(config: &ExperimentConfig) -> Result<EvaluationReport> {
    config.validate()?;
    let pair = load_dataset(&config.dataset)?;
    run_pipeline_on(&pair, config)
}

/// Runs the grid on an already loaded dataset. Rows are ordered by
/// classifier, then method, then `d`, following the configured lists.
/// A solver failure marks the affected cells as failed instead of
/// aborting the run.
pub fn run_pipeline_on(pair: &DatasetPair, config: &ExperimentConfig) -> Result<EvaluationReport> {
    config.validate()?;
    config.validate_for(pair)?;
    let prepared = Prepared::new(pair)?;
    let k = *config.dims.iter().max().expect("validated non-empty");

    let extractions: Vec<Extraction> = config
        .methods
        .par_iter()
        .map(|&method| {
            Extraction::run(
                &prepared,
                method,
                k,
                method_config(config, &prepared, method)?,
            )
        })
        .collect::<Result<_>>()?;

    let cells: Vec<(ClassifierKind, &Extraction, usize)> = config
        .classifiers
        .iter()
        .flat_map(|&c| {
            extractions
                .iter()
                .flat_map(move |e| config.dims.iter().map(move |&d| (c, e, d)))
        })
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(c, e, d)| cell(config, &prepared, pair, e, d, c))
        .collect();

    let mut resolved = config.clone();
    if resolved.solver.lambda.is_none() && config.methods.iter().any(|m| m.is_sparse()) {
        resolved.solver.lambda = Some(prepared.default_lambda());
    }
    Ok(EvaluationReport {
        rows,
        config: Some(resolved.to_toml_string()?),
    })
}

/// Fits `k` components on the training half only.
pub fn extract_for_dataset(
    pair: &DatasetPair,
    config: &ExperimentConfig,
    method: Method,
    k: usize,
) -> Result<LoadingsMatrix> {
    config.validate()?;
    let prepared = Prepared::new(pair)?;
    let solver = method_config(config, &prepared, method)?;
    let extraction = Extraction::run(&prepared, method, k, solver)?;
    match extraction.failure {
        Some(e) if extraction.components.len() < k => Err(e),
        _ => extraction.loadings(k),
    }
}

/// The loadings as `dim` rows of `n_components` values.
pub fn loadings_rows(loadings: &LoadingsMatrix) -> Vec<Vec<f64>> {
    let m = loadings.matrix();
    (0..m.nrows())
        .map(|i| m.slice(s![i, ..]).to_vec())
        .collect()
}
