use ndarray::Array2;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::DatasetPair;
use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

/// Parameters of the planted-sparse-means generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub classes: usize,
    pub per_class_train: usize,
    pub per_class_test: usize,
    pub dim: usize,
    /// Nonzero coordinates in each class mean.
    pub support: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    /// Same shape as a 15-person face set with 8 training and 3 test images
    /// each, at a reduced feature dimension.
    fn default() -> Self {
        Self {
            classes: 15,
            per_class_train: 8,
            per_class_test: 3,
            dim: 256,
            support: 10,
            noise_sigma: 0.6,
            seed: 42,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if self.classes == 0
            || self.per_class_train == 0
            || self.per_class_test == 0
            || self.dim == 0
        {
            return fail("synthetic dataset counts must all be at least 1".into());
        }
        if self.support == 0 || self.support > self.dim {
            return fail(format!(
                "support must be in 1..={}, got {}",
                self.dim, self.support
            ));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return fail(format!(
                "noise_sigma must be >= 0, got {}",
                self.noise_sigma
            ));
        }
        Ok(())
    }
}

pub fn synth_dataset(params: &SynthParams) -> Result<DatasetPair> {
    synth_dataset_with_means(params).map(|(pair, _)| pair)
}

/// Generates the dataset and also returns the `classes x dim` matrix of
/// class means.
///
/// Every mean is supported on `support` random coordinates with magnitudes
/// uniform in `[1, 2]` and random signs. Samples add i.i.d.
/// `N(0, noise_sigma²)` noise. Rows are grouped by class in label order.
pub fn synth_dataset_with_means(params: &SynthParams) -> Result<(DatasetPair, Array2<f64>)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut means = Array2::zeros((params.classes, params.dim));
    for c in 0..params.classes {
        for j in sample(&mut rng, params.dim, params.support) {
            let magnitude: f64 = rng.random_range(1.0..=2.0);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            means[[c, j]] = sign * magnitude;
        }
    }

    let mut draw = |per_class: usize| -> Result<DataMatrix> {
        let n = params.classes * per_class;
        let mut values = Array2::zeros((n, params.dim));
        let mut labels = Vec::with_capacity(n);
        for c in 0..params.classes {
            for r in 0..per_class {
                let row = c * per_class + r;
                for j in 0..params.dim {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    values[[row, j]] = means[[c, j]] + params.noise_sigma * noise;
                }
                labels.push(c);
            }
        }
        DataMatrix::new(values, Some(labels))
    };
    let train = draw(params.per_class_train)?;
    let test = draw(params.per_class_test)?;
    let source = format!(
        "synth:classes={},train={},test={},dim={},support={},noise={},seed={}",
        params.classes,
        params.per_class_train,
        params.per_class_test,
        params.dim,
        params.support,
        params.noise_sigma,
        params.seed
    );
    Ok((DatasetPair::new(train, test, source)?, means))
}
