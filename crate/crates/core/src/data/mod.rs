//! Dataset ingestion: labeled CSV matrices, directories of binary PGM
//! images, and a seeded synthetic generator with planted sparse structure.

mod csv;
mod pgm;
mod synth;

pub use self::csv::{load_csv, parse_labeled_csv, to_csv_string, write_csv};
pub use self::pgm::{
    decode_pgm, encode_pgm, label_from_file_name, load_pgm_dir, load_pgm_dirs, GrayImage,
};
pub use self::synth::{synth_dataset, synth_dataset_with_means, SynthParams};

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub source: String,
    pub n_features: usize,
    pub n_classes: usize,
}

/// Labeled train/test split over a common feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPair {
    pub train: DataMatrix,
    pub test: DataMatrix,
    pub meta: DatasetMeta,
}

impl DatasetPair {
    /// Checks that both halves are labeled, share `d`, the training half
    /// has at least two rows, and every test label occurs in training.
    pub fn new(train: DataMatrix, test: DataMatrix, source: impl Into<String>) -> Result<Self> {
        if train.n_features() != test.n_features() {
            return Err(Error::DimensionMismatch {
                context: "train/test feature count",
                expected: train.n_features(),
                found: test.n_features(),
            });
        }
        if train.n_samples() < 2 {
            return Err(Error::InsufficientSamples {
                needed: 2,
                found: train.n_samples(),
            });
        }
        let (Some(train_labels), Some(test_labels)) = (train.labels(), test.labels()) else {
            return Err(Error::InvalidData("dataset rows must be labeled".into()));
        };
        let classes: BTreeSet<usize> = train_labels.iter().copied().collect();
        if let Some(&label) = test_labels.iter().find(|l| !classes.contains(l)) {
            return Err(Error::UnknownTestLabel { label });
        }
        let meta = DatasetMeta {
            source: source.into(),
            n_features: train.n_features(),
            n_classes: classes.len(),
        };
        Ok(Self { train, test, meta })
    }

    pub fn train_labels(&self) -> &[usize] {
        self.train.labels().expect("validated at construction")
    }

    pub fn test_labels(&self) -> &[usize] {
        self.test.labels().expect("validated at construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_unknown_test_label() {
        let train = DataMatrix::new(array![[0.0], [1.0]], Some(vec![0, 1])).unwrap();
        let test = DataMatrix::new(array![[0.5]], Some(vec![2])).unwrap();
        assert!(matches!(
            DatasetPair::new(train, test, "t"),
            Err(Error::UnknownTestLabel { label: 2 })
        ));
    }

    #[test]
    fn rejects_unlabeled_and_tiny() {
        let one = DataMatrix::new(array![[0.0]], Some(vec![0])).unwrap();
        assert!(DatasetPair::new(one.clone(), one.clone(), "t").is_err());
        let unlabeled = DataMatrix::unlabeled(array![[0.0], [1.0]]).unwrap();
        assert!(DatasetPair::new(unlabeled, one, "t").is_err());
    }
}
