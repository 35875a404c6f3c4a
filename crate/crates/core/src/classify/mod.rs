//! Downstream classifiers and the accuracy score.

mod knn;
mod krr;

pub use knn::KnnModel;
pub use krr::{median_pairwise_distance, Kernel, KernelKind, KrrModel};

use crate::error::{Error, Result};

/// Fraction of positions where `predicted` equals `actual`.
pub fn accuracy(predicted: &[usize], actual: &[usize]) -> Result<f64> {
    if actual.is_empty() {
        return Err(Error::EmptyInput("accuracy of an empty prediction set"));
    }
    if predicted.len() != actual.len() {
        return Err(Error::DimensionMismatch {
            context: "predicted vs actual labels",
            expected: actual.len(),
            found: predicted.len(),
        });
    }
    let hits = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    Ok(hits as f64 / actual.len() as f64)
}
