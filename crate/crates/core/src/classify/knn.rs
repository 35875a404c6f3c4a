use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Brute-force Euclidean k-nearest-neighbour classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    features: Array2<f64>,
    labels: Vec<usize>,
    k_neighbors: usize,
}

impl KnnModel {
    pub fn fit(features: Array2<f64>, labels: Vec<usize>, k_neighbors: usize) -> Result<Self> {
        let n = features.nrows();
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                context: "k-NN labels",
                expected: n,
                found: labels.len(),
            });
        }
        if n == 0 {
            return Err(Error::EmptyInput("k-NN needs at least one training point"));
        }
        if k_neighbors == 0 || k_neighbors > n {
            return Err(Error::InvalidConfig(format!(
                "k_neighbors must be in 1..={n}, got {k_neighbors}"
            )));
        }
        Ok(Self {
            features,
            labels,
            k_neighbors,
        })
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k_neighbors(&self) -> usize {
        self.k_neighbors
    }

    /// Majority vote among the `k` nearest training points.
    ///
    /// Distance ties go to the lower training index; vote ties go to the
    /// tied class whose member is nearest.
    pub fn predict(&self, queries: ArrayView2<f64>) -> Result<Vec<usize>> {
        if queries.ncols() != self.features.ncols() {
            return Err(Error::DimensionMismatch {
                context: "k-NN query features",
                expected: self.features.ncols(),
                found: queries.ncols(),
            });
        }
        Ok(queries
            .rows()
            .into_iter()
            .map(|q| self.predict_one(q))
            .collect())
    }

    fn predict_one(&self, query: ArrayView1<f64>) -> usize {
        let mut dist: Vec<(f64, usize)> = self
            .features
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                let d2 = row
                    .iter()
                    .zip(query)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
                (d2, i)
            })
            .collect();
        let by_distance =
            |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        let k = self.k_neighbors;
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, by_distance);
            dist.truncate(k);
        }
        dist.sort_unstable_by(by_distance);

        let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
        for &(_, i) in &dist {
            *votes.entry(self.labels[i]).or_default() += 1;
        }
        let top = votes.values().copied().max().unwrap_or(0);
        dist.iter()
            .map(|&(_, i)| self.labels[i])
            .find(|l| votes[l] == top)
            .expect("k >= 1")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use sparse_pca_testkit::{brute_knn, random_matrix};

    #[test]
    fn nearest_point_wins() {
        let m = KnnModel::fit(array![[0.0, 0.0], [1.0, 1.0]], vec![0, 1], 1).unwrap();
        assert_eq!(m.predict(array![[0.1, 0.0]].view()).unwrap(), vec![0]);
        assert_eq!(m.predict(array![[1.0, 1.0]].view()).unwrap(), vec![1]);
    }

    #[test]
    fn fit_checks_k() {
        let x = array![[0.0], [1.0]];
        let m = KnnModel::fit(x.clone(), vec![3, 4], 2).unwrap();
        assert_eq!(m.features(), &x);
        assert_eq!(m.labels(), &[3, 4]);
        assert!(KnnModel::fit(x.clone(), vec![3, 4], 3).is_err());
        assert!(KnnModel::fit(x, vec![3], 1).is_err());
    }

    #[test]
    fn distance_ties_prefer_lower_index() {
        let m = KnnModel::fit(array![[-1.0], [1.0]], vec![7, 2], 1).unwrap();
        assert_eq!(m.predict(array![[0.0]].view()).unwrap(), vec![7]);
    }

    #[test]
    fn vote_ties_go_to_nearest_class() {
        let m = KnnModel::fit(array![[0.0], [0.5], [3.0], [-2.0]], vec![1, 0, 1, 0], 4).unwrap();
        // Two votes each; nearest neighbour of 0.4 is index 1 (class 0).
        assert_eq!(m.predict(array![[0.4]].view()).unwrap(), vec![0]);
    }

    #[test]
    fn query_dimension_is_checked() {
        let m = KnnModel::fit(array![[0.0, 0.0]], vec![0], 1).unwrap();
        assert!(m.predict(array![[0.0]].view()).is_err());
    }

    #[test]
    fn training_set_is_reproduced_with_k1() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_matrix(&mut rng, 30, 4);
        let y: Vec<usize> = (0..30).map(|_| rng.random_range(0..5)).collect();
        let m = KnnModel::fit(x.clone(), y.clone(), 1).unwrap();
        assert_eq!(m.predict(x.view()).unwrap(), y);
    }

    #[test]
    fn matches_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let x = random_matrix(&mut rng, 50, 3);
            let y: Vec<usize> = (0..50).map(|_| rng.random_range(0..4)).collect();
            let q = random_matrix(&mut rng, 20, 3);
            for k in [1, 3, 5] {
                let m = KnnModel::fit(x.clone(), y.clone(), k).unwrap();
                assert_eq!(m.predict(q.view()).unwrap(), brute_knn(&x, &y, &q, k));
            }
        }
    }
}
