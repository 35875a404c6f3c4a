use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::config::{LoadingsMatrix, SolverConfig};
use super::{solve_ista, solve_leapfrog};
use crate::error::{Error, Result};
use crate::linalg::{power_iteration, CovarianceMatrix, DataMatrix, UnitVector};
use crate::seed::derive_seed;

/// Component extractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pca,
    Ista,
    Leapfrog,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Pca, Method::Ista, Method::Leapfrog];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Pca => "pca",
            Method::Ista => "ista",
            Method::Leapfrog => "leapfrog",
        }
    }

    pub fn is_sparse(self) -> bool {
        !matches!(self, Method::Pca)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pca" => Ok(Method::Pca),
            "ista" => Ok(Method::Ista),
            "leapfrog" => Ok(Method::Leapfrog),
            other => Err(Error::InvalidConfig(format!(
                "unknown method {other:?} (expected pca, ista or leapfrog)"
            ))),
        }
    }
}

/// Hotelling deflation `S − (xᵀSx) x xᵀ`, re-symmetrized.
pub fn deflate(s: &CovarianceMatrix, x: &UnitVector) -> Result<CovarianceMatrix> {
    let d = s.dim();
    if x.dim() != d {
        return Err(Error::DimensionMismatch {
            context: "deflation vector",
            expected: d,
            found: x.dim(),
        });
    }
    let xv = x.as_array();
    let explained = s.quadratic_form(x.view());
    let m = s.values();
    let mut out = Array2::zeros((d, d));
    for i in 0..d {
        for j in i..d {
            let a = m[[i, j]] - explained * xv[i] * xv[j];
            let b = m[[j, i]] - explained * xv[j] * xv[i];
            let v = 0.5 * (a + b);
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    Ok(CovarianceMatrix::from_symmetric(out))
}

/// Extracts `k` components one at a time, deflating `S` after each.
///
/// Component `j` runs its solver with a seed derived from `(config.seed, j)`,
/// so the first `m` columns for `k` equal the result for `m`.
/// For [`Method::Pca`] the solver is power iteration with residual tolerance
/// `config.x_tol` and λ is ignored.
pub fn extract_components(
    s: &CovarianceMatrix,
    k: usize,
    method: Method,
    config: &SolverConfig,
) -> Result<LoadingsMatrix> {
    let run = extract_progressive(s, k, method, config, |_| {})?;
    match run.failure {
        Some(e) => Err(e),
        None => LoadingsMatrix::from_components(&run.components, run.explained),
    }
}

/// Components found before the first failure, if any.
#[derive(Debug)]
pub(crate) struct Progress {
    pub components: Vec<UnitVector>,
    pub explained: Vec<f64>,
    pub failure: Option<Error>,
}

/// Like [`extract_components`] but keeps what was found before a solver
/// failure. `on_component` is called with the index of each finished
/// component. Argument errors are still returned as `Err`.
pub(crate) fn extract_progressive(
    s: &CovarianceMatrix,
    k: usize,
    method: Method,
    config: &SolverConfig,
    mut on_component: impl FnMut(usize),
) -> Result<Progress> {
    if k == 0 || k > s.dim() {
        return Err(Error::InvalidConfig(format!(
            "component count must be in 1..={}, got {k}",
            s.dim()
        )));
    }
    config.validate()?;
    let mut current = s.clone();
    let mut progress = Progress {
        components: Vec::with_capacity(k),
        explained: Vec::with_capacity(k),
        failure: None,
    };
    for j in 0..k {
        let cfg = SolverConfig {
            seed: derive_seed(config.seed, j as u64),
            ..config.clone()
        };
        let solved = match method {
            Method::Pca => {
                power_iteration(&current, cfg.seed, cfg.max_iter, cfg.x_tol).map(|(v, _)| v)
            }
            Method::Ista => solve_ista(&current, &cfg).map(|(v, _)| v),
            Method::Leapfrog => solve_leapfrog(&current, &cfg).map(|(v, _)| v),
        };
        let x = match solved {
            Ok(x) => x,
            Err(e) => {
                progress.failure = Some(Error::Component {
                    index: j,
                    source: Box::new(e),
                });
                break;
            }
        };
        progress.explained.push(current.quadratic_form(x.view()));
        current = deflate(&current, &x)?;
        progress.components.push(x);
        on_component(j);
    }
    Ok(progress)
}

/// `(X − 1·meanᵀ) W`, keeping labels.
pub fn transform(
    data: &DataMatrix,
    mean: &Array1<f64>,
    loadings: &LoadingsMatrix,
) -> Result<DataMatrix> {
    let d = data.n_features();
    if mean.len() != d {
        return Err(Error::DimensionMismatch {
            context: "mean vector",
            expected: d,
            found: mean.len(),
        });
    }
    if loadings.dim() != d {
        return Err(Error::DimensionMismatch {
            context: "loadings rows",
            expected: d,
            found: loadings.dim(),
        });
    }
    let centered = data.values() - mean;
    data.with_values(centered.dot(loadings.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::project_unit_sphere;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use sparse_pca_testkit::{
        jacobi_eigen, random_matrix, random_psd, random_symmetric, random_vector,
    };

    #[test]
    fn deflate_diagonal() {
        let s = CovarianceMatrix::new(array![[3.0, 0.0], [0.0, 1.0]]).unwrap();
        let out = deflate(&s, &UnitVector::basis(2, 0)).unwrap();
        assert_eq!(out.values(), &array![[0.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn deflated_direction_has_no_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let s = CovarianceMatrix::new(random_symmetric(&mut rng, 7)).unwrap();
            let x = project_unit_sphere(random_vector(&mut rng, 7).view()).unwrap();
            let out = deflate(&s, &x).unwrap();
            let scale = s.values().diag().mapv(f64::abs).sum().max(1.0);
            assert!(out.quadratic_form(x.view()).abs() <= 1e-8 * scale);
            assert_eq!(out.values(), &out.values().t());
        }
    }

    #[test]
    fn deflation_by_eigenvector_preserves_other_eigenpairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_psd(&mut rng, 6);
        let (vals, vecs) = jacobi_eigen(&m);
        let s = CovarianceMatrix::new(m).unwrap();
        let top = UnitVector::new(vecs.column(0).to_owned()).unwrap();
        let out = deflate(&s, &top).unwrap();
        for (k, &val) in vals.iter().enumerate().skip(1) {
            let v = vecs.column(k);
            let r = out.apply(v) - val * &v;
            assert!(r.iter().all(|e| e.abs() < 1e-10));
        }
        let (after, _) = jacobi_eigen(out.values());
        let mut expected: Vec<f64> = vals[1..].to_vec();
        expected.push(0.0);
        expected.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (a, e) in after.iter().zip(&expected) {
            assert!((a - e).abs() < 1e-10);
        }
    }

    #[test]
    fn pca_picks_coordinate_axes_on_diagonal() {
        let s = CovarianceMatrix::new(Array2::from_diag(&array![3.0, 2.0, 1.0])).unwrap();
        let w = extract_components(&s, 2, Method::Pca, &SolverConfig::default()).unwrap();
        assert!((w.column(0)[0].abs() - 1.0).abs() < 1e-9);
        assert!((w.column(1)[1].abs() - 1.0).abs() < 1e-9);
        assert!((w.explained()[0] - 3.0).abs() < 1e-9);
        assert!((w.explained()[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn pca_full_extraction_recovers_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let s = CovarianceMatrix::new(random_psd(&mut rng, 6)).unwrap();
        let cfg = SolverConfig {
            x_tol: 1e-10,
            max_iter: 200_000,
            ..SolverConfig::default()
        };
        let w = extract_components(&s, 6, Method::Pca, &cfg).unwrap();
        let total: f64 = w.explained().iter().sum();
        assert!((total - s.trace()).abs() <= 1e-6 * s.trace());
    }

    #[test]
    fn leapfrog_without_penalty_agrees_with_pca() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = loop {
            let m = random_psd(&mut rng, 6);
            let (vals, _) = jacobi_eigen(&m);
            if (0..3).all(|k| vals[k] - vals[k + 1] >= 0.1 * vals[0]) {
                break CovarianceMatrix::new(m).unwrap();
            }
        };
        let cfg = SolverConfig {
            max_iter: 20_000,
            x_tol: 1e-9,
            ..SolverConfig::default()
        };
        let pca = extract_components(&s, 3, Method::Pca, &cfg).unwrap();
        let lf = extract_components(&s, 3, Method::Leapfrog, &cfg).unwrap();
        for j in 0..3 {
            let cos = pca.column(j).dot(&lf.column(j)).abs();
            assert!(cos >= 0.99, "component {j}: cos = {cos}");
        }
    }

    #[test]
    fn component_count_is_validated() {
        let s = CovarianceMatrix::new(Array2::eye(3)).unwrap();
        assert!(extract_components(&s, 0, Method::Pca, &SolverConfig::default()).is_err());
        assert!(extract_components(&s, 4, Method::Pca, &SolverConfig::default()).is_err());
    }

    #[test]
    fn solver_errors_carry_component_index() {
        let s = CovarianceMatrix::new(Array2::from_diag(&array![3.0, 2.9])).unwrap();
        let cfg = SolverConfig {
            max_iter: 1,
            x_tol: 1e-15,
            ..SolverConfig::default()
        };
        match extract_components(&s, 2, Method::Pca, &cfg) {
            Err(Error::Component { index: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn transform_cases() {
        let data = DataMatrix::new(array![[1.0, 2.0], [3.0, -1.0]], Some(vec![0, 1])).unwrap();
        let ident = LoadingsMatrix::new(Array2::eye(2), vec![1.0, 1.0]).unwrap();
        let out = transform(&data, &Array1::zeros(2), &ident).unwrap();
        assert_eq!(out, data);

        let e1 = LoadingsMatrix::new(array![[1.0], [0.0]], vec![1.0]).unwrap();
        let mean = array![2.0, 0.5];
        let out = transform(&data, &mean, &e1).unwrap();
        assert_eq!(out.values(), &array![[-1.0], [1.0]]);
        assert_eq!(out.labels(), Some(&[0usize, 1][..]));
    }

    #[test]
    fn transform_matches_entrywise_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = random_matrix(&mut rng, 7, 5);
        let mean = random_vector(&mut rng, 5);
        let comps: Vec<UnitVector> = (0..3)
            .map(|_| project_unit_sphere(random_vector(&mut rng, 5).view()).unwrap())
            .collect();
        let w = LoadingsMatrix::from_components(&comps, vec![0.0; 3]).unwrap();
        let out = transform(&DataMatrix::unlabeled(x.clone()).unwrap(), &mean, &w).unwrap();
        for i in 0..7 {
            for k in 0..3 {
                let mut acc = 0.0;
                for j in 0..5 {
                    acc += (x[[i, j]] - mean[j]) * w.matrix()[[j, k]];
                }
                assert!((out.values()[[i, k]] - acc).abs() <= 1e-12);
            }
        }
    }
}
