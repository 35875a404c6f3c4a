//! Reference routines for tests.
//!
//! Nothing here shares code with the `sparse-pca` crate: the eigensolver,
//! linear solver and nearest-neighbour search are deliberately naive
//! textbook versions that serve as independent oracles.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Frozen 8x8 PSD fixture (rounded `A Aᵀ / 12` for a Gaussian 8x12 `A`).
/// Eigenvalues ≈ 0.123, 0.174, 0.367, 0.613, 0.726, 1.481, 1.829, 1.924.
pub fn fixture_8x8() -> Array2<f64> {
    let rows: [[f64; 8]; 8] = [
        [
            0.8681, -0.0405, 0.0122, 0.4829, -0.0815, -0.1339, -0.1665, 0.0707,
        ],
        [
            -0.0405, 0.3815, 0.3437, -0.1223, -0.0044, -0.2254, 0.0630, 0.0307,
        ],
        [
            0.0122, 0.3437, 0.9656, -0.2329, -0.4554, -0.3806, 0.0078, 0.1529,
        ],
        [
            0.4829, -0.1223, -0.2329, 1.4366, 0.0112, -0.0587, -0.0113, 0.1078,
        ],
        [
            -0.0815, -0.0044, -0.4554, 0.0112, 1.1436, -0.1217, 0.2089, -0.3800,
        ],
        [
            -0.1339, -0.2254, -0.3806, -0.0587, -0.1217, 0.7929, -0.1093, 0.4002,
        ],
        [
            -0.1665, 0.0630, 0.0078, -0.0113, 0.2089, -0.1093, 0.6124, -0.4698,
        ],
        [
            0.0707, 0.0307, 0.1529, 0.1078, -0.3800, 0.4002, -0.4698, 1.0357,
        ],
    ];
    Array2::from_shape_fn((8, 8), |(i, j)| rows[i][j])
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues in descending order and the matching unit
/// eigenvectors as columns.
pub fn jacobi_eigen(m: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = Array2::<f64>::eye(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[[i, j]] * a[[i, j]];
                }
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[j, j]].partial_cmp(&a[[i, i]]).unwrap());
    let vals = order.iter().map(|&i| a[[i, i]]).collect();
    let vecs = Array2::from_shape_fn((n, n), |(r, c)| v[[r, order[c]]]);
    (vals, vecs)
}

/// Gaussian elimination with partial pivoting, solving `A X = B`.
pub fn gauss_solve(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let m = b.ncols();
    let mut aug = Array2::<f64>::zeros((n, n + m));
    for i in 0..n {
        for j in 0..n {
            aug[[i, j]] = a[[i, j]];
        }
        for j in 0..m {
            aug[[i, n + j]] = b[[i, j]];
        }
    }
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if aug[[r, col]].abs() > aug[[piv, col]].abs() {
                piv = r;
            }
        }
        if piv != col {
            for j in 0..(n + m) {
                aug.swap([col, j], [piv, j]);
            }
        }
        let d = aug[[col, col]];
        assert!(d.abs() > 1e-300, "singular matrix in oracle solve");
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = aug[[r, col]] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..(n + m) {
                aug[[r, j]] -= f * aug[[col, j]];
            }
        }
    }
    Array2::from_shape_fn((n, m), |(i, j)| aug[[i, n + j]] / aug[[i, i]])
}

/// Exhaustive k-NN: sort every training point by (squared distance, index),
/// then majority vote over the first `k`, breaking vote ties by whichever
/// tied class appears first in that order.
pub fn brute_knn(
    train: &Array2<f64>,
    labels: &[usize],
    queries: &Array2<f64>,
    k: usize,
) -> Vec<usize> {
    queries
        .rows()
        .into_iter()
        .map(|q| {
            let mut all: Vec<(f64, usize)> = train
                .rows()
                .into_iter()
                .enumerate()
                .map(|(i, t)| {
                    let d2: f64 = t.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                    (d2, i)
                })
                .collect();
            all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let nearest = &all[..k];
            let mut counts = std::collections::BTreeMap::new();
            for &(_, i) in nearest {
                *counts.entry(labels[i]).or_insert(0usize) += 1;
            }
            let top = *counts.values().max().unwrap();
            nearest
                .iter()
                .map(|&(_, i)| labels[i])
                .find(|l| counts[l] == top)
                .unwrap()
        })
        .collect()
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| StandardNormal.sample(rng))
}

pub fn random_vector<R: Rng>(rng: &mut R, len: usize) -> Array1<f64> {
    Array1::from_shape_fn(len, |_| StandardNormal.sample(rng))
}

/// `(A + Aᵀ) / 2` for Gaussian `A`; exactly symmetric.
pub fn random_symmetric<R: Rng>(rng: &mut R, d: usize) -> Array2<f64> {
    let a = random_matrix(rng, d, d);
    let mut s = Array2::zeros((d, d));
    for i in 0..d {
        for j in i..d {
            let v = 0.5 * (a[[i, j]] + a[[j, i]]);
            s[[i, j]] = v;
            s[[j, i]] = v;
        }
    }
    s
}

/// `A Aᵀ / d` for Gaussian `A`; exactly symmetric PSD.
pub fn random_psd<R: Rng>(rng: &mut R, d: usize) -> Array2<f64> {
    let a = random_matrix(rng, d, d);
    let mut s = Array2::zeros((d, d));
    for i in 0..d {
        for j in i..d {
            let v = (0..d).map(|k| a[[i, k]] * a[[j, k]]).sum::<f64>() / d as f64;
            s[[i, j]] = v;
            s[[j, i]] = v;
        }
    }
    s
}

/// Draws random PSD matrices until one has `λ₁ − λ₂ ≥ gap_ratio · λ₁`.
pub fn random_psd_with_gap<R: Rng>(rng: &mut R, d: usize, gap_ratio: f64) -> Array2<f64> {
    loop {
        let s = random_psd(rng, d);
        let (vals, _) = jacobi_eigen(&s);
        if vals[0] - vals[1] >= gap_ratio * vals[0] {
            return s;
        }
    }
}
