//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ndarray::{array, Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sparse_pca::bench::{
    extract_for_dataset, run_pipeline, run_pipeline_on, ClassifierKind, DatasetSource,
    ExperimentConfig, Prepared, ReportFormat,
};
use sparse_pca::classify::{accuracy, Kernel, KnnModel, KrrModel};
use sparse_pca::data::{synth_dataset, DatasetPair, SynthParams};
use sparse_pca::linalg::{project_unit_sphere, CovarianceMatrix, DataMatrix};
use sparse_pca::solvers::{
    deflate, extract_components, grad_potential, l1_norm, potential, solve_ista, solve_leapfrog,
    Constraint, LeapfrogScheme, Method, SolverConfig,
};
use sparse_pca_testkit::{
    brute_knn, fixture_8x8, gauss_solve, jacobi_eigen, random_matrix, random_psd,
    random_psd_with_gap, random_symmetric, random_vector,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(budget: Duration, start: Instant) -> Result<(), String> {
    let spent = start.elapsed();
    if spent <= budget {
        Ok(())
    } else {
        Err(format!("took {spent:.2?}, budget {budget:?}"))
    }
}

fn gradient_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    let mut instances = 0;
    for &d in &[2usize, 5, 10, 20] {
        for &lambda in &[0.0, 0.3, 2.0, 10.0] {
            for &delta in &[1e-2, 1e-3, 1e-4] {
                for _ in 0..3 {
                    let s = CovarianceMatrix::new(random_symmetric(&mut rng, d)).unwrap();
                    let x = random_vector(&mut rng, d);
                    let g = grad_potential(x.view(), &s, lambda, delta).unwrap();
                    for i in 0..d {
                        let h = 1e-6 * x[i].abs().max(1e-2);
                        let mut up = x.clone();
                        let mut down = x.clone();
                        up[i] += h;
                        down[i] -= h;
                        let v = |z: &Array1<f64>| potential(z.view(), &s, lambda, delta).unwrap();
                        let fd = (v(&up) - v(&down)) / (2.0 * h);
                        let rel = (g[i] - fd).abs() / g[i].abs().max(fd.abs()).max(1.0);
                        worst = worst.max(rel);
                    }
                    instances += 1;
                }
            }
        }
    }
    within(Duration::from_secs(5), start)?;
    check(
        instances >= 100 && worst <= 1e-5,
        format!("{instances} instances, worst relative error {worst:.2e}"),
    )
}

/// Largest |H − H₀| over `steps` literal leapfrog steps on
/// `V = ½(x₁² + 4x₂²)`.
fn harmonic_energy_drift(dt: f64, steps: usize) -> f64 {
    let omega2 = array![1.0, 4.0];
    let grad = |x: ndarray::ArrayView1<f64>| &x * &omega2;
    let energy = |x: &Array1<f64>, p: &Array1<f64>| 0.5 * p.dot(p) + 0.5 * (x * x).dot(&omega2);
    let scheme = LeapfrogScheme {
        dt,
        damping: 1.0,
        constraint: Constraint::Free,
    };
    let mut x = array![1.0, 0.5];
    let mut p = array![0.0, 1.0];
    let mut g = grad(x.view());
    let h0 = energy(&x, &p);
    let mut worst = 0.0_f64;
    for _ in 0..steps {
        let (x2, p2, g2) = scheme.step(x.view(), p.view(), g.view(), grad).unwrap();
        (x, p, g) = (x2, p2, g2);
        worst = worst.max((energy(&x, &p) - h0).abs());
    }
    worst
}

fn integrator_order() -> Outcome {
    let start = Instant::now();
    let coarse = harmonic_energy_drift(0.05, 10_000);
    let fine = harmonic_energy_drift(0.025, 10_000);
    within(Duration::from_secs(5), start)?;
    let ratio = coarse / fine;
    check(
        ratio >= 3.0,
        format!("max |ΔH| {coarse:.3e} at dt=0.05, {fine:.3e} at dt=0.025, ratio {ratio:.2}"),
    )
}

fn pca_reduction() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::INFINITY;
    for i in 0..20 {
        let m = random_psd_with_gap(&mut rng, 10, 0.1);
        let (_, vecs) = jacobi_eigen(&m);
        let top = vecs.column(0).to_owned();
        let s = CovarianceMatrix::new(m).unwrap();
        let config = SolverConfig {
            lambda: 0.0,
            delta: 1e-4,
            seed: 100 + i,
            ..SolverConfig::default()
        };
        let (xl, _) =
            solve_leapfrog(&s, &config).map_err(|e| format!("leapfrog on matrix {i}: {e}"))?;
        let (xi, _) = solve_ista(&s, &config).map_err(|e| format!("ista on matrix {i}: {e}"))?;
        worst = worst
            .min(xl.view().dot(&top).abs())
            .min(xi.view().dot(&top).abs());
    }
    within(Duration::from_secs(30), start)?;
    check(
        worst >= 0.999,
        format!("20 matrices, smallest |cos| {worst:.6}"),
    )
}

fn deflation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_trace = 0.0_f64;
    let mut worst_residual = 0.0_f64;
    let config = SolverConfig {
        max_iter: 1_000_000,
        x_tol: 1e-12,
        seed: 9,
        ..SolverConfig::default()
    };
    for _ in 0..10 {
        let s = CovarianceMatrix::new(random_psd(&mut rng, 8)).unwrap();
        let trace = s.trace();
        let loadings =
            extract_components(&s, 8, Method::Pca, &config).map_err(|e| e.to_string())?;
        let total: f64 = loadings.explained().iter().sum();
        worst_trace = worst_trace.max((total - trace).abs() / trace);
        let mut current = s.clone();
        for j in 0..8 {
            let x = project_unit_sphere(loadings.column(j)).unwrap();
            current = deflate(&current, &x).unwrap();
            worst_residual = worst_residual.max(current.quadratic_form(x.view()) / trace);
        }
    }
    check(
        worst_trace <= 1e-6 && worst_residual <= 1e-8,
        format!("worst trace error {worst_trace:.2e}, worst xᵀS′x/trace {worst_residual:.2e}"),
    )
}

fn sparsity_response() -> Outcome {
    let s = CovarianceMatrix::new(fixture_8x8()).unwrap();
    let mut summary = Vec::new();
    for method in [Method::Ista, Method::Leapfrog] {
        let mut norms = Vec::new();
        let mut large_at_10 = 0;
        for lambda in [0.0, 0.1, 1.0, 10.0] {
            let config = SolverConfig {
                lambda,
                seed: 5,
                ..SolverConfig::default()
            };
            let x = match method {
                Method::Ista => solve_ista(&s, &config).map(|r| r.0),
                _ => solve_leapfrog(&s, &config).map(|r| r.0),
            }
            .map_err(|e| format!("{method} at λ={lambda}: {e}"))?;
            norms.push(l1_norm(x.view()));
            if lambda == 10.0 {
                large_at_10 = x.view().iter().filter(|v| v.abs() > 0.5).count();
            }
        }
        let monotone = norms.windows(2).all(|w| w[1] <= w[0] + 1e-9);
        let line = format!(
            "{method}: ‖x‖₁ = {:?}, {large_at_10} coordinate(s) above 0.5 at λ=10",
            norms.iter().map(|n| format!("{n:.4}")).collect::<Vec<_>>()
        );
        if !monotone || large_at_10 > 1 {
            return Err(line);
        }
        summary.push(line);
    }
    Ok(summary.join("; "))
}

fn classifier_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut knn_cases = 0;
    for _ in 0..20 {
        let train = random_matrix(&mut rng, 50, 4);
        let labels: Vec<usize> = (0..50).map(|_| rng.random_range(0..4)).collect();
        let queries = random_matrix(&mut rng, 15, 4);
        for k in [1, 3, 5] {
            let model = KnnModel::fit(train.clone(), labels.clone(), k).unwrap();
            let got = model.predict(queries.view()).unwrap();
            if got != brute_knn(&train, &labels, &queries, k) {
                return Err(format!(
                    "k-NN disagrees with the exhaustive oracle at k={k}"
                ));
            }
            knn_cases += 1;
        }
    }

    let mut worst_residual = 0.0_f64;
    for case in 0..20 {
        let n = 30;
        let train = random_matrix(&mut rng, n, 5);
        let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let queries = random_matrix(&mut rng, 10, 5);
        let kernel = if case % 2 == 0 {
            Kernel::Rbf { bandwidth: 2.0 }
        } else {
            Kernel::Linear
        };
        let ridge = 1e-2;
        let model =
            KrrModel::fit(train.clone(), &labels, kernel, ridge).map_err(|e| e.to_string())?;
        worst_residual = worst_residual.max(model.residual());

        let mut system = kernel.matrix(train.view(), train.view());
        system.diag_mut().mapv_inplace(|v| v + ridge);
        let mut targets = Array2::zeros((n, 3));
        for (i, &l) in labels.iter().enumerate() {
            targets[[i, l]] = 1.0;
        }
        let weights = gauss_solve(&system, &targets);
        let scores = kernel.matrix(queries.view(), train.view()).dot(&weights);
        let oracle: Vec<usize> = scores
            .axis_iter(Axis(0))
            .map(|row| {
                let mut best = 0;
                for c in 1..row.len() {
                    if row[c] > row[best] {
                        best = c;
                    }
                }
                best
            })
            .collect();
        if model.predict(queries.view()).unwrap() != oracle {
            return Err(format!(
                "KRR case {case} disagrees with the linear-solve oracle"
            ));
        }
    }
    check(
        worst_residual <= 1e-8,
        format!("{knn_cases} k-NN cases match; 20 KRR fits, worst residual {worst_residual:.2e}"),
    )
}

fn accuracy_metric() -> Outcome {
    let got = [
        accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(),
        accuracy(&[1, 2, 3, 0, 0], &[1, 2, 3, 4, 4]).unwrap(),
        accuracy(&[0, 0], &[1, 1]).unwrap(),
    ];
    check(got == [1.0, 0.6, 0.0], format!("Q = {got:?}"))
}

/// Accuracies observed on the frozen fixture when this test was written;
/// they catch silent numerical drift.
const PINNED_PCA_1NN: f64 = 1.0;
const PINNED_LEAPFROG_1NN: f64 = 1.0;

fn directional_claim() -> Outcome {
    let start = Instant::now();
    let config = ExperimentConfig {
        seed: Some(42),
        methods: vec![Method::Pca, Method::Leapfrog],
        dims: vec![20],
        classifiers: vec![ClassifierKind::Knn],
        timings: false,
        dataset: DatasetSource::Synth(SynthParams::default()),
        ..ExperimentConfig::default()
    };
    let report = run_pipeline(&config).map_err(|e| e.to_string())?;
    within(Duration::from_secs(120), start)?;
    let q = |m: Method| {
        report
            .rows
            .iter()
            .find(|r| r.method == m)
            .and_then(|r| r.accuracy)
            .ok_or_else(|| format!("{m} cell failed"))
    };
    let (pca, leap) = (q(Method::Pca)?, q(Method::Leapfrog)?);
    let detail = format!(
        "PCA+1NN {pca:.4}, leapfrog+1NN {leap:.4}, margin {:+.4} (pinned {PINNED_PCA_1NN:.4} / {PINNED_LEAPFROG_1NN:.4})",
        leap - pca
    );
    check(
        leap >= pca - 0.02 && pca == PINNED_PCA_1NN && leap == PINNED_LEAPFROG_1NN,
        detail,
    )
}

fn small_grid_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        seed: Some(seed),
        timings: false,
        dataset: DatasetSource::Synth(SynthParams {
            classes: 10,
            per_class_train: 7,
            per_class_test: 2,
            dim: 64,
            support: 6,
            noise_sigma: 0.5,
            seed: 3,
        }),
        ..ExperimentConfig::default()
    }
}

fn pipeline_shape() -> Outcome {
    let config = small_grid_config(7);
    let first = run_pipeline(&config).map_err(|e| e.to_string())?;
    let second = run_pipeline(&config).map_err(|e| e.to_string())?;
    let a = first.render(ReportFormat::Csv).map_err(|e| e.to_string())?;
    let b = second
        .render(ReportFormat::Csv)
        .map_err(|e| e.to_string())?;
    let per = |c: ClassifierKind| first.rows.iter().filter(|r| r.classifier == c).count();
    let (knn, krr) = (per(ClassifierKind::Knn), per(ClassifierKind::Krr));
    check(
        first.rows.len() == 30 && knn == 15 && krr == 15 && a == b,
        format!(
            "{} rows ({knn} k-NN, {krr} KRR), CSV runs identical: {}",
            first.rows.len(),
            a == b
        ),
    )
}

fn zero_test_features(pair: &DatasetPair) -> DatasetPair {
    let zeros = Array2::zeros(pair.test.values().raw_dim());
    let test = DataMatrix::new(zeros, Some(pair.test_labels().to_vec())).unwrap();
    DatasetPair::new(pair.train.clone(), test, "zeroed").unwrap()
}

fn no_leakage() -> Outcome {
    let config = small_grid_config(8);
    let DatasetSource::Synth(params) = &config.dataset else {
        unreachable!()
    };
    let pair = synth_dataset(params).unwrap();
    let zeroed = zero_test_features(&pair);
    let bits = |m: &Array2<f64>| m.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    for method in Method::ALL {
        let a = extract_for_dataset(&pair, &config, method, 20).map_err(|e| e.to_string())?;
        let b = extract_for_dataset(&zeroed, &config, method, 20).map_err(|e| e.to_string())?;
        if bits(a.matrix()) != bits(b.matrix()) {
            return Err(format!("{method} loadings changed"));
        }
    }
    let (p, z) = (
        Prepared::new(&pair).unwrap(),
        Prepared::new(&zeroed).unwrap(),
    );
    if bits(&p.mean.clone().insert_axis(Axis(0))) != bits(&z.mean.clone().insert_axis(Axis(0)))
        || bits(p.covariance.values()) != bits(z.covariance.values())
    {
        return Err("training mean or covariance changed".into());
    }
    // The grid itself must still run on the zeroed split.
    let mut grid = config.clone();
    grid.dims = vec![20];
    run_pipeline_on(&zeroed, &grid).map_err(|e| e.to_string())?;
    Ok("loadings, means and covariance bitwise identical for pca, ista, leapfrog".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("gradient matches finite differences", gradient_oracle),
        ("leapfrog energy error is second order", integrator_order),
        ("lambda = 0 recovers the top eigenvector", pca_reduction),
        ("deflation exhausts the trace", deflation),
        ("L1 norm shrinks as lambda grows", sparsity_response),
        ("classifiers match their oracles", classifier_oracles),
        ("accuracy metric", accuracy_metric),
        (
            "leapfrog sparse PCA is not worse than PCA",
            directional_claim,
        ),
        ("default grid shape and determinism", pipeline_shape),
        ("test data does not leak into fitting", no_leakage),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!(
                "PASS criterion {:>2}: {name} ({elapsed:.2?}): {detail}",
                i + 1
            ),
            Err(detail) => {
                failures += 1;
                println!(
                    "FAIL criterion {:>2}: {name} ({elapsed:.2?}): {detail}",
                    i + 1
                );
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn panic_message(payload: &Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "non-string panic".into())
}
