//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.
//! Tolerances and runtime budgets are pinned in the assertions.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use smbo::data::Dataset;
use smbo::evaluation::{
    cv_loss, external_evaluate, kfold_indices, split_train_val, validation_loss, EvalError,
    EvalRecord, EvalStatus, ExternalCommand, FnObjective, Objective, SplitSpec, Trainer,
};
use smbo::mlp::{loss_cce, MlpConfig, MlpObjective, Mode, Network};
use smbo::space::{Config, ParamSpec, SearchSpace};
use smbo::surrogate::{
    aggregate_rows, correlation, expected_improvement, kriging_fit, neg_log_likelihood, DimType,
    FitControl, KrigingModel, NuggetMode, Prediction,
};
use smbo::tuner::{random_search, tune, ControlConfig, TunerResult};

fn scripts_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scripts")
        .canonicalize()
        .expect("bundled scripts directory")
}

fn pass(criterion: &str, detail: String) {
    println!("[PASS] {criterion}: {detail}");
}

// ───────────────────────── criterion 1 ─────────────────────────

#[test]
fn criterion_01_kriging_interpolation() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_residual = 0.0f64;
    let mut worst_variance = 0.0f64;
    for instance in 0..20 {
        let d = 1 + instance % 4;
        let n = 4 + (instance * 7) % 7; // 4..=10
        // Unit-cube points with a minimum separation so the nugget-free
        // correlation matrix stays well conditioned.
        let mut points: Vec<Vec<f64>> = Vec::new();
        while points.len() < n {
            let p: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let min_dist = points
                .iter()
                .map(|q| {
                    p.iter()
                        .zip(q)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            if min_dist > 0.05 {
                points.push(p);
            }
        }
        let y: Vec<f64> = points
            .iter()
            .map(|p| {
                let s: f64 = p.iter().sum();
                (3.0 * s).sin() + 0.5 * (5.0 * p[0]).cos()
            })
            .collect();
        let range = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - y.iter().cloned().fold(f64::INFINITY, f64::min);
        let model = kriging_fit(
            points.clone(),
            y.clone(),
            vec![DimType::Numeric; d],
            &FitControl {
                nugget: NuggetMode::Fixed(0.0),
                seed: instance as u64,
                ..FitControl::default()
            },
        )
        .expect("interpolation fit");
        for (p, &yi) in points.iter().zip(&y) {
            let pred = model.predict(p).unwrap();
            let residual = (pred.mean - yi).abs();
            assert!(
                residual <= 1e-6 * range,
                "instance {instance}: |{} - {yi}| = {residual} > 1e-6 * {range}",
                pred.mean
            );
            assert!(
                pred.variance <= 1e-8 * model.sigma2,
                "instance {instance}: variance {} > 1e-8 * {}",
                pred.variance,
                model.sigma2
            );
            worst_residual = worst_residual.max(residual / range);
            worst_variance = worst_variance.max(pred.variance / model.sigma2);
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    pass(
        "criterion 1 (kriging interpolation)",
        format!(
            "20 instances; worst residual {worst_residual:.2e} of range, worst variance {worst_variance:.2e} of sigma2, {elapsed:?}"
        ),
    );
}

// ───────────────────────── criterion 2 ─────────────────────────

#[test]
fn criterion_02_ei_matches_monte_carlo() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let y_min = 0.25;
    let mut triples: Vec<(f64, f64)> = Vec::new(); // (mean, s)
    for &offset in &[-2.0, -1.0, -0.5, 0.0, 0.5, 1.0] {
        for &s in &[0.25, 0.5, 1.0, 1.5] {
            triples.push((y_min + offset, s));
        }
    }
    // The zero-spread case: a point mass at or above the incumbent carries no
    // improvement, matching the s = 0 convention of the closed form.
    triples.push((y_min + 1.0, 0.0));
    assert_eq!(triples.len(), 25);

    let draws = 1_000_000usize;
    let mut worst_gap = 0.0f64;
    for &(mean, s) in &triples {
        let closed = expected_improvement(
            &Prediction {
                mean,
                variance: s * s,
            },
            y_min,
        );
        let mc = if s == 0.0 {
            (y_min - mean).max(0.0) // degenerate normal
        } else {
            // Stratified normal draws: one exact N(0,1) sample per
            // probability stratum. Unbiased, and the within-stratum jitter
            // keeps it a genuine Monte-Carlo estimate while the
            // stratification removes nearly all sampling noise.
            let normal = statrs::distribution::Normal::new(0.0, 1.0).unwrap();
            let mut total = 0.0;
            for i in 0..draws {
                let u = (i as f64 + rng.random::<f64>()) / draws as f64;
                let z = statrs::distribution::ContinuousCDF::inverse_cdf(&normal, u);
                total += (y_min - (mean + s * z)).max(0.0);
            }
            total / draws as f64
        };
        let gap = (closed - mc).abs();
        assert!(
            gap < 1e-3,
            "EI({mean}, {s}) = {closed} vs Monte-Carlo {mc}: |gap| = {gap}"
        );
        worst_gap = worst_gap.max(gap);
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    pass(
        "criterion 2 (EI vs Monte-Carlo)",
        format!("25 triples x 10^6 draws; worst |gap| {worst_gap:.2e}, {elapsed:?}"),
    );
}

// ───────────────────────── criterion 3 ─────────────────────────

mod dense_oracle {
    //! Direct-inverse reference implementation, independent of the
    //! Cholesky-based production path.
    use smbo::surrogate::{correlation, DimType, Prediction};

    pub fn invert(a: &[f64], n: usize) -> Vec<f64> {
        let mut aug = vec![0.0; n * 2 * n];
        for i in 0..n {
            for j in 0..n {
                aug[i * 2 * n + j] = a[i * n + j];
            }
            aug[i * 2 * n + n + i] = 1.0;
        }
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| {
                    aug[x * 2 * n + col]
                        .abs()
                        .partial_cmp(&aug[y * 2 * n + col].abs())
                        .unwrap()
                })
                .unwrap();
            for j in 0..2 * n {
                aug.swap(col * 2 * n + j, pivot * 2 * n + j);
            }
            let p = aug[col * 2 * n + col];
            for j in 0..2 * n {
                aug[col * 2 * n + j] /= p;
            }
            for i in 0..n {
                if i != col {
                    let f = aug[i * 2 * n + col];
                    for j in 0..2 * n {
                        aug[i * 2 * n + j] -= f * aug[col * 2 * n + j];
                    }
                }
            }
        }
        let mut inv = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                inv[i * n + j] = aug[i * 2 * n + n + j];
            }
        }
        inv
    }

    pub fn determinant(a: &[f64], n: usize) -> f64 {
        let mut m = a.to_vec();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| {
                    m[x * n + col].abs().partial_cmp(&m[y * n + col].abs()).unwrap()
                })
                .unwrap();
            if pivot != col {
                for j in 0..n {
                    m.swap(col * n + j, pivot * n + j);
                }
                det = -det;
            }
            let p = m[col * n + col];
            det *= p;
            for i in (col + 1)..n {
                let f = m[i * n + col] / p;
                for j in col..n {
                    m[i * n + j] -= f * m[col * n + j];
                }
            }
        }
        det
    }

    pub struct Dense {
        pub nll: f64,
        pub predict: Box<dyn Fn(&[f64]) -> Prediction>,
    }

    pub fn build(
        theta: Vec<f64>,
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
        types: Vec<DimType>,
        nugget: f64,
    ) -> Dense {
        let n = x.len();
        let mut r = vec![0.0; n * n];
        for i in 0..n {
            r[i * n + i] = 1.0 + nugget;
            for j in 0..i {
                let c = correlation(&x[i], &x[j], &theta, &types);
                r[i * n + j] = c;
                r[j * n + i] = c;
            }
        }
        let rinv = invert(&r, n);
        let matvec = move |m: &[f64], v: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| (0..n).map(|j| m[i * n + j] * v[j]).sum())
                .collect()
        };
        let ones = vec![1.0; n];
        let rinv_y = matvec(&rinv, &y);
        let rinv_one = matvec(&rinv, &ones);
        let one_rinv_one: f64 = rinv_one.iter().sum();
        let mu = rinv_y.iter().sum::<f64>() / one_rinv_one;
        let centered: Vec<f64> = y.iter().map(|v| v - mu).collect();
        let rinv_c = matvec(&rinv, &centered);
        let sigma2 = (centered.iter().zip(&rinv_c).map(|(a, b)| a * b).sum::<f64>()
            / n as f64)
            .max(1e-12);
        let nll = 0.5 * (n as f64 * sigma2.ln() + determinant(&r, n).ln());
        let predict = Box::new(move |query: &[f64]| {
            let r_vec: Vec<f64> = x
                .iter()
                .map(|row| correlation(query, row, &theta, &types))
                .collect();
            let rinv_r = matvec(&rinv, &r_vec);
            let mean = mu + r_vec.iter().zip(&rinv_c).map(|(a, b)| a * b).sum::<f64>();
            let r_rinv_r: f64 = r_vec.iter().zip(&rinv_r).map(|(a, b)| a * b).sum();
            let one_rinv_r: f64 = rinv_r.iter().sum();
            let correction = (1.0 - one_rinv_r) * (1.0 - one_rinv_r) / one_rinv_one;
            Prediction {
                mean,
                variance: (sigma2 * (1.0 - r_rinv_r + correction)).max(0.0),
            }
        });
        Dense { nll, predict }
    }
}

/// Smallest Cholesky diagonal of the regularized correlation matrix; a
/// direct conditioning probe for instance generation.
fn smallest_cholesky_pivot(x: &[Vec<f64>], theta: &[f64], types: &[DimType], nugget: f64) -> f64 {
    let n = x.len();
    let mut r = vec![0.0; n * n];
    for i in 0..n {
        r[i * n + i] = 1.0 + nugget;
        for j in 0..i {
            let c = correlation(&x[i], &x[j], theta, types);
            r[i * n + j] = c;
            r[j * n + i] = c;
        }
    }
    let mut l = vec![0.0; n * n];
    let mut smallest = f64::INFINITY;
    for i in 0..n {
        for j in 0..=i {
            let mut sum = r[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return 0.0;
                }
                l[i * n + i] = sum.sqrt();
                smallest = smallest.min(l[i * n + i]);
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    smallest
}

#[test]
fn criterion_03_surrogate_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for instance in 0..12 {
        let d = 1 + instance % 3;
        let n = 3 + instance % 6; // 3..=8
        // Factor dimensions only alongside numeric ones: with d = 1 a factor
        // kernel maps several points onto the same level and the correlation
        // matrix degenerates, which legitimate use prevents by aggregating
        // duplicate rows before fitting.
        let types: Vec<DimType> = (0..d)
            .map(|j| {
                if instance % 4 == 3 && j == 0 && d > 1 {
                    DimType::Factor { levels: 3 }
                } else {
                    DimType::Numeric
                }
            })
            .collect();
        // Separated points and moderate correlation lengths keep both linear
        // algebra routes comparable at the 1e-8 scale; a near-singular matrix
        // would degrade the oracle as much as the implementation.
        let mut x: Vec<Vec<f64>> = Vec::new();
        while x.len() < n {
            let p: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let min_dist = x
                .iter()
                .map(|q| {
                    p.iter()
                        .zip(q)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            if min_dist > 0.08 {
                x.push(p);
            }
        }
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let mut theta: Vec<f64> =
            (0..d).map(|_| 10f64.powf(rng.random_range(0.0..1.5))).collect();
        let nugget = 1e-6;
        // Grow theta until the correlation matrix is comfortably conditioned;
        // a 1e-8 agreement check is meaningless when both routes sit on a
        // nearly singular system.
        while smallest_cholesky_pivot(&x, &theta, &types, nugget) < 0.05 {
            for t in theta.iter_mut() {
                *t *= 1.5;
            }
        }

        let fast_nll = neg_log_likelihood(&theta, &x, &y, &types, nugget);
        let dense = dense_oracle::build(theta.clone(), x.clone(), y.clone(), types.clone(), nugget);
        let gap = (fast_nll - dense.nll).abs();
        assert!(gap < 1e-8, "instance {instance}: NLL {fast_nll} vs {}", dense.nll);
        worst = worst.max(gap);

        let model =
            KrigingModel::from_parameters(x.clone(), y.clone(), types.clone(), theta, nugget)
                .unwrap();
        for _ in 0..5 {
            let q: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let fast = model.predict(&q).unwrap();
            let slow = (dense.predict)(&q);
            let mean_gap = (fast.mean - slow.mean).abs();
            let var_gap = (fast.variance - slow.variance).abs();
            assert!(
                mean_gap < 1e-8 && var_gap < 1e-8,
                "instance {instance} (d={d}, n={n}, theta={:?}): mean gap {mean_gap:.3e}, var gap {var_gap:.3e}",
                model.theta
            );
            worst = worst.max(mean_gap).max(var_gap);
        }
    }
    pass(
        "criterion 3 (surrogate vs dense oracle)",
        format!("12 instances, n <= 8; worst |gap| {worst:.2e}"),
    );
}

// ───────────────────────── criterion 4 ─────────────────────────

#[test]
fn criterion_04_mlp_gradient_check() {
    let started = Instant::now();
    let config = MlpConfig {
        dropout1: 0.0,
        dropout2: 0.0,
        units1: 8,
        units2: 6,
        ..MlpConfig::default()
    };
    let net = Network::with_classes(64, &config, 10, 404);
    let mut rng = ChaCha8Rng::seed_from_u64(405);
    let batch_rows = 10;
    let batch: Vec<f64> = (0..batch_rows * 64).map(|_| rng.random::<f64>()).collect();
    let mut labels = vec![0.0; batch_rows * 10];
    for i in 0..batch_rows {
        labels[i * 10 + (i * 3) % 10] = 1.0;
    }

    let loss_at = |net: &Network| {
        let cache = net.forward(&batch, Mode::Infer, 0).unwrap();
        loss_cce(&cache.probabilities, &labels, 10)
    };
    let cache = net.forward(&batch, Mode::Infer, 0).unwrap();
    let grads = net.backward(&cache, &labels);

    let step = 1e-5;
    let tensor_names = ["w1", "b1", "w2", "b2", "w3", "b3"];
    let tensors: [(&[f64], fn(&mut Network) -> &mut Vec<f64>); 6] = [
        (&grads.w1, |n| &mut n.layer1.w),
        (&grads.b1, |n| &mut n.layer1.b),
        (&grads.w2, |n| &mut n.layer2.w),
        (&grads.b2, |n| &mut n.layer2.b),
        (&grads.w3, |n| &mut n.output.w),
        (&grads.b3, |n| &mut n.output.b),
    ];
    let mut worst = 0.0f64;
    for (name, (analytic, access)) in tensor_names.iter().zip(tensors) {
        let mut fd = vec![0.0; analytic.len()];
        for i in 0..analytic.len() {
            let mut plus = net.clone();
            access(&mut plus)[i] += step;
            let mut minus = net.clone();
            access(&mut minus)[i] -= step;
            fd[i] = (loss_at(&plus) - loss_at(&minus)) / (2.0 * step);
        }
        let diff: f64 = analytic
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
        let relative = diff / norm.max(1e-12);
        assert!(relative < 1e-4, "tensor {name}: relative error {relative}");
        worst = worst.max(relative);
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    pass(
        "criterion 4 (MLP gradients)",
        format!("64->8->6->10 network; worst tensor relative error {worst:.2e}, {elapsed:?}"),
    );
}

// ───────────────────────── criterion 5 ─────────────────────────

/// Deterministic per-class-centroid model; no randomness anywhere.
struct CentroidTrainer;

struct CentroidModel {
    centroids: Vec<Vec<f64>>,
}

impl Trainer for CentroidTrainer {
    type Model = CentroidModel;

    fn fit(&self, data: &Dataset, train_idx: &[usize]) -> Result<CentroidModel, EvalError> {
        let mut centroids = vec![vec![0.0; data.p]; data.classes];
        let mut counts = vec![0usize; data.classes];
        for &i in train_idx {
            counts[data.targets[i]] += 1;
            for (c, f) in centroids[data.targets[i]].iter_mut().zip(data.feature_row(i)) {
                *c += f;
            }
        }
        for (centroid, &count) in centroids.iter_mut().zip(&counts) {
            if count > 0 {
                for c in centroid.iter_mut() {
                    *c /= count as f64;
                }
            }
        }
        Ok(CentroidModel { centroids })
    }

    fn per_sample_loss(&self, model: &CentroidModel, data: &Dataset, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .map(|&i| {
                model.centroids[data.targets[i]]
                    .iter()
                    .zip(data.feature_row(i))
                    .map(|(c, f)| (c - f) * (c - f))
                    .sum()
            })
            .collect()
    }

    fn accuracy(&self, _: &CentroidModel, _: &Dataset, _: &[usize]) -> f64 {
        1.0
    }
}

#[test]
fn criterion_05_cv_identity() {
    // 50-sample toy set with two interleaved classes.
    let mut features = Vec::new();
    let mut targets = Vec::new();
    for i in 0..50 {
        let t = i as f64 / 50.0;
        let class = i % 2;
        features.extend_from_slice(&[
            t + class as f64 * 0.5,
            (t * 7.0).sin() * 0.3 + class as f64,
        ]);
        targets.push(class);
    }
    let data = Dataset::new(features, targets, 2, 2);
    let trainer = CentroidTrainer;

    for k in [2usize, 5, 10] {
        let seed = 505;
        let cv = cv_loss(&trainer, &data, k, seed).unwrap();
        let folds = kfold_indices(data.n, k, seed).unwrap();
        let mut total = 0.0;
        for i in 0..k {
            let train_idx: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .flat_map(|(_, f)| f.iter().copied())
                .collect();
            total += validation_loss(&trainer, &data, &train_idx, &folds[i]).unwrap();
        }
        let oracle = total / k as f64;
        assert_eq!(
            cv.to_bits(),
            oracle.to_bits(),
            "k = {k}: cv_loss {cv} differs from fold mean {oracle}"
        );
    }
    pass(
        "criterion 5 (CV identity)",
        "cv_loss equals the per-fold mean bit-for-bit for k in {2, 5, 10}".to_string(),
    );
}

// ───────────────────────── criterion 6 ─────────────────────────

#[test]
fn criterion_06_random_beats_grid_on_low_effective_dimension() {
    let started = Instant::now();
    let space = SearchSpace::new(vec![
        ParamSpec::numeric("x1", 0.0, 1.0),
        ParamSpec::numeric("x2", 0.0, 1.0),
    ]);
    let objective = FnObjective::new(space.clone(), |x: &[f64]| (x[0] - 0.5) * (x[0] - 0.5));

    let grid = smbo::tuner::grid_search(&objective, &space, &[4, 4], 100_000).unwrap();
    assert_eq!(grid.count, 16);

    let mut random_bests: Vec<f64> = (0..20)
        .map(|seed| {
            random_search(&objective, &space, 16, 1, 600 + seed)
                .unwrap()
                .ybest
        })
        .collect();
    random_bests.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = 0.5 * (random_bests[9] + random_bests[10]);
    assert!(
        median < grid.ybest,
        "random median {median} not below grid best {}",
        grid.ybest
    );
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    pass(
        "criterion 6 (random > grid)",
        format!(
            "random median best {median:.2e} < grid best {:.2e} over 20 seeds, {elapsed:?}",
            grid.ybest
        ),
    );
}

// ───────────────────────── criterion 7 ─────────────────────────

#[test]
fn criterion_07_smbo_at_least_as_good_as_random() {
    let started = Instant::now();
    let space = SearchSpace::new(vec![
        ParamSpec::numeric("x1", 0.0, 1.0),
        ParamSpec::numeric("x2", 0.0, 1.0),
    ]);
    let objective = FnObjective::new(space.clone(), |x: &[f64]| {
        (x[0] - 0.3) * (x[0] - 0.3) + (x[1] - 0.3) * (x[1] - 0.3)
    });

    let median = |values: &mut Vec<f64>| {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        0.5 * (values[9] + values[10])
    };
    let mut tune_bests = Vec::new();
    let mut random_bests = Vec::new();
    for seed in 0..20u64 {
        let control = ControlConfig::new(&space, 40).with_seed(700 + seed);
        tune_bests.push(tune(&objective, &space, &control).unwrap().ybest);
        random_bests.push(
            random_search(&objective, &space, 40, 1, 700 + seed)
                .unwrap()
                .ybest,
        );
    }
    let tune_median = median(&mut tune_bests);
    let random_median = median(&mut random_bests);
    assert!(
        tune_median <= random_median,
        "tuner median {tune_median} above random median {random_median}"
    );
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    pass(
        "criterion 7 (SMBO >= random)",
        format!(
            "tuner median {tune_median:.2e} <= random median {random_median:.2e} over 20 paired seeds, {elapsed:?}"
        ),
    );
}

// ───────────────────────── criterion 8 ─────────────────────────

#[test]
fn criterion_08_end_to_end_mlp_tuning() {
    let started = Instant::now();
    let space = SearchSpace::preset("section34").unwrap();
    let seed = 3407;
    let objective = MlpObjective::demo(space.clone(), 0.2, seed).unwrap();

    // Desk-scale budget: 6 evaluations per dimension, deterministic mode.
    let control = ControlConfig::new(&space, 48).with_seed(seed);
    assert_eq!(control.design_size, 24);
    assert_eq!(control.repeats, 1);
    let result = tune(&objective, &space, &control).unwrap();

    assert_eq!(result.count, 48);
    assert_eq!(result.msg, "budget exhausted");
    for w in result.ybest_vec.windows(2) {
        assert!(w[1] <= w[0], "ybestVec must be nonincreasing");
    }

    // Tunability check: the tuned loss beats the published default
    // configuration evaluated under the identical split and seed discipline.
    let default_config = space.default_config().expect("presets carry defaults");
    let default_record = objective.evaluate(&default_config, seed);
    let default_loss = default_record.val_loss.expect("default training succeeds");
    assert!(
        result.ybest <= default_loss,
        "tuned {} worse than default {default_loss}",
        result.ybest
    );
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(15 * 60), "took {elapsed:?}");
    pass(
        "criterion 8 (end-to-end tuning)",
        format!(
            "count 48, tuned val loss {:.4} <= default {default_loss:.4}, {elapsed:?}",
            result.ybest
        ),
    );
}

// ───────────────────────── criterion 9 ─────────────────────────

#[test]
fn criterion_09_result_schema_parity() {
    let space = SearchSpace::new(vec![
        ParamSpec::numeric("x1", 0.0, 1.0),
        ParamSpec::numeric("x2", 0.0, 1.0),
    ]);
    let objective = FnObjective::new(space.clone(), |x: &[f64]| x[0] + x[1]);
    let control = ControlConfig::new(&space, 10).with_seed(909);
    let result = tune(&objective, &space, &control).unwrap();

    let value: serde_json::Value = serde_json::from_str(&result.to_json()).unwrap();
    let object = value.as_object().expect("result serializes to an object");
    let mut keys: Vec<&str> = object.keys().map(|k| k.as_str()).collect();
    keys.sort_unstable();
    let mut expected = vec![
        "xbest", "ybest", "x", "y", "logInfo", "count", "msg", "modelFit", "ybestVec",
    ];
    expected.sort_unstable();
    assert_eq!(keys, expected, "result object fields must match the schema exactly");

    // Round trip preserves the payload.
    let back = TunerResult::from_json(&result.to_json()).unwrap();
    assert_eq!(back.count, result.count);
    assert_eq!(back.y, result.y);
    pass(
        "criterion 9 (result schema parity)",
        "fields = {xbest, ybest, x, y, logInfo, count, msg, modelFit, ybestVec}".to_string(),
    );
}

// ───────────────────────── criterion 10 ─────────────────────────

#[test]
fn criterion_10_ols_inference() {
    // Known coefficients, Gaussian noise, 100 seeds.
    let truth = [0.5, -1.2, 0.0, 2.0, 0.7, -0.3, 1.5, -2.2]; // slopes
    let intercept = 0.8;
    let names: Vec<String> = (0..8).map(|i| format!("x{}", i + 1)).collect();
    let mut all_within = 0usize;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let x: Vec<Vec<f64>> = (0..480)
            .map(|_| (0..8).map(|_| rng.random::<f64>()).collect())
            .collect();
        let y: Vec<f64> = x
            .iter()
            .map(|row| {
                let noise: f64 = StandardNormal.sample(&mut rng);
                intercept
                    + row.iter().zip(&truth).map(|(v, b)| v * b).sum::<f64>()
                    + noise
            })
            .collect();
        let fit = smbo::analysis::ols_fit(&x, &y, &names).unwrap();
        assert!(
            (0.0..=1.0).contains(&fit.r_squared),
            "R^2 {} out of range",
            fit.r_squared
        );
        let mut ok = (fit.coefficients[0] - intercept).abs() <= 3.0 * fit.std_errors[0];
        for j in 0..8 {
            ok &= (fit.coefficients[j + 1] - truth[j]).abs() <= 3.0 * fit.std_errors[j + 1];
        }
        all_within += ok as usize;
    }
    assert!(
        all_within >= 95,
        "only {all_within}/100 seeds had every coefficient within 3 standard errors"
    );

    // t-CDF vs an independent sampling estimate at nu = 471.
    let dist = StudentT::new(471.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4711);
    let draws = 1_000_000usize;
    let samples: Vec<f64> = (0..draws).map(|_| dist.sample(&mut rng)).collect();
    let mut worst_cdf_gap = 0.0f64;
    for t in [0.0, 1.0, 2.0] {
        let empirical = samples.iter().filter(|&&s| s <= t).count() as f64 / draws as f64;
        let analytic = smbo::analysis::t_cdf(t, 471);
        let gap = (empirical - analytic).abs();
        assert!(gap < 2e-3, "t = {t}: |{empirical} - {analytic}| = {gap}");
        worst_cdf_gap = worst_cdf_gap.max(gap);
    }
    pass(
        "criterion 10 (OLS inference)",
        format!(
            "{all_within}/100 seeds within 3 SE; t-CDF vs sampling worst |gap| {worst_cdf_gap:.2e}"
        ),
    );
}

// ───────────────────────── criterion 11 ─────────────────────────

/// Rotates through the bundled child scripts by call position.
struct ScriptRotation {
    space: SearchSpace,
    scripts: Vec<ExternalCommand>,
    calls: std::sync::atomic::AtomicUsize,
}

impl Objective for ScriptRotation {
    fn evaluate(&self, config: &Config, seed: u64) -> EvalRecord {
        let call = self.calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        let command = &self.scripts[call.min(self.scripts.len() - 1)];
        external_evaluate(command, &self.space, config, seed)
    }
}

#[test]
fn criterion_11_external_protocol_conformance() {
    let dir = scripts_dir();
    let space = SearchSpace::new(vec![ParamSpec::numeric("x1", 0.0, 1.0)]);
    let config = vec![smbo::space::ParamValue::Float(0.5)];
    let generous = Duration::from_secs(10);
    let short = Duration::from_secs(1);

    // Statuses: ok / failed / timeout.
    let echo = ExternalCommand::new(dir.join("echo_metric.sh").to_str().unwrap(), &[], generous);
    let record = external_evaluate(&echo, &space, &config, 1);
    assert_eq!(record.status, EvalStatus::Ok);
    assert_eq!(record.val_loss, Some(0.5));

    let fail = ExternalCommand::new(dir.join("fail_eval.sh").to_str().unwrap(), &[], generous);
    let record = external_evaluate(&fail, &space, &config, 2);
    assert_eq!(record.status, EvalStatus::Failed);
    assert!(record.val_loss.is_none());

    let slow = ExternalCommand::new(dir.join("slow_eval.sh").to_str().unwrap(), &[], short);
    let started = Instant::now();
    let record = external_evaluate(&slow, &space, &config, 3);
    let elapsed = started.elapsed();
    assert_eq!(record.status, EvalStatus::Timeout);
    assert!(
        elapsed <= short + Duration::from_secs(1),
        "timeout evaluation took {elapsed:?}"
    );

    // Progress noise before the metric line parses via the last-line rule.
    let progress =
        ExternalCommand::new(dir.join("progress_metric.sh").to_str().unwrap(), &[], generous);
    let record = external_evaluate(&progress, &space, &config, 4);
    assert_eq!(record.status, EvalStatus::Ok);
    assert_eq!(record.val_loss, Some(0.45));
    assert_eq!(record.val_acc, Some(0.88));

    // Imputation inside a tuning run: first two evaluations succeed, then one
    // failure and one timeout, then echo again.
    let objective = ScriptRotation {
        space: space.clone(),
        scripts: vec![
            echo.clone(),
            echo.clone(),
            fail.clone(),
            slow.clone(),
            echo.clone(),
        ],
        calls: std::sync::atomic::AtomicUsize::new(0),
    };
    let control = ControlConfig {
        design_size: 2,
        ..ControlConfig::new(&space, 5)
    }
    .with_seed(1111);
    let per_eval_budget = short + Duration::from_secs(1);
    let run_started = Instant::now();
    let result = tune(&objective, &space, &control).unwrap();
    let run_elapsed = run_started.elapsed();
    assert_eq!(result.count, 5);
    assert!(result.y.iter().all(|v| v.is_finite()));
    let log = result.log_info.expect("imputations are logged");
    assert_eq!(log.iter().filter(|l| l.contains("imputed")).count(), 2);
    // Only one evaluation (the slow one) may approach the timeout.
    assert!(
        run_elapsed <= Duration::from_secs(4) + 5 * per_eval_budget,
        "run took {run_elapsed:?}"
    );

    pass(
        "criterion 11 (external protocol)",
        "statuses ok/failed/timeout, last-line parsing, imputation in-loop".to_string(),
    );
}

// ───────────────────────── shared sanity for the suite itself ─────────────────────────

#[test]
fn acceptance_support_split_and_correlation_behave() {
    // Keeps the suite honest about helpers it leans on.
    let (train, val) = split_train_val(
        10,
        &SplitSpec {
            validation_fraction: 0.2,
            seed: 0,
        },
    )
    .unwrap();
    assert_eq!((train.len(), val.len()), (8, 2));
    let c = correlation(&[0.2], &[0.2], &[1.0], &[DimType::Numeric]);
    assert_eq!(c, 1.0);
    let (rows, means) = aggregate_rows(
        &[vec![0.1], vec![0.1], vec![0.9]],
        &[1.0, 3.0, 5.0],
    );
    assert_eq!(rows.len(), 2);
    assert_eq!(means, vec![2.0, 5.0]);
    let _ = train;
}
