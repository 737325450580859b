//! Objective-evaluation protocols.
//!
//! Covers the data-splitting side of tuning (train/validation split, k-fold
//! cross-validation, final test evaluation) and the external-process
//! evaluator: hyperparameters go to a child process as `--name=value` flags,
//! the response comes back as the last stdout line that parses as a JSON
//! object with a `metric_val_loss` key. Validation and test data are kept
//! strictly separate; the test set is consumed by [`test_eval`] alone.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Read;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};
use thiserror::Error;

use crate::data::Dataset;
use crate::space::{Config, SearchSpace};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("dataset needs at least 2 samples, got {0}")]
    DatasetTooSmall(usize),
    #[error("validation fraction must lie in (0,1), got {0}")]
    BadFraction(f64),
    #[error("k = {k} folds exceed {n} samples")]
    TooManyFolds { k: usize, n: usize },
    #[error("k-fold cross-validation needs k >= 2, got {0}")]
    TooFewFolds(usize),
    #[error("test set overlaps train/validation data")]
    TestNotDisjoint,
    #[error("trainer failed: {0}")]
    TrainerFailed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalStatus {
    Ok,
    Failed,
    Timeout,
}

/// One objective evaluation: the response surface measurements of a single
/// trained model. Metric fields are populated only when `status` is `Ok`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EvalRecord {
    pub train_loss: Option<f64>,
    pub train_acc: Option<f64>,
    pub val_loss: Option<f64>,
    pub val_acc: Option<f64>,
    pub test_loss: Option<f64>,
    pub test_acc: Option<f64>,
    /// Wall-clock seconds spent producing this record.
    pub runtime: f64,
    pub seed: u64,
    pub status: EvalStatus,
}

impl EvalRecord {
    pub fn failure(status: EvalStatus, runtime: f64, seed: u64) -> EvalRecord {
        EvalRecord {
            train_loss: None,
            train_acc: None,
            val_loss: None,
            val_acc: None,
            test_loss: None,
            test_acc: None,
            runtime,
            seed,
            status,
        }
    }

    pub fn ok(&self) -> bool {
        self.status == EvalStatus::Ok
    }
}

/// Anything the tuner can spend budget on.
pub trait Objective: Sync {
    fn evaluate(&self, config: &Config, seed: u64) -> EvalRecord;
}

/// Adapts a plain function of the natural-scale vector into an objective.
pub struct FnObjective<F> {
    space: SearchSpace,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(space: SearchSpace, f: F) -> Self {
        FnObjective { space, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn evaluate(&self, config: &Config, seed: u64) -> EvalRecord {
        let y = (self.f)(&self.space.natural_vec(config));
        if !y.is_finite() {
            return EvalRecord::failure(EvalStatus::Failed, 0.0, seed);
        }
        EvalRecord {
            val_loss: Some(y),
            ..EvalRecord::failure(EvalStatus::Ok, 0.0, seed)
        }
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SplitSpec {
    pub validation_fraction: f64,
    pub seed: u64,
}

/// Deterministic shuffled train/validation split over `n` samples. The
/// validation side gets `round(fraction * n)` samples, clamped so that
/// neither side is empty.
pub fn split_train_val(n: usize, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    if n < 2 {
        return Err(EvalError::DatasetTooSmall(n));
    }
    let f = spec.validation_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(EvalError::BadFraction(f));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let n_val = ((f * n as f64).round() as usize).clamp(1, n - 1);
    let val = order.split_off(n - n_val);
    Ok((order, val))
}

/// Round-robin fold assignment over a seeded shuffle; folds differ in size
/// by at most one sample.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 {
        return Err(EvalError::TooFewFolds(k));
    }
    if k > n {
        return Err(EvalError::TooManyFolds { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (i, idx) in order.into_iter().enumerate() {
        folds[i % k].push(idx);
    }
    Ok(folds)
}

/// A model-fitting procedure evaluable on held-out samples.
pub trait Trainer {
    type Model;
    fn fit(&self, data: &Dataset, train_idx: &[usize]) -> Result<Self::Model, EvalError>;
    fn per_sample_loss(&self, model: &Self::Model, data: &Dataset, idx: &[usize]) -> Vec<f64>;
    fn accuracy(&self, model: &Self::Model, data: &Dataset, idx: &[usize]) -> f64;
}

/// Mean per-sample loss on the validation set of a model fitted on the
/// training set only.
pub fn validation_loss<T: Trainer>(
    trainer: &T,
    data: &Dataset,
    train_idx: &[usize],
    val_idx: &[usize],
) -> Result<f64, EvalError> {
    assert!(!train_idx.is_empty() && !val_idx.is_empty(), "sets must be nonempty");
    let model = trainer.fit(data, train_idx)?;
    let losses = trainer.per_sample_loss(&model, data, val_idx);
    Ok(losses.iter().sum::<f64>() / losses.len() as f64)
}

/// k-fold cross-validated loss: the arithmetic mean of the k per-fold
/// validation losses, each fold held out once.
pub fn cv_loss<T: Trainer>(
    trainer: &T,
    data: &Dataset,
    k: usize,
    seed: u64,
) -> Result<f64, EvalError> {
    let folds = kfold_indices(data.n, k, seed)?;
    let mut total = 0.0;
    for i in 0..k {
        let train_idx: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        total += validation_loss(trainer, data, &train_idx, &folds[i])?;
    }
    Ok(total / k as f64)
}

/// Hold-out indices with an access counter, so tests can prove the test set
/// is touched by exactly one operation.
#[derive(Debug)]
pub struct TestSet {
    indices: Vec<usize>,
    accesses: AtomicUsize,
}

impl TestSet {
    pub fn new(indices: Vec<usize>) -> TestSet {
        TestSet {
            indices,
            accesses: AtomicUsize::new(0),
        }
    }

    pub fn indices(&self) -> &[usize] {
        self.accesses.fetch_add(1, Ordering::Relaxed);
        &self.indices
    }

    pub fn access_count(&self) -> usize {
        self.accesses.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Final assessment of a chosen configuration: trains once on the union of
/// train and validation data, then measures loss and accuracy on the test
/// set. This is the only operation that reads the test set.
pub fn test_eval<T: Trainer>(
    trainer: &T,
    data: &Dataset,
    train_idx: &[usize],
    val_idx: &[usize],
    test: &TestSet,
) -> Result<EvalRecord, EvalError> {
    let started = Instant::now();
    let mut union: Vec<usize> = Vec::with_capacity(train_idx.len() + val_idx.len());
    union.extend_from_slice(train_idx);
    union.extend_from_slice(val_idx);
    let test_idx = test.indices().to_vec();
    if test_idx.iter().any(|i| union.contains(i)) {
        return Err(EvalError::TestNotDisjoint);
    }
    let model = trainer.fit(data, &union)?;
    let train_losses = trainer.per_sample_loss(&model, data, &union);
    let test_losses = trainer.per_sample_loss(&model, data, &test_idx);
    Ok(EvalRecord {
        train_loss: Some(train_losses.iter().sum::<f64>() / train_losses.len() as f64),
        train_acc: Some(trainer.accuracy(&model, data, &union)),
        val_loss: None,
        val_acc: None,
        test_loss: Some(test_losses.iter().sum::<f64>() / test_losses.len() as f64),
        test_acc: Some(trainer.accuracy(&model, data, &test_idx)),
        runtime: started.elapsed().as_secs_f64(),
        seed: 0,
        status: EvalStatus::Ok,
    })
}

/// Child-process objective. Hyperparameters are appended to the command as
/// `--<name>=<value>` flags (full-precision decimals for numerics, level
/// labels for factors). Exit code 0 means success; the last stdout line
/// parsing as a JSON object must carry `metric_val_loss`.
#[derive(Debug, Clone)]
pub struct ExternalCommand {
    pub program: String,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl ExternalCommand {
    pub fn new(program: &str, args: &[&str], timeout: Duration) -> ExternalCommand {
        ExternalCommand {
            program: program.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
            timeout,
        }
    }

    pub fn flags(space: &SearchSpace, config: &Config) -> Vec<String> {
        space
            .params
            .iter()
            .zip(config)
            .map(|(p, v)| format!("--{}={}", p.name, v))
            .collect()
    }
}

/// Runs the child once for one configuration. Timeouts terminate the child;
/// the call never blocks past `timeout` plus a small grace period.
pub fn external_evaluate(
    command: &ExternalCommand,
    space: &SearchSpace,
    config: &Config,
    seed: u64,
) -> EvalRecord {
    let started = Instant::now();
    let mut cmd = Command::new(&command.program);
    cmd.args(&command.args)
        .args(ExternalCommand::flags(space, config))
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .stdin(Stdio::null());
    // Own process group, so a timeout can take down grandchildren that would
    // otherwise keep the stdout pipe open past the deadline.
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        cmd.process_group(0);
    }

    let mut child = match cmd.spawn() {
        Ok(c) => c,
        Err(_) => return EvalRecord::failure(EvalStatus::Failed, started.elapsed().as_secs_f64(), seed),
    };

    // Drain stdout on a separate thread so a chatty child never fills the
    // pipe while we poll for exit.
    let mut stdout = child.stdout.take().expect("stdout was piped");
    let reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout.read_to_string(&mut buf);
        buf
    });

    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) => {
                if started.elapsed() >= command.timeout {
                    terminate(&mut child);
                    break None;
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(_) => {
                terminate(&mut child);
                break None;
            }
        }
    };
    let runtime = started.elapsed().as_secs_f64();
    let output = reader.join().unwrap_or_default();

    let exit = match status {
        Some(s) => s,
        None => return EvalRecord::failure(EvalStatus::Timeout, runtime, seed),
    };
    if !exit.success() {
        return EvalRecord::failure(EvalStatus::Failed, runtime, seed);
    }
    match parse_metric_lines(&output) {
        Some(metrics) => EvalRecord {
            train_loss: metrics.get("metric_train_loss").copied(),
            train_acc: metrics.get("metric_train_acc").copied(),
            val_loss: metrics.get("metric_val_loss").copied(),
            val_acc: metrics.get("metric_val_acc").copied(),
            test_loss: metrics.get("metric_test_loss").copied(),
            test_acc: metrics.get("metric_test_acc").copied(),
            runtime,
            seed,
            status: EvalStatus::Ok,
        },
        None => EvalRecord::failure(EvalStatus::Failed, runtime, seed),
    }
}

#[cfg(unix)]
fn terminate(child: &mut std::process::Child) {
    // The child leads its own process group; negative pid signals the group.
    unsafe {
        libc::kill(-(child.id() as i32), libc::SIGKILL);
    }
    let _ = child.wait();
}

#[cfg(not(unix))]
fn terminate(child: &mut std::process::Child) {
    let _ = child.kill();
    let _ = child.wait();
}

/// The last line parsing as a JSON object wins; it must carry a numeric
/// `metric_val_loss`. Progress lines and other noise are skipped.
fn parse_metric_lines(output: &str) -> Option<std::collections::HashMap<String, f64>> {
    let mut best = None;
    for line in output.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Ok(serde_json::Value::Object(map)) = serde_json::from_str(line) {
            let metrics: std::collections::HashMap<String, f64> = map
                .into_iter()
                .filter_map(|(k, v)| v.as_f64().map(|f| (k, f)))
                .collect();
            best = Some(metrics);
        }
    }
    best.filter(|m| m.contains_key("metric_val_loss"))
}

/// External objective for the tuner: one child process per evaluation.
pub struct ExternalObjective {
    pub command: ExternalCommand,
    pub space: SearchSpace,
}

impl Objective for ExternalObjective {
    fn evaluate(&self, config: &Config, seed: u64) -> EvalRecord {
        external_evaluate(&self.command, &self.space, config, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;

    #[test]
    fn split_sizes_follow_fraction() {
        let spec = SplitSpec {
            validation_fraction: 0.2,
            seed: 1,
        };
        let (train, val) = split_train_val(10, &spec).unwrap();
        assert_eq!((train.len(), val.len()), (8, 2));
        let (train, val) = split_train_val(60_000, &spec).unwrap();
        assert_eq!((train.len(), val.len()), (48_000, 12_000));
    }

    #[test]
    fn split_rounding_edge_keeps_both_sides() {
        let spec = SplitSpec {
            validation_fraction: 0.999,
            seed: 0,
        };
        let (train, val) = split_train_val(2, &spec).unwrap();
        assert_eq!((train.len(), val.len()), (1, 1));
    }

    #[test]
    fn split_is_disjoint_covering_and_deterministic() {
        let spec = SplitSpec {
            validation_fraction: 0.3,
            seed: 9,
        };
        let (train, val) = split_train_val(100, &spec).unwrap();
        let mut all: Vec<usize> = train.iter().chain(val.iter()).copied().collect();
        all.sort();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        let (train2, val2) = split_train_val(100, &spec).unwrap();
        assert_eq!(train, train2);
        assert_eq!(val, val2);
    }

    #[test]
    fn split_rejects_tiny_or_invalid() {
        let spec = SplitSpec {
            validation_fraction: 0.2,
            seed: 0,
        };
        assert!(split_train_val(1, &spec).is_err());
        assert!(split_train_val(
            10,
            &SplitSpec {
                validation_fraction: 1.0,
                seed: 0
            }
        )
        .is_err());
    }

    #[test]
    fn kfold_partitions_evenly() {
        let folds = kfold_indices(25, 5, 3).unwrap();
        assert_eq!(folds.len(), 5);
        assert!(folds.iter().all(|f| f.len() == 5));
        let mut all: Vec<usize> = folds.concat();
        all.sort();
        assert_eq!(all, (0..25).collect::<Vec<_>>());

        let folds = kfold_indices(10, 3, 3).unwrap();
        let sizes: Vec<usize> = folds.iter().map(|f| f.len()).collect();
        assert_eq!(sizes.iter().sum::<usize>(), 10);
        assert!(sizes.iter().all(|&s| s == 3 || s == 4));
    }

    #[test]
    fn kfold_rejects_bad_k() {
        assert!(matches!(
            kfold_indices(5, 7, 0),
            Err(EvalError::TooManyFolds { k: 7, n: 5 })
        ));
        assert!(matches!(kfold_indices(5, 1, 0), Err(EvalError::TooFewFolds(1))));
    }

    /// Predicts the per-class mean feature vector; deterministic, no RNG.
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
                let class = data.targets[i];
                counts[class] += 1;
                for (c, f) in centroids[class].iter_mut().zip(data.feature_row(i)) {
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
            // Squared distance to the true-class centroid.
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

        fn accuracy(&self, model: &CentroidModel, data: &Dataset, idx: &[usize]) -> f64 {
            let correct = idx
                .iter()
                .filter(|&&i| {
                    let nearest = (0..data.classes)
                        .min_by(|&a, &b| {
                            let da: f64 = model.centroids[a]
                                .iter()
                                .zip(data.feature_row(i))
                                .map(|(c, f)| (c - f) * (c - f))
                                .sum();
                            let db: f64 = model.centroids[b]
                                .iter()
                                .zip(data.feature_row(i))
                                .map(|(c, f)| (c - f) * (c - f))
                                .sum();
                            da.partial_cmp(&db).unwrap()
                        })
                        .unwrap();
                    nearest == data.targets[i]
                })
                .count();
            correct as f64 / idx.len() as f64
        }
    }

    fn toy_dataset(n: usize) -> Dataset {
        // Two well-separated clusters in 2 dimensions.
        let mut features = Vec::with_capacity(n * 2);
        let mut targets = Vec::with_capacity(n);
        for i in 0..n {
            let class = i % 2;
            let jitter = (i as f64 * 0.37).sin() * 0.05;
            if class == 0 {
                features.extend_from_slice(&[0.2 + jitter, 0.2 - jitter]);
            } else {
                features.extend_from_slice(&[0.8 - jitter, 0.8 + jitter]);
            }
            targets.push(class);
        }
        Dataset::new(features, targets, 2, 2)
    }

    #[test]
    fn memorizing_model_scores_zero_on_duplicates() {
        // One repeated feature vector per class: the centroid equals the
        // sample, so held-out duplicates have zero loss.
        let mut features = Vec::new();
        let mut targets = Vec::new();
        for i in 0..12 {
            let class = i % 2;
            features.extend_from_slice(if class == 0 { &[0.1, 0.9] } else { &[0.8, 0.2] });
            targets.push(class);
        }
        let data = Dataset::new(features, targets, 2, 2);
        let train_idx: Vec<usize> = (0..8).collect();
        let val_idx: Vec<usize> = (8..12).collect();
        let loss = validation_loss(&CentroidTrainer, &data, &train_idx, &val_idx).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn validation_loss_is_mean_of_per_sample_losses() {
        let data = toy_dataset(20);
        let trainer = CentroidTrainer;
        let train_idx: Vec<usize> = (0..14).collect();
        let val_idx: Vec<usize> = (14..20).collect();
        let loss = validation_loss(&trainer, &data, &train_idx, &val_idx).unwrap();
        // Direct summation oracle.
        let model = trainer.fit(&data, &train_idx).unwrap();
        let direct: f64 = trainer
            .per_sample_loss(&model, &data, &val_idx)
            .iter()
            .sum::<f64>()
            / val_idx.len() as f64;
        assert!((loss - direct).abs() < 1e-12);
    }

    #[test]
    fn constant_uniform_prediction_loss_is_ln10() {
        // A 10-class model predicting 1/10 everywhere has mean CCE ln(10).
        let probs = vec![0.1; 10];
        let mut labels = vec![0.0; 10];
        labels[7] = 1.0;
        let loss = crate::mlp::loss_cce(&probs, &labels, 10);
        assert!((loss - 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cv_loss_equals_mean_of_fold_losses() {
        let data = toy_dataset(25);
        let trainer = CentroidTrainer;
        for k in [2usize, 5] {
            let seed = 11;
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
            assert_eq!(cv.to_bits(), oracle.to_bits(), "k = {k}");
        }
    }

    #[test]
    fn cv_constant_folds_return_that_constant() {
        // All folds of a symmetric dataset yield identical losses.
        struct ConstantTrainer;
        impl Trainer for ConstantTrainer {
            type Model = ();
            fn fit(&self, _: &Dataset, _: &[usize]) -> Result<(), EvalError> {
                Ok(())
            }
            fn per_sample_loss(&self, _: &(), _: &Dataset, idx: &[usize]) -> Vec<f64> {
                vec![0.3; idx.len()]
            }
            fn accuracy(&self, _: &(), _: &Dataset, _: &[usize]) -> f64 {
                1.0
            }
        }
        let data = toy_dataset(12);
        let cv = cv_loss(&ConstantTrainer, &data, 4, 0).unwrap();
        assert!((cv - 0.3).abs() < 1e-15);
    }

    #[test]
    fn test_eval_trains_on_union_and_reads_test_once() {
        let data = toy_dataset(30);
        let trainer = CentroidTrainer;
        let train_idx: Vec<usize> = (0..18).collect();
        let val_idx: Vec<usize> = (18..24).collect();
        let test = TestSet::new((24..30).collect());
        let record = test_eval(&trainer, &data, &train_idx, &val_idx, &test).unwrap();
        assert_eq!(record.status, EvalStatus::Ok);
        // Separable clusters: the centroid model classifies the held-out side
        // perfectly.
        assert_eq!(record.test_acc, Some(1.0));
        assert!(record.test_loss.is_some());
        assert_eq!(test.access_count(), 1);
    }

    #[test]
    fn test_eval_trains_on_the_full_union() {
        struct SizeRecorder(std::sync::atomic::AtomicUsize);
        impl Trainer for &SizeRecorder {
            type Model = ();
            fn fit(&self, _: &Dataset, train_idx: &[usize]) -> Result<(), EvalError> {
                self.0.store(train_idx.len(), Ordering::Relaxed);
                Ok(())
            }
            fn per_sample_loss(&self, _: &(), _: &Dataset, idx: &[usize]) -> Vec<f64> {
                vec![0.1; idx.len()]
            }
            fn accuracy(&self, _: &(), _: &Dataset, _: &[usize]) -> f64 {
                1.0
            }
        }
        let data = toy_dataset(20);
        let recorder = SizeRecorder(std::sync::atomic::AtomicUsize::new(0));
        let train_idx: Vec<usize> = (0..11).collect();
        let val_idx: Vec<usize> = (11..16).collect();
        let test = TestSet::new((16..20).collect());
        test_eval(&&recorder, &data, &train_idx, &val_idx, &test).unwrap();
        assert_eq!(recorder.0.load(Ordering::Relaxed), 11 + 5);
    }

    #[test]
    fn test_eval_rejects_overlap() {
        let data = toy_dataset(10);
        let test = TestSet::new(vec![5, 6]);
        let err = test_eval(&CentroidTrainer, &data, &[0, 1, 2], &[5], &test);
        assert!(matches!(err, Err(EvalError::TestNotDisjoint)));
    }

    #[test]
    fn metric_parser_takes_last_json_line() {
        let output = "epoch 1 loss 0.9\n{\"metric_val_loss\": 0.8}\nnoise\n{\"metric_val_loss\": 0.5, \"metric_val_acc\": 0.9}\n";
        let metrics = parse_metric_lines(output).unwrap();
        assert_eq!(metrics["metric_val_loss"], 0.5);
        assert_eq!(metrics["metric_val_acc"], 0.9);
    }

    #[test]
    fn metric_parser_requires_val_loss_key() {
        assert!(parse_metric_lines("{\"metric_train_loss\": 0.5}\n").is_none());
        assert!(parse_metric_lines("no json here\n").is_none());
    }
}
