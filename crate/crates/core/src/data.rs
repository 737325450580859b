//! Dataset container and the bundled 8x8 digits corpus.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("bundled dataset is corrupt: {0}")]
    Corrupt(String),
}

/// Dense classification dataset: features in `[0,1]`, one-hot labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// Row-major `n x p` feature matrix.
    pub features: Vec<f64>,
    /// Row-major `n x classes` one-hot matrix.
    pub labels: Vec<f64>,
    /// Class index per sample.
    pub targets: Vec<usize>,
    pub n: usize,
    pub p: usize,
    pub classes: usize,
}

impl Dataset {
    pub fn new(features: Vec<f64>, targets: Vec<usize>, p: usize, classes: usize) -> Dataset {
        let n = targets.len();
        assert_eq!(features.len(), n * p);
        let mut labels = vec![0.0; n * classes];
        for (i, &t) in targets.iter().enumerate() {
            assert!(t < classes);
            labels[i * classes + t] = 1.0;
        }
        Dataset {
            features,
            labels,
            targets,
            n,
            p,
            classes,
        }
    }

    pub fn feature_row(&self, i: usize) -> &[f64] {
        &self.features[i * self.p..(i + 1) * self.p]
    }

    pub fn label_row(&self, i: usize) -> &[f64] {
        &self.labels[i * self.classes..(i + 1) * self.classes]
    }
}

const DIGITS_RAW: &[u8] = include_bytes!("../data/digits8x8.bin");

/// Loads the bundled digit corpus: ~1800 grayscale 8x8 images (p = 64),
/// ten classes, features scaled into `[0,1]`. Deterministic.
pub fn load_demo_digits() -> Result<Dataset, DataError> {
    let raw = DIGITS_RAW;
    if raw.len() < 10 || &raw[..4] != b"DGT8" {
        return Err(DataError::Corrupt("bad magic".into()));
    }
    let n = u16::from_le_bytes([raw[4], raw[5]]) as usize;
    let p = u16::from_le_bytes([raw[6], raw[7]]) as usize;
    let classes = u16::from_le_bytes([raw[8], raw[9]]) as usize;
    let expected = 10 + n * p + n;
    if raw.len() != expected {
        return Err(DataError::Corrupt(format!(
            "expected {expected} bytes, found {}",
            raw.len()
        )));
    }
    let body = &raw[10..];
    let features: Vec<f64> = body[..n * p].iter().map(|&b| b as f64 / 16.0).collect();
    let targets: Vec<usize> = body[n * p..].iter().map(|&b| b as usize).collect();
    if targets.iter().any(|&t| t >= classes) {
        return Err(DataError::Corrupt("label out of range".into()));
    }
    Ok(Dataset::new(features, targets, p, classes))
}
