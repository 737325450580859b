//! Kriging surrogate with expected-improvement infill.
//!
//! The model interpolates responses over unit-scaled inputs with a Gaussian
//! correlation kernel, `exp(-sum_i theta_i * d_i(u_i, v_i))`, where `d_i` is
//! the squared difference on numeric/integer dimensions and a 0/1 indicator
//! on decoded factor levels. Correlation lengths are estimated by maximizing
//! the concentrated log-likelihood (process mean and variance profiled out in
//! closed form) over `[1e-4, 100]^d` on log10 axes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use std::sync::LazyLock;
use thiserror::Error;

use crate::optim::nelder_mead;
use crate::space::{ParamKind, SearchSpace};

pub const THETA_LOWER: f64 = 1e-4;
pub const THETA_UPPER: f64 = 100.0;
pub const NUGGET_LOWER: f64 = 1e-8;
pub const NUGGET_UPPER: f64 = 1e-2;
/// Floor applied to the profiled process variance so constant responses stay
/// well-defined.
pub const SIGMA2_FLOOR: f64 = 1e-12;

static STD_NORMAL: LazyLock<Normal> = LazyLock::new(|| Normal::new(0.0, 1.0).unwrap());

#[derive(Debug, Error)]
pub enum SurrogateError {
    #[error("kriging needs at least 2 design points, got {0}")]
    TooFewPoints(usize),
    #[error("all design rows are identical")]
    DegenerateDesign,
    #[error("dimension mismatch: model has {expected}, query has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("correlation matrix is not positive definite for any searched theta")]
    NotPositiveDefinite,
}

/// Per-dimension kernel behaviour, derived from the parameter kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimType {
    Numeric,
    Integer,
    Factor { levels: usize },
}

impl DimType {
    pub fn from_space(space: &SearchSpace) -> Vec<DimType> {
        space
            .params
            .iter()
            .map(|p| match p.kind {
                ParamKind::Numeric => DimType::Numeric,
                ParamKind::Integer => DimType::Integer,
                ParamKind::Factor => DimType::Factor {
                    levels: p.levels.len(),
                },
            })
            .collect()
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DimType::Numeric => "numeric",
            DimType::Integer => "integer",
            DimType::Factor { .. } => "factor",
        }
    }

    fn distance(&self, u: f64, v: f64) -> f64 {
        match self {
            DimType::Numeric | DimType::Integer => (u - v) * (u - v),
            DimType::Factor { levels } => {
                let decode = |x: f64| ((x * *levels as f64).floor() as usize).min(levels - 1);
                if decode(u) == decode(v) {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }
}

/// Gaussian correlation between two unit-scale points.
pub fn correlation(u: &[f64], v: &[f64], theta: &[f64], types: &[DimType]) -> f64 {
    assert_eq!(u.len(), v.len(), "correlation needs equal dimensions");
    assert_eq!(u.len(), theta.len());
    let exponent: f64 = (0..u.len())
        .map(|i| theta[i] * types[i].distance(u[i], v[i]))
        .sum();
    (-exponent).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

/// Closed-form expected improvement of a predictive normal over `y_min`.
///
/// With `s = sqrt(variance)`: zero when `s = 0`, otherwise
/// `(y_min - mean) * Phi(z) + s * phi(z)` with `z = (y_min - mean) / s`,
/// floored at zero.
pub fn expected_improvement(pred: &Prediction, y_min: f64) -> f64 {
    let s = pred.variance.max(0.0).sqrt();
    if s == 0.0 {
        return 0.0;
    }
    let z = (y_min - pred.mean) / s;
    let ei = (y_min - pred.mean) * STD_NORMAL.cdf(z) + s * STD_NORMAL.pdf(z);
    ei.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NuggetMode {
    Fixed(f64),
    /// Jointly estimated on a log10 axis in `[NUGGET_LOWER, NUGGET_UPPER]`.
    Estimate,
}

#[derive(Debug, Clone)]
pub struct FitControl {
    pub nugget: NuggetMode,
    pub starts: usize,
    /// Total budget of likelihood evaluations across starts and refinement.
    pub budget: usize,
    pub seed: u64,
}

impl Default for FitControl {
    fn default() -> Self {
        FitControl {
            nugget: NuggetMode::Fixed(1e-8),
            starts: 8,
            budget: 500,
            seed: 0,
        }
    }
}

/// A fitted Kriging model. Immutable; queries may run concurrently.
#[derive(Debug, Clone)]
pub struct KrigingModel {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    pub theta: Vec<f64>,
    pub mu: f64,
    pub sigma2: f64,
    pub nugget: f64,
    pub types: Vec<DimType>,
    /// Lower-triangular Cholesky factor of the regularized correlation matrix.
    chol: Vec<f64>,
    /// `R^-1 (y - mu 1)`
    alpha: Vec<f64>,
    rinv_one: Vec<f64>,
    one_rinv_one: f64,
    /// Smallest response in the training data; the incumbent for EI.
    pub y_min: f64,
}

fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solves `L L^T x = b` given the lower factor.
fn solve_spd(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * z[k];
        }
        z[i] = sum / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = z[i];
        for k in (i + 1)..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    x
}

fn correlation_matrix(x: &[Vec<f64>], theta: &[f64], types: &[DimType], nugget: f64) -> Vec<f64> {
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
    r
}

struct Profile {
    mu: f64,
    sigma2: f64,
    log_det: f64,
    chol: Vec<f64>,
    alpha: Vec<f64>,
    rinv_one: Vec<f64>,
    one_rinv_one: f64,
}

fn profile_likelihood(
    x: &[Vec<f64>],
    y: &[f64],
    theta: &[f64],
    types: &[DimType],
    nugget: f64,
) -> Option<Profile> {
    let n = x.len();
    let r = correlation_matrix(x, theta, types, nugget);
    let chol = cholesky(&r, n)?;
    let log_det: f64 = (0..n).map(|i| 2.0 * chol[i * n + i].ln()).sum();
    let ones = vec![1.0; n];
    let rinv_y = solve_spd(&chol, n, y);
    let rinv_one = solve_spd(&chol, n, &ones);
    let one_rinv_one: f64 = rinv_one.iter().sum();
    let one_rinv_y: f64 = rinv_y.iter().sum();
    let mu = one_rinv_y / one_rinv_one;
    let centered: Vec<f64> = y.iter().map(|v| v - mu).collect();
    let alpha: Vec<f64> = (0..n).map(|i| rinv_y[i] - mu * rinv_one[i]).collect();
    let sigma2 = (centered
        .iter()
        .zip(&alpha)
        .map(|(c, a)| c * a)
        .sum::<f64>()
        / n as f64)
        .max(SIGMA2_FLOOR);
    Some(Profile {
        mu,
        sigma2,
        log_det,
        chol,
        alpha,
        rinv_one,
        one_rinv_one,
    })
}

/// Concentrated negative log-likelihood; `+inf` when the regularized
/// correlation matrix fails to factorize.
pub fn neg_log_likelihood(
    theta: &[f64],
    x: &[Vec<f64>],
    y: &[f64],
    types: &[DimType],
    nugget: f64,
) -> f64 {
    let n = x.len() as f64;
    match profile_likelihood(x, y, theta, types, nugget) {
        Some(p) => 0.5 * (n * p.sigma2.ln() + p.log_det),
        None => f64::INFINITY,
    }
}

/// Maximum-likelihood Kriging fit over unit-scaled rows.
pub fn kriging_fit(
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    types: Vec<DimType>,
    control: &FitControl,
) -> Result<KrigingModel, SurrogateError> {
    let n = x.len();
    if n < 2 {
        return Err(SurrogateError::TooFewPoints(n));
    }
    if x.iter().all(|row| row == &x[0]) {
        return Err(SurrogateError::DegenerateDesign);
    }
    let d = types.len();
    assert!(x.iter().all(|row| row.len() == d));

    let (log_lo, log_hi) = (THETA_LOWER.log10(), THETA_UPPER.log10());
    let estimate_nugget = matches!(control.nugget, NuggetMode::Estimate);
    let search_dim = if estimate_nugget { d + 1 } else { d };
    let mut lower = vec![log_lo; search_dim];
    let mut upper = vec![log_hi; search_dim];
    if estimate_nugget {
        lower[d] = NUGGET_LOWER.log10();
        upper[d] = NUGGET_UPPER.log10();
    }

    let decode = |p: &[f64]| -> (Vec<f64>, f64) {
        let theta: Vec<f64> = p[..d].iter().map(|t| 10f64.powf(*t)).collect();
        let nugget = match control.nugget {
            NuggetMode::Fixed(v) => v,
            NuggetMode::Estimate => 10f64.powf(p[d]),
        };
        (theta, nugget)
    };
    let objective = |p: &[f64]| {
        let (theta, nugget) = decode(p);
        neg_log_likelihood(&theta, &x, &y, &types, nugget)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(control.seed);
    let mut starts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(control.starts);
    for k in 0..control.starts {
        // First start at theta = 1 (log 0), the rest uniform over the box.
        let p: Vec<f64> = (0..search_dim)
            .map(|i| {
                if k == 0 {
                    0f64.clamp(lower[i], upper[i])
                } else {
                    rng.random_range(lower[i]..upper[i])
                }
            })
            .collect();
        let v = objective(&p);
        starts.push((p, v));
    }
    starts.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

    let spent = starts.len();
    let refine = 2.min(starts.len());
    let per_start = control.budget.saturating_sub(spent) / refine.max(1);
    let mut best = starts[0].clone();
    for (start, _) in starts.into_iter().take(refine) {
        let (p, v) = nelder_mead(&objective, &start, &lower, &upper, per_start);
        if v < best.1 {
            best = (p, v);
        }
    }
    if !best.1.is_finite() {
        return Err(SurrogateError::NotPositiveDefinite);
    }

    let (theta, nugget) = decode(&best.0);
    let profile = profile_likelihood(&x, &y, &theta, &types, nugget)
        .ok_or(SurrogateError::NotPositiveDefinite)?;
    let y_min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(KrigingModel {
        x,
        y,
        theta,
        mu: profile.mu,
        sigma2: profile.sigma2,
        nugget,
        types,
        chol: profile.chol,
        alpha: profile.alpha,
        rinv_one: profile.rinv_one,
        one_rinv_one: profile.one_rinv_one,
        y_min,
    })
}

impl KrigingModel {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.types.len()
    }

    pub fn training_rows(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn training_responses(&self) -> &[f64] {
        &self.y
    }

    /// Rebuilds a model from stored parameters without re-estimating theta,
    /// e.g. when reconstructing from a serialized model summary.
    pub fn from_parameters(
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
        types: Vec<DimType>,
        theta: Vec<f64>,
        nugget: f64,
    ) -> Result<KrigingModel, SurrogateError> {
        if x.len() < 2 {
            return Err(SurrogateError::TooFewPoints(x.len()));
        }
        let profile = profile_likelihood(&x, &y, &theta, &types, nugget)
            .ok_or(SurrogateError::NotPositiveDefinite)?;
        let y_min = y.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(KrigingModel {
            x,
            y,
            theta,
            mu: profile.mu,
            sigma2: profile.sigma2,
            nugget,
            types,
            chol: profile.chol,
            alpha: profile.alpha,
            rinv_one: profile.rinv_one,
            one_rinv_one: profile.one_rinv_one,
            y_min,
        })
    }

    /// BLUP mean and variance at a unit-scale point. The variance includes
    /// the correction for the estimated process mean and is floored at zero.
    pub fn predict(&self, query: &[f64]) -> Result<Prediction, SurrogateError> {
        if query.len() != self.dim() {
            return Err(SurrogateError::DimensionMismatch {
                expected: self.dim(),
                got: query.len(),
            });
        }
        let n = self.len();
        let r: Vec<f64> = self
            .x
            .iter()
            .map(|row| correlation(query, row, &self.theta, &self.types))
            .collect();
        let mean = self.mu + r.iter().zip(&self.alpha).map(|(a, b)| a * b).sum::<f64>();
        let rinv_r = solve_spd(&self.chol, n, &r);
        let r_rinv_r: f64 = r.iter().zip(&rinv_r).map(|(a, b)| a * b).sum();
        let one_rinv_r: f64 = self.rinv_one.iter().zip(&r).map(|(a, b)| a * b).sum();
        let correction = (1.0 - one_rinv_r) * (1.0 - one_rinv_r) / self.one_rinv_one;
        let variance = (self.sigma2 * (1.0 - r_rinv_r + correction)).max(0.0);
        Ok(Prediction { mean, variance })
    }
}

/// Collapses replicated rows to per-row means. Aggregation precedes fitting;
/// the nugget absorbs residual replicate noise.
pub fn aggregate_rows(x: &[Vec<f64>], y: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for (row, &resp) in x.iter().zip(y) {
        match rows.iter().position(|r| r == row) {
            Some(i) => {
                sums[i] += resp;
                counts[i] += 1;
            }
            None => {
                rows.push(row.clone());
                sums.push(resp);
                counts.push(1);
            }
        }
    }
    let means = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    (rows, means)
}
