//! Post-hoc statistics over tuning runs.
//!
//! These operations turn the evaluated configurations into summaries, a
//! linear model with inference, a regression tree with importance scores,
//! surrogate contour slices and box-plot data. Every operation is pure over
//! its inputs and emits a plot-ready delimited table via `write_table`.

use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};
use std::io::Write;
use thiserror::Error;

use crate::surrogate::{KrigingModel, SurrogateError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("empty input")]
    Empty,
    #[error("need more rows than columns: {rows} rows for {cols} coefficients")]
    TooFewRows { rows: usize, cols: usize },
    #[error("design matrix is rank deficient; collinear columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),
    #[error("contour needs two different dimensions")]
    SameDimension,
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
}

// ───────────────────────── summary statistics ─────────────────────────

/// Six-field summary in the classic print order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

/// Type-7 quantile: linear interpolation between order statistics at
/// `h = (n - 1) p`.
fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summary_stats(y: &[f64]) -> Result<SummaryStats, AnalysisError> {
    if y.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(SummaryStats {
        min: sorted[0],
        q1: quantile_type7(&sorted, 0.25),
        median: quantile_type7(&sorted, 0.5),
        mean: y.iter().sum::<f64>() / y.len() as f64,
        q3: quantile_type7(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

impl SummaryStats {
    pub fn write_table(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "# report: summary")?;
        writeln!(w, "min\tq1\tmedian\tmean\tq3\tmax")?;
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.min, self.q1, self.median, self.mean, self.q3, self.max
        )
    }
}

// ───────────────────────── ordinary least squares ─────────────────────────

/// Least-squares fit with the usual inference block.
#[derive(Debug, Clone)]
pub struct OlsSummary {
    /// Term names: intercept first, then one per column.
    pub terms: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub residual_std_error: f64,
    pub df_residual: usize,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_statistic: f64,
    pub f_p_value: f64,
    pub df_model: usize,
}

/// Two-sided p value of a t statistic with `df` degrees of freedom. The CDF
/// goes through the regularized incomplete beta function.
pub fn t_p_value(t: f64, df: usize) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("valid degrees of freedom");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

/// Student-t CDF used for the inference columns; exposed for verification
/// against sampling-based estimates.
pub fn t_cdf(t: f64, df: usize) -> f64 {
    StudentsT::new(0.0, 1.0, df as f64)
        .expect("valid degrees of freedom")
        .cdf(t)
}

/// Fits `y ~ 1 + X` by Householder QR on the natural-scale design.
pub fn ols_fit(x: &[Vec<f64>], y: &[f64], names: &[String]) -> Result<OlsSummary, AnalysisError> {
    let n = x.len();
    if n == 0 {
        return Err(AnalysisError::Empty);
    }
    let d = x[0].len();
    assert_eq!(names.len(), d, "one name per column");
    let p = d + 1;
    if n <= p {
        return Err(AnalysisError::TooFewRows { rows: n, cols: p });
    }

    // Design matrix with intercept, flattened row-major.
    let mut a = vec![0.0; n * p];
    for i in 0..n {
        a[i * p] = 1.0;
        for j in 0..d {
            a[i * p + j + 1] = x[i][j];
        }
    }
    let col_norms: Vec<f64> = (0..p)
        .map(|j| (0..n).map(|i| a[i * p + j] * a[i * p + j]).sum::<f64>().sqrt())
        .collect();
    let mut qty = y.to_vec();

    // Householder QR, applied in place; R accumulates in the upper triangle.
    for k in 0..p {
        let norm: f64 = (k..n).map(|i| a[i * p + k] * a[i * p + k]).sum::<f64>().sqrt();
        if norm > 0.0 {
            let alpha = if a[k * p + k] > 0.0 { -norm } else { norm };
            let mut v: Vec<f64> = (k..n).map(|i| a[i * p + k]).collect();
            v[0] -= alpha;
            let v_norm2: f64 = v.iter().map(|e| e * e).sum();
            if v_norm2 > 0.0 {
                for j in k..p {
                    let dot: f64 = (k..n).map(|i| v[i - k] * a[i * p + j]).sum();
                    let scale = 2.0 * dot / v_norm2;
                    for i in k..n {
                        a[i * p + j] -= scale * v[i - k];
                    }
                }
                let dot: f64 = (k..n).map(|i| v[i - k] * qty[i]).sum();
                let scale = 2.0 * dot / v_norm2;
                for i in k..n {
                    qty[i] -= scale * v[i - k];
                }
            }
        }
    }

    // Rank check on the R diagonal, relative to the column scale.
    let term_names: Vec<String> = std::iter::once("(Intercept)".to_string())
        .chain(names.iter().cloned())
        .collect();
    let deficient: Vec<String> = (0..p)
        .filter(|&j| a[j * p + j].abs() <= 1e-10 * (col_norms[j] + 1.0))
        .map(|j| term_names[j].clone())
        .collect();
    if !deficient.is_empty() {
        return Err(AnalysisError::RankDeficient(deficient));
    }

    // Back substitution: R beta = Q^T y.
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let mut sum = qty[i];
        for j in (i + 1)..p {
            sum -= a[i * p + j] * beta[j];
        }
        beta[i] = sum / a[i * p + i];
    }

    // Residuals on the original design.
    let fitted: Vec<f64> = (0..n)
        .map(|i| beta[0] + (0..d).map(|j| beta[j + 1] * x[i][j]).sum::<f64>())
        .collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(yi, fi)| yi - fi).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|yi| (yi - y_mean) * (yi - y_mean)).sum();

    let df_residual = n - p;
    let sigma2 = rss / df_residual as f64;

    // (X^T X)^-1 = R^-1 R^-T; the diagonal comes from the rows of R^-1.
    let mut rinv = vec![0.0; p * p];
    for col in 0..p {
        let mut e = vec![0.0; p];
        e[col] = 1.0;
        for i in (0..=col).rev() {
            let mut sum = e[i];
            for j in (i + 1)..=col {
                sum -= a[i * p + j] * rinv[j * p + col];
            }
            rinv[i * p + col] = sum / a[i * p + i];
        }
    }
    let std_errors: Vec<f64> = (0..p)
        .map(|i| {
            let diag: f64 = (i..p).map(|j| rinv[i * p + j] * rinv[i * p + j]).sum();
            (sigma2 * diag).sqrt()
        })
        .collect();

    let t_values: Vec<f64> = beta
        .iter()
        .zip(&std_errors)
        .map(|(b, se)| if *se > 0.0 { b / se } else { f64::NAN })
        .collect();
    let p_values: Vec<f64> = t_values.iter().map(|&t| t_p_value(t, df_residual)).collect();

    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let r_squared = r_squared.clamp(0.0, 1.0);
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / df_residual as f64;
    let f_statistic = ((tss - rss) / d as f64) / sigma2;
    let f_p_value = if f_statistic.is_finite() && f_statistic > 0.0 {
        let dist = FisherSnedecor::new(d as f64, df_residual as f64).expect("valid dof");
        1.0 - dist.cdf(f_statistic)
    } else {
        1.0
    };

    Ok(OlsSummary {
        terms: term_names,
        coefficients: beta,
        std_errors,
        t_values,
        p_values,
        residual_std_error: sigma2.sqrt(),
        df_residual,
        r_squared,
        adj_r_squared,
        f_statistic,
        f_p_value,
        df_model: d,
    })
}

impl OlsSummary {
    pub fn write_table(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "# report: ols")?;
        writeln!(
            w,
            "# residual_std_error: {} on {} degrees of freedom",
            self.residual_std_error, self.df_residual
        )?;
        writeln!(
            w,
            "# r_squared: {}  adj_r_squared: {}",
            self.r_squared, self.adj_r_squared
        )?;
        writeln!(
            w,
            "# f_statistic: {} on {} and {} df, p: {}",
            self.f_statistic, self.df_model, self.df_residual, self.f_p_value
        )?;
        writeln!(w, "term\testimate\tstd_error\tt_value\tp_value")?;
        for i in 0..self.terms.len() {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}",
                self.terms[i],
                self.coefficients[i],
                self.std_errors[i],
                self.t_values[i],
                self.p_values[i]
            )?;
        }
        Ok(())
    }
}

// ───────────────────────── regression tree ─────────────────────────

#[derive(Debug, Clone)]
pub enum TreeNode {
    Split {
        dim: usize,
        threshold: f64,
        mean: f64,
        count: usize,
        sse_reduction: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        mean: f64,
        count: usize,
    },
}

/// Binary CART regression tree, grown by greedy SSE reduction.
#[derive(Debug, Clone)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
    pub max_depth: usize,
    pub min_node: usize,
    pub dim: usize,
}

pub const TREE_DEFAULT_MAX_DEPTH: usize = 4;
pub const TREE_DEFAULT_MIN_NODE: usize = 5;

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    max_depth: usize,
    min_node: usize,
    nodes: Vec<TreeNode>,
}

fn node_stats(y: &[f64], idx: &[usize]) -> (f64, f64) {
    let n = idx.len() as f64;
    let sum: f64 = idx.iter().map(|&i| y[i]).sum();
    let mean = sum / n;
    let sse: f64 = idx.iter().map(|&i| (y[i] - mean) * (y[i] - mean)).sum();
    (mean, sse)
}

impl<'a> TreeBuilder<'a> {
    /// Best split of `idx`: candidate thresholds at midpoints between
    /// consecutive distinct sorted values, children at least `min_node`
    /// samples, ties broken by lowest dimension then lowest threshold.
    fn best_split(&self, idx: &[usize], parent_sse: f64) -> Option<(usize, f64, f64)> {
        let d = self.x[0].len();
        let mut best: Option<(usize, f64, f64)> = None;
        for dim in 0..d {
            let mut order: Vec<usize> = idx.to_vec();
            order.sort_by(|&a, &b| self.x[a][dim].partial_cmp(&self.x[b][dim]).unwrap());
            let values: Vec<f64> = order.iter().map(|&i| self.x[i][dim]).collect();
            let responses: Vec<f64> = order.iter().map(|&i| self.y[i]).collect();

            // prefix sums for O(1) SSE of each prefix/suffix
            let mut prefix_sum = 0.0;
            let mut prefix_sq = 0.0;
            let total_sum: f64 = responses.iter().sum();
            let total_sq: f64 = responses.iter().map(|v| v * v).sum();
            let n = order.len();
            for k in 0..n - 1 {
                prefix_sum += responses[k];
                prefix_sq += responses[k] * responses[k];
                if values[k + 1] <= values[k] {
                    continue; // not a boundary between distinct values
                }
                let left_n = k + 1;
                let right_n = n - left_n;
                if left_n < self.min_node || right_n < self.min_node {
                    continue;
                }
                let left_sse = prefix_sq - prefix_sum * prefix_sum / left_n as f64;
                let right_sum = total_sum - prefix_sum;
                let right_sse =
                    (total_sq - prefix_sq) - right_sum * right_sum / right_n as f64;
                let reduction = parent_sse - left_sse - right_sse;
                let threshold = 0.5 * (values[k] + values[k + 1]);
                let better = match &best {
                    None => reduction > 0.0,
                    Some((_, _, r)) => reduction > *r,
                };
                if better {
                    best = Some((dim, threshold, reduction));
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let (mean, sse) = node_stats(self.y, &idx);
        let can_split = depth < self.max_depth && idx.len() >= 2 * self.min_node;
        let split = if can_split {
            self.best_split(&idx, sse)
        } else {
            None
        };
        match split {
            Some((dim, threshold, reduction)) => {
                let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
                    idx.iter().partition(|&&i| self.x[i][dim] <= threshold);
                let slot = self.nodes.len();
                self.nodes.push(TreeNode::Leaf { mean, count: 0 }); // placeholder
                let left = self.grow(left_idx, depth + 1);
                let right = self.grow(right_idx, depth + 1);
                self.nodes[slot] = TreeNode::Split {
                    dim,
                    threshold,
                    mean,
                    count: idx.len(),
                    sse_reduction: reduction,
                    left,
                    right,
                };
                slot
            }
            None => {
                self.nodes.push(TreeNode::Leaf {
                    mean,
                    count: idx.len(),
                });
                self.nodes.len() - 1
            }
        }
    }
}

pub fn tree_fit(
    x: &[Vec<f64>],
    y: &[f64],
    max_depth: usize,
    min_node: usize,
) -> Result<RegressionTree, AnalysisError> {
    let n = x.len();
    if n == 0 {
        return Err(AnalysisError::Empty);
    }
    assert!(n >= 2 * min_node, "need at least 2 * min_node samples");
    let mut builder = TreeBuilder {
        x,
        y,
        max_depth,
        min_node,
        nodes: Vec::new(),
    };
    builder.grow((0..n).collect(), 0);
    Ok(RegressionTree {
        nodes: builder.nodes,
        max_depth,
        min_node,
        dim: x[0].len(),
    })
}

impl RegressionTree {
    pub fn predict(&self, point: &[f64]) -> f64 {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                TreeNode::Leaf { mean, .. } => return *mean,
                TreeNode::Split {
                    dim,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if point[*dim] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn leaf_count_total(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| match n {
                TreeNode::Leaf { count, .. } => *count,
                _ => 0,
            })
            .sum()
    }

    pub fn n_splits(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Split { .. }))
            .count()
    }

    pub fn write_table(&self, w: &mut impl Write, names: &[String]) -> std::io::Result<()> {
        writeln!(w, "# report: tree")?;
        writeln!(w, "# max_depth: {}  min_node: {}", self.max_depth, self.min_node)?;
        writeln!(w, "node\tkind\tdim\tthreshold\tmean\tcount\tsse_reduction\tleft\tright")?;
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                TreeNode::Split {
                    dim,
                    threshold,
                    mean,
                    count,
                    sse_reduction,
                    left,
                    right,
                } => writeln!(
                    w,
                    "{i}\tsplit\t{}\t{threshold}\t{mean}\t{count}\t{sse_reduction}\t{left}\t{right}",
                    names.get(*dim).cloned().unwrap_or_else(|| format!("x{}", dim + 1)),
                )?,
                TreeNode::Leaf { mean, count } => {
                    writeln!(w, "{i}\tleaf\t\t\t{mean}\t{count}\t\t\t")?
                }
            }
        }
        Ok(())
    }
}

/// Per-dimension shares of the total SSE reduction. `has_splits` is false for
/// a single-leaf tree, in which case the scores are all zero.
#[derive(Debug, Clone)]
pub struct Importance {
    pub scores: Vec<f64>,
    pub has_splits: bool,
}

pub fn tree_importance(tree: &RegressionTree) -> Importance {
    let mut scores = vec![0.0; tree.dim];
    for node in &tree.nodes {
        if let TreeNode::Split {
            dim, sse_reduction, ..
        } = node
        {
            scores[*dim] += sse_reduction;
        }
    }
    let total: f64 = scores.iter().sum();
    if total <= 0.0 {
        return Importance {
            scores: vec![0.0; tree.dim],
            has_splits: false,
        };
    }
    for s in scores.iter_mut() {
        *s /= total;
    }
    Importance {
        scores,
        has_splits: true,
    }
}

impl Importance {
    pub fn write_table(&self, w: &mut impl Write, names: &[String]) -> std::io::Result<()> {
        writeln!(w, "# report: importance")?;
        writeln!(w, "# has_splits: {}", self.has_splits)?;
        writeln!(w, "parameter\tshare")?;
        for (i, s) in self.scores.iter().enumerate() {
            writeln!(
                w,
                "{}\t{}",
                names.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1)),
                s
            )?;
        }
        Ok(())
    }
}

// ───────────────────────── contour slices ─────────────────────────

/// Surrogate predictions on a unit-scale grid over two dimensions, the
/// remaining coordinates fixed at an anchor.
#[derive(Debug, Clone)]
pub struct ContourGrid {
    pub dim_i: usize,
    pub dim_j: usize,
    pub coords: Vec<f64>,
    /// Row-major `resolution x resolution`: entry `(a, b)` is the prediction
    /// at `(coords[a], coords[b])` on dimensions `(dim_i, dim_j)`.
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub anchor: Vec<f64>,
    /// True when the surrogate was refitted from the archive rather than
    /// taken from the run's serialized summary.
    pub refit: bool,
}

pub fn contour_grid(
    model: &KrigingModel,
    dim_i: usize,
    dim_j: usize,
    anchor: &[f64],
    resolution: usize,
) -> Result<ContourGrid, AnalysisError> {
    if dim_i == dim_j {
        return Err(AnalysisError::SameDimension);
    }
    assert!(resolution >= 1);
    let coords: Vec<f64> = if resolution == 1 {
        vec![0.5]
    } else {
        (0..resolution)
            .map(|k| k as f64 / (resolution - 1) as f64)
            .collect()
    };
    let mut mean = Vec::with_capacity(resolution * resolution);
    let mut variance = Vec::with_capacity(resolution * resolution);
    let mut point = anchor.to_vec();
    for &vi in &coords {
        for &vj in &coords {
            point[dim_i] = vi;
            point[dim_j] = vj;
            let pred = model.predict(&point)?;
            mean.push(pred.mean);
            variance.push(pred.variance);
        }
    }
    Ok(ContourGrid {
        dim_i,
        dim_j,
        coords,
        mean,
        variance,
        anchor: anchor.to_vec(),
        refit: false,
    })
}

impl ContourGrid {
    pub fn write_table(&self, w: &mut impl Write, names: &[String]) -> std::io::Result<()> {
        let name = |d: usize| {
            names
                .get(d)
                .cloned()
                .unwrap_or_else(|| format!("x{}", d + 1))
        };
        writeln!(w, "# report: contour")?;
        writeln!(w, "# dims: {} x {}", name(self.dim_i), name(self.dim_j))?;
        writeln!(w, "# refit: {}", self.refit)?;
        writeln!(
            w,
            "# anchor: {}",
            self.anchor
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )?;
        writeln!(w, "u_{}\tu_{}\tmean\tvariance", name(self.dim_i), name(self.dim_j))?;
        let r = self.coords.len();
        for a in 0..r {
            for b in 0..r {
                writeln!(
                    w,
                    "{}\t{}\t{}\t{}",
                    self.coords[a],
                    self.coords[b],
                    self.mean[a * r + b],
                    self.variance[a * r + b]
                )?;
            }
        }
        Ok(())
    }
}

// ───────────────────────── box-plot data ─────────────────────────

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Per-dimension spread of the evaluated configurations plus named reference
/// configurations (for example best/worst), passed through verbatim.
#[derive(Debug, Clone)]
pub struct BoxplotStats {
    pub per_dim: Vec<FiveNumber>,
    pub annotations: Vec<(String, Vec<f64>)>,
}

pub fn boxplot_stats(
    x: &[Vec<f64>],
    annotations: &[(String, Vec<f64>)],
) -> Result<BoxplotStats, AnalysisError> {
    if x.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let d = x[0].len();
    let mut per_dim = Vec::with_capacity(d);
    for j in 0..d {
        let column: Vec<f64> = x.iter().map(|row| row[j]).collect();
        let s = summary_stats(&column)?;
        per_dim.push(FiveNumber {
            min: s.min,
            q1: s.q1,
            median: s.median,
            q3: s.q3,
            max: s.max,
        });
    }
    Ok(BoxplotStats {
        per_dim,
        annotations: annotations.to_vec(),
    })
}

impl BoxplotStats {
    pub fn write_table(&self, w: &mut impl Write, names: &[String]) -> std::io::Result<()> {
        writeln!(w, "# report: box")?;
        write!(w, "parameter\tmin\tq1\tmedian\tq3\tmax")?;
        for (label, _) in &self.annotations {
            write!(w, "\t{label}")?;
        }
        writeln!(w)?;
        for (j, f) in self.per_dim.iter().enumerate() {
            write!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}",
                names.get(j).cloned().unwrap_or_else(|| format!("x{}", j + 1)),
                f.min,
                f.q1,
                f.median,
                f.q3,
                f.max
            )?;
            for (_, coords) in &self.annotations {
                write!(w, "\t{}", coords.get(j).copied().unwrap_or(f64::NAN))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
