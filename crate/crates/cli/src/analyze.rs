//! Post-hoc reports over a stored result file.

use anyhow::{bail, Context, Result};
use std::io::Write;
use std::path::{Path, PathBuf};

use smbo::analysis::{
    boxplot_stats, contour_grid, ols_fit, summary_stats, tree_fit, tree_importance,
    AnalysisError, TREE_DEFAULT_MAX_DEPTH, TREE_DEFAULT_MIN_NODE,
};
use smbo::space::SearchSpace;
use smbo::surrogate::{aggregate_rows, kriging_fit, DimType, FitControl, KrigingModel};
use smbo::tuner::TunerResult;

pub const VALID_REPORTS: &str = "summary, trace, ols, tree, importance, box, contour:i,j";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Report {
    Summary,
    Trace,
    Ols,
    Tree,
    Importance,
    Box,
    /// 1-based dimension indices.
    Contour(usize, usize),
}

/// Splits comma-separated report lists while keeping `contour(i,j)` intact.
pub fn split_reports(values: &[String]) -> Vec<String> {
    let joined = values.join(",");
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for c in joined.chars() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                current.push(c);
            }
            ',' if depth == 0 => {
                if !current.trim().is_empty() {
                    out.push(current.trim().to_string());
                }
                current.clear();
            }
            _ => current.push(c),
        }
    }
    if !current.trim().is_empty() {
        out.push(current.trim().to_string());
    }
    out
}

pub fn parse_report(text: &str) -> Result<Report> {
    let t = text.trim();
    match t {
        "summary" => return Ok(Report::Summary),
        "trace" => return Ok(Report::Trace),
        "ols" => return Ok(Report::Ols),
        "tree" => return Ok(Report::Tree),
        "importance" => return Ok(Report::Importance),
        "box" => return Ok(Report::Box),
        _ => {}
    }
    // contour:1:5 or contour(1,5)
    if let Some(rest) = t
        .strip_prefix("contour(")
        .and_then(|r| r.strip_suffix(')'))
        .map(|r| r.replace(',', ":"))
        .or_else(|| t.strip_prefix("contour:").map(|r| r.to_string()))
    {
        let dims: Vec<&str> = rest.split(':').collect();
        if dims.len() == 2 {
            let i: usize = dims[0].trim().parse().context("contour dimension index")?;
            let j: usize = dims[1].trim().parse().context("contour dimension index")?;
            if i == 0 || j == 0 {
                bail!("contour dimensions are 1-based");
            }
            return Ok(Report::Contour(i, j));
        }
    }
    bail!("unknown report `{t}`; valid reports: {VALID_REPORTS}")
}


/// Sidecar information recovered from the run's manifest, when present.
struct RunContext {
    space: Option<SearchSpace>,
}

fn load_context(result_path: &Path, manifest: Option<&Path>) -> RunContext {
    let path = manifest
        .map(PathBuf::from)
        .unwrap_or_else(|| result_path.with_file_name("manifest.json"));
    let space = std::fs::read_to_string(path)
        .ok()
        .and_then(|text| serde_json::from_str::<serde_json::Value>(&text).ok())
        .and_then(|v| {
            serde_json::from_value::<Vec<smbo::space::ParamSpec>>(v.get("space")?.clone()).ok()
        })
        .map(SearchSpace::new);
    RunContext { space }
}

pub fn cmd_analyze(
    result_path: &Path,
    reports: &[Report],
    out_dir: &Path,
    manifest: Option<&Path>,
) -> Result<()> {
    let text = std::fs::read_to_string(result_path)
        .with_context(|| format!("cannot read result file {}", result_path.display()))?;
    let result = TunerResult::from_json(&text)
        .with_context(|| format!("cannot parse result file {}", result_path.display()))?;
    let context = load_context(result_path, manifest);
    std::fs::create_dir_all(out_dir)?;

    let d = result.x.first().map(|r| r.len()).unwrap_or(0);
    let names: Vec<String> = match &context.space {
        Some(space) => space.params.iter().map(|p| p.name.clone()).collect(),
        None => (0..d).map(|i| format!("x{}", i + 1)).collect(),
    };

    for report in reports {
        let (file_name, table) = render_report(&result, &context, &names, report)?;
        let path = out_dir.join(file_name);
        std::fs::write(&path, table)
            .with_context(|| format!("cannot write {}", path.display()))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn render_report(
    result: &TunerResult,
    context: &RunContext,
    names: &[String],
    report: &Report,
) -> Result<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let file = match report {
        Report::Summary => {
            summary_stats(&result.y)?.write_table(&mut out)?;
            "summary.tsv".to_string()
        }
        Report::Trace => {
            writeln!(out, "# report: trace")?;
            writeln!(out, "eval\tybest")?;
            let design_evals = result.count - result.ybest_vec.len();
            for (t, v) in result.ybest_vec.iter().enumerate() {
                writeln!(out, "{}\t{}", design_evals + t + 1, v)?;
            }
            "trace.tsv".to_string()
        }
        Report::Ols => {
            let fit = ols_fit(&result.x, &result.y, names).map_err(|e| match e {
                AnalysisError::TooFewRows { rows, cols } => anyhow::anyhow!(
                    "insufficient rows for ols: {rows} evaluations for {cols} coefficients"
                ),
                other => anyhow::Error::from(other),
            })?;
            fit.write_table(&mut out)?;
            "ols.tsv".to_string()
        }
        Report::Tree => {
            let tree = tree_fit(
                &result.x,
                &result.y,
                TREE_DEFAULT_MAX_DEPTH,
                TREE_DEFAULT_MIN_NODE,
            )?;
            tree.write_table(&mut out, names)?;
            "tree.tsv".to_string()
        }
        Report::Importance => {
            let tree = tree_fit(
                &result.x,
                &result.y,
                TREE_DEFAULT_MAX_DEPTH,
                TREE_DEFAULT_MIN_NODE,
            )?;
            tree_importance(&tree).write_table(&mut out, names)?;
            "importance.tsv".to_string()
        }
        Report::Box => {
            let stats = boxplot_stats(&result.x, &annotations(result))?;
            stats.write_table(&mut out, names)?;
            "box.tsv".to_string()
        }
        Report::Contour(i, j) => {
            let space = context
                .space
                .as_ref()
                .context("contour needs the run manifest for the search space (pass --manifest)")?;
            let d = space.dim();
            anyhow::ensure!(
                (1..=d).contains(i) && (1..=d).contains(j),
                "contour dimensions must lie in 1..={d}"
            );
            let (model, refit) = rebuild_surrogate(result, space)?;
            let anchor = space.to_unit(&space.config_from_natural(&result.xbest)?)?;
            let mut grid = contour_grid(&model, i - 1, j - 1, &anchor, 20)?;
            grid.refit = refit;
            grid.write_table(&mut out, names)?;
            format!("contour_{i}_{j}.tsv")
        }
    };
    Ok((file, out))
}

/// Named reference configurations shown on the box plots: the best row, the
/// worst row overall and the worst row of the tuning phase.
fn annotations(result: &TunerResult) -> Vec<(String, Vec<f64>)> {
    let mut out = vec![("best".to_string(), result.xbest.clone())];
    let argmax = |range: std::ops::Range<usize>| -> Option<usize> {
        range.fold(None, |acc: Option<usize>, i| match acc {
            Some(j) if result.y[j] >= result.y[i] => Some(j),
            _ if result.y[i].is_finite() => Some(i),
            _ => acc,
        })
    };
    if let Some(i) = argmax(0..result.y.len()) {
        out.push(("worst".to_string(), result.x[i].clone()));
    }
    let design_evals = result.count - result.ybest_vec.len();
    if let Some(i) = argmax(design_evals..result.y.len()) {
        out.push(("worst_tuning".to_string(), result.x[i].clone()));
    }
    out
}

/// Reinstates the run's surrogate: from the serialized summary when present,
/// otherwise by refitting on the aggregated archive (flagged in the output).
fn rebuild_surrogate(result: &TunerResult, space: &SearchSpace) -> Result<(KrigingModel, bool)> {
    let mut unit_rows = Vec::with_capacity(result.x.len());
    for row in &result.x {
        unit_rows.push(space.to_unit(&space.config_from_natural(row)?)?);
    }
    let (rows, means) = aggregate_rows(&unit_rows, &result.y);
    let types = DimType::from_space(space);
    match &result.model_fit {
        Some(fit) => {
            let model =
                KrigingModel::from_parameters(rows, means, types, fit.theta.clone(), fit.nugget)?;
            Ok((model, false))
        }
        None => {
            let model = kriging_fit(rows, means, types, &FitControl::default())?;
            Ok((model, true))
        }
    }
}
