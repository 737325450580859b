//! Executes tuning and baseline runs and writes their artifacts: the result
//! object, the best-so-far trace table, a machine-readable manifest and a
//! plain-text run log.

use anyhow::{Context, Result};
use serde::Serialize;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use smbo::tuner::{
    grid_search_with_stop, random_search_with_stop, tune_with_stop, ControlConfig, TunerResult,
};

use crate::config::{ResolvedRun, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BaselineMethod {
    Random,
    Grid,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    toolkit_version: &'static str,
    command: &'a str,
    seed: u64,
    budget: BudgetAccounting,
    evaluator: String,
    space: &'a [smbo::space::ParamSpec],
}

#[derive(Serialize)]
struct BudgetAccounting {
    fun_evals: usize,
    design_size: usize,
    repeats: usize,
    noise: bool,
}

fn stop_flag() -> Arc<AtomicBool> {
    let flag = Arc::new(AtomicBool::new(false));
    let handle = flag.clone();
    // A second Ctrl-C falls back to the default handler and kills the process.
    let _ = ctrlc::set_handler(move || {
        handle.store(true, std::sync::atomic::Ordering::Relaxed);
    });
    flag
}

pub fn cmd_tune(run: &ResolvedRun) -> Result<()> {
    let objective = run.objective()?;
    let stop = stop_flag();
    let result = tune_with_stop(objective.as_ref(), &run.space, &run.control, Some(&stop))?;
    write_outputs(run, "tune", &result)?;
    eprintln!(
        "{}: {} evaluations, best {} at {:?}",
        result.msg, result.count, result.ybest, result.xbest
    );
    Ok(())
}

pub fn cmd_baseline(
    run: &ResolvedRun,
    method: BaselineMethod,
    levels: Option<&[usize]>,
) -> Result<()> {
    let objective = run.objective()?;
    let stop = stop_flag();
    let (result, name) = match method {
        BaselineMethod::Random => (
            random_search_with_stop(
                objective.as_ref(),
                &run.space,
                run.control.fun_evals,
                run.control.repeats,
                run.control.seed,
                Some(&stop),
            )?,
            "baseline-random",
        ),
        BaselineMethod::Grid => {
            let levels = levels
                .filter(|l| !l.is_empty())
                .context("grid baseline needs --levels, one count per dimension")?;
            anyhow::ensure!(
                levels.len() == run.space.dim(),
                "--levels needs {} counts, got {}",
                run.space.dim(),
                levels.len()
            );
            (
                grid_search_with_stop(
                    objective.as_ref(),
                    &run.space,
                    levels,
                    run.grid_cap,
                    Some(&stop),
                )?,
                "baseline-grid",
            )
        }
    };
    write_outputs(run, name, &result)?;
    eprintln!(
        "{}: {} evaluations, best {} at {:?}",
        result.msg, result.count, result.ybest, result.xbest
    );
    Ok(())
}

fn write_outputs(run: &ResolvedRun, command: &str, result: &TunerResult) -> Result<()> {
    std::fs::create_dir_all(&run.out)
        .with_context(|| format!("cannot create output directory {}", run.out.display()))?;

    write_file(&run.out.join("result.json"), &result.to_json())?;
    write_trace(&run.out.join("trace.tsv"), result)?;

    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        toolkit_version: env!("CARGO_PKG_VERSION"),
        command,
        seed: run.control.seed,
        budget: BudgetAccounting {
            fun_evals: run.control.fun_evals,
            design_size: run.control.design_size,
            repeats: run.control.repeats,
            noise: run.control.noise,
        },
        evaluator: run.evaluator_description(),
        space: &run.space.params,
    };
    write_file(
        &run.out.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest)?,
    )?;
    write_log(&run.out.join("run.log"), command, &run.control, result)?;
    Ok(())
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))
}

fn write_trace(path: &Path, result: &TunerResult) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "# report: trace")?;
    writeln!(out, "eval\tybest")?;
    let design_evals = result.count - result.ybest_vec.len();
    for (t, v) in result.ybest_vec.iter().enumerate() {
        writeln!(out, "{}\t{}", design_evals + t + 1, v)?;
    }
    write_file(path, &String::from_utf8(out)?)
}

fn write_log(
    path: &Path,
    command: &str,
    control: &ControlConfig,
    result: &TunerResult,
) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "command: {command}")?;
    writeln!(
        out,
        "seed: {}  budget: {}  design: {}  repeats: {}  noise: {}",
        control.seed, control.fun_evals, control.design_size, control.repeats, control.noise
    )?;
    for (i, (row, y)) in result.x.iter().zip(&result.y).enumerate() {
        writeln!(
            out,
            "eval {:>4}: y = {:<22} x = [{}]",
            i + 1,
            y,
            row.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        )?;
    }
    for line in result.log_info.iter().flatten() {
        writeln!(out, "note: {line}")?;
    }
    writeln!(out, "{}: ybest = {}", result.msg, result.ybest)?;
    write_file(path, &String::from_utf8(out)?)
}
