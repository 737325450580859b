//! Command-line front end: `tune`, `baseline`, `analyze` and `demo`.

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

mod analyze;
mod config;
mod demo;
mod run;

use analyze::{cmd_analyze, parse_report, split_reports};
use config::{Overrides, RunConfig};
use demo::{cmd_demo, DemoArgs};
use run::{cmd_baseline, cmd_tune, BaselineMethod};

#[derive(Parser)]
#[command(
    name = "smbo",
    version,
    about = "Sequential model-based hyperparameter tuning with analysis tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML run configuration (space, evaluator, control)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config file
    #[arg(long)]
    seed: Option<u64>,
    /// Total objective-evaluation budget; overrides control.fun_evals
    #[arg(long)]
    budget: Option<usize>,
    /// Output directory for result.json, trace.tsv, manifest.json, run.log
    #[arg(long)]
    out: Option<PathBuf>,
    /// Concurrent objective evaluations within one plan
    #[arg(long)]
    workers: Option<usize>,
    /// Space preset name (table2 | section34); overrides the config file
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sequential model-based tuner
    Tune(RunArgs),
    /// Run a baseline with identical budget accounting and outputs
    Baseline {
        #[arg(value_enum)]
        method: BaselineMethod,
        /// Grid levels per dimension, e.g. --levels 4,4
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Write analysis tables for a stored result file
    Analyze {
        /// Path to a result.json produced by tune or baseline
        #[arg(long)]
        result: PathBuf,
        /// Comma-separated reports: summary, trace, ols, tree, importance,
        /// box, contour(i,j)
        #[arg(long, required = true)]
        reports: Vec<String>,
        /// Output directory for the report tables
        #[arg(long, default_value = "smbo_reports")]
        out: PathBuf,
        /// Manifest with the space definition (default: next to the result)
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Train the bundled network once, as recommended before tuning; also
    /// serves as a reference child process for the external protocol
    Demo(DemoArgs),
}

fn resolve(args: &RunArgs) -> Result<config::ResolvedRun> {
    let file = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    file.resolve(&Overrides {
        seed: args.seed,
        budget: args.budget,
        out: args.out.clone(),
        workers: args.workers,
        preset: args.preset.clone(),
    })
}

fn main() {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Tune(args) => resolve(args).and_then(|run| cmd_tune(&run)),
        Command::Baseline {
            method,
            levels,
            args,
        } => resolve(args).and_then(|run| cmd_baseline(&run, *method, levels.as_deref())),
        Command::Analyze {
            result,
            reports,
            out,
            manifest,
        } => split_reports(reports)
            .iter()
            .map(|r| parse_report(r))
            .collect::<Result<Vec<_>>>()
            .and_then(|reports| cmd_analyze(result, &reports, out, manifest.as_deref())),
        Command::Demo(args) => cmd_demo(args),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
