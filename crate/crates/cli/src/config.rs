//! Run configuration: a single TOML document describing the space, the
//! evaluator and the loop controls. Command-line flags override file values.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Duration;

use smbo::evaluation::{ExternalCommand, ExternalObjective, Objective};
use smbo::mlp::MlpObjective;
use smbo::space::{ParamSpec, SearchSpace};
use smbo::tuner::ControlConfig;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_GRID_CAP: usize = 100_000;

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub space: SpaceSection,
    pub evaluator: Option<EvaluatorSection>,
    #[serde(default)]
    pub control: ControlSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub preset: Option<String>,
    pub params: Option<Vec<ParamSpec>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum EvaluatorSection {
    #[serde(rename = "builtin-mlp")]
    BuiltinMlp {
        #[serde(default = "default_validation_split")]
        validation_split: f64,
    },
    #[serde(rename = "external")]
    External {
        command: String,
        #[serde(default)]
        args: Vec<String>,
        #[serde(default = "default_timeout_secs")]
        timeout_secs: f64,
    },
}

fn default_validation_split() -> f64 {
    0.2
}

fn default_timeout_secs() -> f64 {
    300.0
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub fun_evals: Option<usize>,
    pub design_size: Option<usize>,
    pub repeats: Option<usize>,
    pub noise: Option<bool>,
    pub max_repeats: Option<usize>,
    pub candidate_pool: Option<usize>,
    pub local_refine: Option<usize>,
    pub grid_cap: Option<usize>,
}

/// Flag-level overrides shared by `tune` and `baseline`.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub preset: Option<String>,
}

/// Everything a run needs, after merging the file and the flags.
pub struct ResolvedRun {
    pub space: SearchSpace,
    pub evaluator: EvaluatorSection,
    pub control: ControlConfig,
    pub out: PathBuf,
    pub grid_cap: usize,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("cannot parse config {}", path.display()))
    }

    pub fn resolve(mut self, overrides: &Overrides) -> Result<ResolvedRun> {
        if let Some(preset) = &overrides.preset {
            self.space.preset = Some(preset.clone());
            self.space.params = None;
        }
        let space = match (&self.space.preset, &self.space.params) {
            (Some(name), None) => SearchSpace::preset(name)?,
            (None, Some(params)) => SearchSpace::new(params.clone()),
            (Some(_), Some(_)) => bail!("config must give either a space preset or inline params, not both"),
            (None, None) => bail!("config needs a [space] section with a preset or inline params"),
        };
        let report = space.validate();
        if !report.ok() {
            let lines: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            bail!("invalid search space:\n  {}", lines.join("\n  "));
        }

        // The demo presets exist for the bundled network; a missing evaluator
        // section defaults to it so `--preset` works without a config file.
        let evaluator = match (self.evaluator, &self.space.preset) {
            (Some(e), _) => e,
            (None, Some(_)) => EvaluatorSection::BuiltinMlp {
                validation_split: default_validation_split(),
            },
            (None, None) => bail!("config needs an [evaluator] section (exactly one)"),
        };
        if let EvaluatorSection::BuiltinMlp { validation_split } = &evaluator {
            if !(*validation_split > 0.0 && *validation_split < 1.0) {
                bail!("validation_split must lie in (0,1)");
            }
            let expected = [
                "dropout1",
                "dropout2",
                "units1",
                "units2",
                "lr",
                "epochs",
                "batch_size",
                "rho",
            ];
            let names: Vec<&str> = space.params.iter().map(|p| p.name.as_str()).collect();
            if names != expected {
                bail!(
                    "builtin-mlp needs the 8 network parameters {:?}, got {:?}",
                    expected,
                    names
                );
            }
        }

        let fun_evals = overrides
            .budget
            .or(self.control.fun_evals)
            .ok_or_else(|| anyhow::anyhow!("missing budget: set control.fun_evals or --budget"))?;
        let mut control = ControlConfig::new(&space, fun_evals);
        if let Some(v) = self.control.design_size {
            control.design_size = v;
        }
        if let Some(v) = self.control.repeats {
            control.repeats = v;
        }
        if let Some(v) = self.control.noise {
            control.noise = v;
        }
        if let Some(v) = self.control.max_repeats {
            control.max_repeats = v;
        }
        if let Some(v) = self.control.candidate_pool {
            control.candidate_pool = v;
        }
        if let Some(v) = self.control.local_refine {
            control.local_refine = v;
        }
        control.seed = overrides.seed.or(self.seed).unwrap_or(0);
        control.workers = overrides.workers.or(self.workers).unwrap_or(1);

        let out = overrides
            .out
            .clone()
            .or(self.out)
            .unwrap_or_else(|| PathBuf::from("smbo_run"));

        Ok(ResolvedRun {
            space,
            evaluator,
            control,
            out,
            grid_cap: self.control.grid_cap.unwrap_or(DEFAULT_GRID_CAP),
        })
    }
}

impl ResolvedRun {
    /// Instantiates the configured objective.
    pub fn objective(&self) -> Result<Box<dyn Objective>> {
        match &self.evaluator {
            EvaluatorSection::BuiltinMlp { validation_split } => {
                let objective =
                    MlpObjective::demo(self.space.clone(), *validation_split, self.control.seed)?;
                Ok(Box::new(objective))
            }
            EvaluatorSection::External {
                command,
                args,
                timeout_secs,
            } => Ok(Box::new(ExternalObjective {
                command: ExternalCommand {
                    program: command.clone(),
                    args: args.clone(),
                    timeout: Duration::from_secs_f64(*timeout_secs),
                },
                space: self.space.clone(),
            })),
        }
    }

    pub fn evaluator_description(&self) -> String {
        match &self.evaluator {
            EvaluatorSection::BuiltinMlp { validation_split } => {
                format!("builtin-mlp(validation_split={validation_split})")
            }
            EvaluatorSection::External {
                command,
                args,
                timeout_secs,
            } => format!("external({command} {}, timeout={timeout_secs}s)", args.join(" ")),
        }
    }
}
