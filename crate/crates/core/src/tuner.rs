//! The sequential model-based optimization loop and its baselines.
//!
//! `tune` evaluates an initial Latin hypercube design, then iterates: fit a
//! Kriging surrogate on the aggregated archive, propose the candidate with
//! the best expected improvement, evaluate it (with simple intensification
//! when noise handling is enabled) and update the archive. The run stops when
//! the evaluation budget is spent and returns a result object with the
//! best-so-far trace and a summary of the final surrogate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::{grid_design, latin_hypercube, random_design, DesignError};
use crate::evaluation::{EvalStatus, Objective};
use crate::space::{Config, SearchSpace, SpaceError};
use crate::surrogate::{
    expected_improvement, kriging_fit, DimType, FitControl, KrigingModel, NuggetMode,
    THETA_LOWER, THETA_UPPER,
};

#[derive(Debug, Error)]
pub enum TunerError {
    #[error("search space is invalid: {0}")]
    InvalidSpace(String),
    #[error("budget of {fun_evals} cannot cover the initial design ({design} configs x {repeats} repeats)")]
    BudgetTooSmall {
        fun_evals: usize,
        design: usize,
        repeats: usize,
    },
    #[error("control counts must all be at least 1")]
    ZeroControl,
    #[error("first objective evaluation failed; nothing to impute from")]
    FirstEvaluationFailed,
    #[error("interrupted before any evaluation completed")]
    InterruptedBeforeStart,
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Loop configuration. `design_size` defaults to three configurations per
/// dimension; `repeats` is 1 in deterministic mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControlConfig {
    pub fun_evals: usize,
    pub design_size: usize,
    pub repeats: usize,
    pub noise: bool,
    pub max_repeats: usize,
    pub candidate_pool: usize,
    pub local_refine: usize,
    pub seed: u64,
    pub workers: usize,
}

impl ControlConfig {
    /// Deterministic-mode defaults for a given space and budget.
    pub fn new(space: &SearchSpace, fun_evals: usize) -> ControlConfig {
        ControlConfig {
            fun_evals,
            design_size: 3 * space.dim(),
            repeats: 1,
            noise: false,
            max_repeats: 8,
            candidate_pool: 1000,
            local_refine: 10,
            seed: 0,
            workers: 1,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> ControlConfig {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<(), TunerError> {
        if self.design_size == 0
            || self.repeats == 0
            || self.max_repeats == 0
            || self.candidate_pool == 0
            || self.fun_evals == 0
            || self.workers == 0
        {
            return Err(TunerError::ZeroControl);
        }
        if self.fun_evals < self.design_size * self.repeats {
            return Err(TunerError::BudgetTooSmall {
                fun_evals: self.fun_evals,
                design: self.design_size,
                repeats: self.repeats,
            });
        }
        Ok(())
    }
}

/// Per-configuration evaluation history. Entries stay in first-seen order,
/// which also resolves incumbent ties (earliest wins).
#[derive(Debug, Clone, Default)]
pub struct Archive {
    pub entries: Vec<ArchiveEntry>,
}

#[derive(Debug, Clone)]
pub struct ArchiveEntry {
    pub config: Config,
    /// Canonical unit-cube coordinates of the repaired configuration.
    pub unit: Vec<f64>,
    pub responses: Vec<f64>,
    pub first_seen: usize,
}

impl Archive {
    pub fn find(&self, unit: &[f64]) -> Option<usize> {
        self.entries.iter().position(|e| e.unit == unit)
    }

    pub fn record(&mut self, config: Config, unit: Vec<f64>, response: f64, iteration: usize) {
        match self.find(&unit) {
            Some(i) => self.entries[i].responses.push(response),
            None => self.entries.push(ArchiveEntry {
                config,
                unit,
                responses: vec![response],
                first_seen: iteration,
            }),
        }
    }

    pub fn mean(&self, i: usize) -> f64 {
        let e = &self.entries[i];
        e.responses.iter().sum::<f64>() / e.responses.len() as f64
    }

    /// Index and aggregated response of the incumbent; earliest entry wins ties.
    pub fn best(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.entries.len() {
            let mean = self.mean(i);
            if best.map_or(true, |(_, b)| mean < b) {
                best = Some((i, mean));
            }
        }
        best
    }

    /// Aggregated design for surrogate fitting: unique unit rows with
    /// per-configuration mean responses.
    pub fn aggregated(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let rows = self.entries.iter().map(|e| e.unit.clone()).collect();
        let means = (0..self.entries.len()).map(|i| self.mean(i)).collect();
        (rows, means)
    }

    pub fn worst_mean(&self) -> Option<f64> {
        (0..self.entries.len())
            .map(|i| self.mean(i))
            .fold(None, |acc, m| Some(acc.map_or(m, |a: f64| a.max(m))))
    }
}

/// Summary of a fitted surrogate, as embedded in the result object.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFit {
    #[serde(rename = "thetaLower")]
    pub theta_lower: f64,
    #[serde(rename = "thetaUpper")]
    pub theta_upper: f64,
    pub types: Vec<String>,
    pub theta: Vec<f64>,
    pub mu: f64,
    pub sigma2: f64,
    pub nugget: f64,
    /// Smallest aggregated response seen by the surrogate (the EI incumbent).
    pub min: f64,
}

impl ModelFit {
    pub fn from_model(model: &KrigingModel) -> ModelFit {
        ModelFit {
            theta_lower: THETA_LOWER,
            theta_upper: THETA_UPPER,
            types: model.types.iter().map(|t| t.as_str().to_string()).collect(),
            theta: model.theta.clone(),
            mu: model.mu,
            sigma2: model.sigma2,
            nugget: model.nugget,
            min: model.y_min,
        }
    }
}

/// The result object of a tuning or baseline run.
///
/// `x` and `y` hold one row per objective evaluation in evaluation order
/// (natural scale; factor levels encoded as indices). `ybest` is the smallest
/// aggregated per-configuration response and `ybestVec` the best-so-far trace
/// over post-design evaluations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TunerResult {
    pub xbest: Vec<f64>,
    pub ybest: f64,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    #[serde(rename = "logInfo")]
    pub log_info: Option<Vec<String>>,
    pub count: usize,
    pub msg: String,
    #[serde(rename = "modelFit")]
    pub model_fit: Option<ModelFit>,
    #[serde(rename = "ybestVec")]
    pub ybest_vec: Vec<f64>,
}

impl TunerResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<TunerResult, serde_json::Error> {
        serde_json::from_str(text)
    }
}

const MSG_BUDGET: &str = "budget exhausted";
const MSG_INTERRUPTED: &str = "interrupted";

type StopFlag<'a> = Option<&'a std::sync::atomic::AtomicBool>;

fn stopped(stop: StopFlag) -> bool {
    stop.is_some_and(|f| f.load(std::sync::atomic::Ordering::Relaxed))
}

/// Book-keeping shared by the tuner and the baselines.
struct RunState<'a> {
    space: &'a SearchSpace,
    archive: Archive,
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    trace: Vec<f64>,
    best_so_far: f64,
    design_evals: usize,
    log: Vec<String>,
    evals: usize,
    seed: u64,
}

impl<'a> RunState<'a> {
    fn new(space: &'a SearchSpace, design_evals: usize, seed: u64) -> RunState<'a> {
        RunState {
            space,
            archive: Archive::default(),
            x: Vec::new(),
            y: Vec::new(),
            trace: Vec::new(),
            best_so_far: f64::INFINITY,
            design_evals,
            log: Vec::new(),
            evals: 0,
            seed,
        }
    }

    fn eval_seed(&self) -> u64 {
        self.seed
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(self.evals as u64 + 1))
    }

    /// Records one objective evaluation, imputing failures with the worst
    /// aggregated response observed so far.
    fn absorb(
        &mut self,
        config: Config,
        unit: Vec<f64>,
        record: &crate::evaluation::EvalRecord,
        iteration: usize,
    ) -> Result<(), TunerError> {
        let response = match (record.status, record.val_loss) {
            (EvalStatus::Ok, Some(v)) if v.is_finite() => v,
            (status, _) => {
                let Some(worst) = self.archive.worst_mean() else {
                    return Err(TunerError::FirstEvaluationFailed);
                };
                self.log.push(format!(
                    "evaluation {} status {:?}: imputed worst aggregated response {}",
                    self.evals, status, worst
                ));
                worst
            }
        };
        self.x.push(self.space.natural_vec(&config));
        self.y.push(response);
        self.archive.record(config, unit, response, iteration);
        self.evals += 1;
        let current = self.archive.best().map(|(_, b)| b).unwrap();
        self.best_so_far = self.best_so_far.min(current);
        if self.evals > self.design_evals {
            self.trace.push(self.best_so_far);
        }
        Ok(())
    }

    fn finish(self, msg: &str, model_fit: Option<ModelFit>) -> TunerResult {
        let (best_id, ybest) = self.archive.best().expect("at least one evaluation");
        let xbest = self.space.natural_vec(&self.archive.entries[best_id].config);
        TunerResult {
            xbest,
            ybest,
            x: self.x,
            y: self.y,
            log_info: if self.log.is_empty() {
                None
            } else {
                Some(self.log)
            },
            count: self.evals,
            msg: msg.to_string(),
            model_fit,
            ybest_vec: self.trace,
        }
    }
}

/// Evaluates `(config, seed)` pairs in plan order, fanning out over at most
/// `workers` threads. Results merge deterministically by plan position.
fn evaluate_plan(
    objective: &dyn Objective,
    items: &[(Config, u64)],
    workers: usize,
) -> Vec<crate::evaluation::EvalRecord> {
    if workers <= 1 || items.len() <= 1 {
        return items
            .iter()
            .map(|(c, s)| objective.evaluate(c, *s))
            .collect();
    }
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|(c, s)| objective.evaluate(c, *s))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("evaluator thread panicked"))
            .collect()
    })
}

/// One evaluation slot of an intensification plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanTarget {
    Incumbent,
    Candidate(usize),
}

/// Simple intensification: re-evaluate the incumbent once (up to
/// `max_repeats`) and give each new candidate as many replicates as the
/// incumbent currently has (capped). The flat plan is truncated to
/// `budget_left` in listed order. With noise handling off, every candidate
/// is evaluated exactly once and the incumbent is left alone.
pub fn intensify(
    incumbent_replicates: usize,
    n_candidates: usize,
    max_repeats: usize,
    budget_left: usize,
    noise: bool,
) -> Vec<PlanTarget> {
    let mut plan = Vec::new();
    if noise {
        if incumbent_replicates < max_repeats {
            plan.push(PlanTarget::Incumbent);
        }
        let per_candidate = incumbent_replicates.min(max_repeats);
        for c in 0..n_candidates {
            for _ in 0..per_candidate {
                plan.push(PlanTarget::Candidate(c));
            }
        }
    } else {
        for c in 0..n_candidates {
            plan.push(PlanTarget::Candidate(c));
        }
    }
    plan.truncate(budget_left);
    plan
}

/// Expected-improvement candidate search: score a uniform pool, refine the
/// top entries with Nelder-Mead inside the unit cube, then return the best
/// `n_cand` distinct repaired configurations not already archived. When the
/// whole surface shows no improvement (max EI below 1e-12), space-filling
/// maximin points are returned instead.
pub fn propose_candidates(
    model: &KrigingModel,
    space: &SearchSpace,
    n_cand: usize,
    y_min: f64,
    archive: &Archive,
    pool_size: usize,
    local_refine: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let d = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ei_at = |u: &[f64]| -> f64 {
        model
            .predict(u)
            .map(|p| expected_improvement(&p, y_min))
            .unwrap_or(0.0)
    };

    let mut pool: Vec<(Vec<f64>, f64)> = (0..pool_size)
        .map(|_| {
            let u: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let ei = ei_at(&u);
            (u, ei)
        })
        .collect();
    pool.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());

    let lower = vec![0.0; d];
    let upper = vec![1.0; d];
    let mut scored = pool.clone();
    for (start, _) in pool.iter().take(local_refine) {
        let (refined, neg_ei) = crate::optim::nelder_mead(
            |u| -ei_at(u),
            start,
            &lower,
            &upper,
            60,
        );
        scored.push((refined, -neg_ei));
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let max_ei = scored.first().map(|(_, e)| *e).unwrap_or(0.0);

    let mut chosen: Vec<Vec<f64>> = Vec::new();
    if max_ei > 1e-12 {
        for (u, _) in &scored {
            if chosen.len() == n_cand {
                break;
            }
            let Ok(config) = space.repair(u) else { continue };
            let Ok(canonical) = space.to_unit(&config) else { continue };
            if archive.find(&canonical).is_none() && !chosen.contains(&canonical) {
                chosen.push(canonical);
            }
        }
    }
    if chosen.len() < n_cand {
        // Space-filling fallback: greedily maximize the minimum distance to
        // the archive and to already chosen points.
        let mut occupied: Vec<Vec<f64>> = archive.entries.iter().map(|e| e.unit.clone()).collect();
        occupied.extend(chosen.iter().cloned());
        let fallback_pool: Vec<Vec<f64>> = (0..pool_size)
            .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
            .collect();
        while chosen.len() < n_cand {
            let best = fallback_pool
                .iter()
                .filter_map(|u| {
                    let config = space.repair(u).ok()?;
                    let canonical = space.to_unit(&config).ok()?;
                    if archive.find(&canonical).is_some() || chosen.contains(&canonical) {
                        return None;
                    }
                    let min_dist = occupied
                        .iter()
                        .map(|o| {
                            canonical
                                .iter()
                                .zip(o)
                                .map(|(a, b)| (a - b) * (a - b))
                                .sum::<f64>()
                        })
                        .fold(f64::INFINITY, f64::min);
                    Some((canonical, min_dist))
                })
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            match best {
                Some((u, _)) => {
                    occupied.push(u.clone());
                    chosen.push(u);
                }
                None => break,
            }
        }
    }
    chosen
}

/// The sequential model-based optimization loop.
pub fn tune(
    objective: &dyn Objective,
    space: &SearchSpace,
    control: &ControlConfig,
) -> Result<TunerResult, TunerError> {
    tune_with_stop(objective, space, control, None)
}

/// [`tune`] with a cooperative stop flag, checked between evaluations. An
/// interrupted run returns the partial result with msg "interrupted".
pub fn tune_with_stop(
    objective: &dyn Objective,
    space: &SearchSpace,
    control: &ControlConfig,
    stop: StopFlag,
) -> Result<TunerResult, TunerError> {
    let report = space.validate();
    if !report.ok() {
        let reasons: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(TunerError::InvalidSpace(reasons.join("; ")));
    }
    control.validate()?;

    let types = DimType::from_space(space);
    let design_evals = control.design_size * control.repeats;
    let mut state = RunState::new(space, design_evals, control.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(control.seed ^ 0x6f75_7465_72); // outer-loop stream

    // Step 1: initial design, `repeats` evaluations per configuration. The
    // whole design is one plan, so worker fan-out applies here too; records
    // merge in plan order either way.
    let mut interrupted = stopped(stop);
    let design = latin_hypercube(space, control.design_size, control.seed)?;
    if !interrupted {
        let mut plan: Vec<(Config, Vec<f64>)> = Vec::new();
        for point in &design.points {
            let config = space.repair(point)?;
            let unit = space.to_unit(&config)?;
            for _ in 0..control.repeats {
                plan.push((config.clone(), unit.clone()));
            }
        }
        let base_seed = state.eval_seed();
        let items: Vec<(Config, u64)> = plan
            .iter()
            .enumerate()
            .map(|(i, (c, _))| (c.clone(), base_seed.wrapping_add(i as u64)))
            .collect();
        let records = evaluate_plan(objective, &items, control.workers);
        for ((config, unit), record) in plan.into_iter().zip(&records) {
            state.absorb(config, unit, record, 0)?;
            if stopped(stop) {
                interrupted = true;
                break;
            }
        }
    }

    // Steps 2-6: fit, propose, intensify, repeat until the budget is gone.
    let mut last_fit: Option<ModelFit> = None;
    let mut iteration = 0usize;
    while state.evals < control.fun_evals && !interrupted {
        if stopped(stop) {
            interrupted = true;
            break;
        }
        iteration += 1;
        let budget_left = control.fun_evals - state.evals;
        let (rows, means) = state.archive.aggregated();
        let (incumbent_id, y_min) = state.archive.best().unwrap();
        let incumbent_replicates = state.archive.entries[incumbent_id].responses.len();

        let fit_control = FitControl {
            nugget: if control.noise {
                NuggetMode::Estimate
            } else {
                NuggetMode::Fixed(1e-8)
            },
            seed: control.seed ^ iteration as u64,
            ..FitControl::default()
        };
        let model: Option<KrigingModel> =
            match kriging_fit(rows, means, types.clone(), &fit_control) {
                Ok(m) => Some(m),
                Err(err) => {
                    state
                        .log
                        .push(format!("iteration {iteration}: surrogate fit failed ({err}); random candidate"));
                    None
                }
            };

        let candidates: Vec<Vec<f64>> = match &model {
            Some(m) => {
                last_fit = Some(ModelFit::from_model(m));
                propose_candidates(
                    m,
                    space,
                    1,
                    y_min,
                    &state.archive,
                    control.candidate_pool,
                    control.local_refine,
                    control.seed ^ (iteration as u64).rotate_left(17),
                )
            }
            None => Vec::new(),
        };
        let candidates = if candidates.is_empty() {
            let raw: Vec<f64> = (0..space.dim()).map(|_| rng.random::<f64>()).collect();
            let config = space.repair(&raw)?;
            vec![space.to_unit(&config)?]
        } else {
            candidates
        };

        let plan = intensify(
            incumbent_replicates,
            candidates.len(),
            control.max_repeats,
            budget_left,
            control.noise,
        );
        if plan.is_empty() {
            break;
        }
        let items: Vec<(Config, u64)> = plan
            .iter()
            .enumerate()
            .map(|(r, target)| {
                let unit = match target {
                    PlanTarget::Incumbent => &state.archive.entries[incumbent_id].unit,
                    PlanTarget::Candidate(c) => &candidates[*c],
                };
                let config = space.repair(unit).expect("canonical point is repairable");
                (config, state.eval_seed().wrapping_add(r as u64))
            })
            .collect();
        let records = evaluate_plan(objective, &items, control.workers);
        for (i, record) in records.iter().enumerate() {
            let unit = space.to_unit(&items[i].0)?;
            state.absorb(items[i].0.clone(), unit, record, iteration)?;
        }
    }

    // The result carries the final surrogate summary; fit one post hoc if the
    // loop never ran.
    if last_fit.is_none() && state.evals > 0 {
        let (rows, means) = state.archive.aggregated();
        if let Ok(m) = kriging_fit(rows, means, types, &FitControl::default()) {
            last_fit = Some(ModelFit::from_model(&m));
        }
    }
    if state.evals == 0 {
        return Err(TunerError::InterruptedBeforeStart);
    }
    let msg = if interrupted { MSG_INTERRUPTED } else { MSG_BUDGET };
    Ok(state.finish(msg, last_fit))
}

/// Uniform random baseline: `floor(budget / repeats)` configurations, each
/// evaluated `repeats` times. Same result schema as [`tune`].
pub fn random_search(
    objective: &dyn Objective,
    space: &SearchSpace,
    budget: usize,
    repeats: usize,
    seed: u64,
) -> Result<TunerResult, TunerError> {
    random_search_with_stop(objective, space, budget, repeats, seed, None)
}

pub fn random_search_with_stop(
    objective: &dyn Objective,
    space: &SearchSpace,
    budget: usize,
    repeats: usize,
    seed: u64,
    stop: StopFlag,
) -> Result<TunerResult, TunerError> {
    assert!(repeats >= 1);
    let n_configs = budget / repeats;
    if n_configs == 0 {
        return Err(TunerError::BudgetTooSmall {
            fun_evals: budget,
            design: 1,
            repeats,
        });
    }
    let design = random_design(space, n_configs, seed)?;
    let mut state = RunState::new(space, 0, seed);
    let mut interrupted = false;
    'outer: for point in &design.points {
        let config = space.repair(point)?;
        let unit = space.to_unit(&config)?;
        for _ in 0..repeats {
            if stopped(stop) {
                interrupted = true;
                break 'outer;
            }
            let record = objective.evaluate(&config, state.eval_seed());
            state.absorb(config.clone(), unit.clone(), &record, 0)?;
        }
    }
    if state.evals == 0 {
        return Err(TunerError::InterruptedBeforeStart);
    }
    let msg = if interrupted { MSG_INTERRUPTED } else { MSG_BUDGET };
    Ok(state.finish(msg, None))
}

/// Full-factorial baseline; each grid point is evaluated once.
pub fn grid_search(
    objective: &dyn Objective,
    space: &SearchSpace,
    levels: &[usize],
    cap: usize,
) -> Result<TunerResult, TunerError> {
    grid_search_with_stop(objective, space, levels, cap, None)
}

pub fn grid_search_with_stop(
    objective: &dyn Objective,
    space: &SearchSpace,
    levels: &[usize],
    cap: usize,
    stop: StopFlag,
) -> Result<TunerResult, TunerError> {
    let design = grid_design(space, levels, cap)?;
    let mut state = RunState::new(space, 0, 0);
    let mut interrupted = false;
    for point in &design.points {
        if stopped(stop) {
            interrupted = true;
            break;
        }
        let config = space.repair(point)?;
        let unit = space.to_unit(&config)?;
        let record = objective.evaluate(&config, state.eval_seed());
        state.absorb(config, unit, &record, 0)?;
    }
    if state.evals == 0 {
        return Err(TunerError::InterruptedBeforeStart);
    }
    let msg = if interrupted { MSG_INTERRUPTED } else { MSG_BUDGET };
    Ok(state.finish(msg, None))
}

/// Recomputes the best-so-far trace from the stored evaluations. Element `t`
/// is the running best aggregated response among the first
/// `design_evals + t` evaluations, where `design_evals` is inferred from the
/// stored trace length.
pub fn best_trace(result: &TunerResult) -> Vec<f64> {
    let design_evals = result.count - result.ybest_vec.len();
    let mut rows: Vec<&[f64]> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut best_so_far = f64::INFINITY;
    let mut trace = Vec::new();
    for (i, (row, &resp)) in result.x.iter().zip(&result.y).enumerate() {
        match rows.iter().position(|r| *r == row.as_slice()) {
            Some(j) => {
                sums[j] += resp;
                counts[j] += 1;
            }
            None => {
                rows.push(row);
                sums.push(resp);
                counts.push(1);
            }
        }
        let current = sums
            .iter()
            .zip(&counts)
            .map(|(s, &c)| s / c as f64)
            .fold(f64::INFINITY, f64::min);
        best_so_far = best_so_far.min(current);
        if i + 1 > design_evals {
            trace.push(best_so_far);
        }
    }
    trace
}
