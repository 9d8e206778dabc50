//! Experiment orchestration: configuration, reference optima, parallel trials,
//! per-trial CSV and the JSON summary.
//!
//! Every trial `t` runs on its own RNG stream seeded with
//! [`trial_seed`]`(seed, t)`, and results are collected in trial order, so
//! outputs are identical for any worker count.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::format::read_instance;
use crate::geometry::{CenterSet, Coords};
use crate::instances::{
    gen_appendix_a, gen_fig1, gen_gaussian_mixture, gen_greedy_lb, lift_prescribed, GaussianParams,
    GreedyLbParams, Instance, HEAVY_FACTOR,
};
use crate::instrumentation::{
    hit_series, step_classes, OptimalPartition, ReferenceSource, StepClass, SOLVED_FACTOR,
};
use crate::oracle::{opt_partition, opt_subset, partition_count, binomial, Argmin, DEFAULT_BUDGET};
use crate::rng::{splitmix64, trial_seed};
use crate::seeding::{
    lloyd_refine, DistanceCache, FirstCandidate, Greedy, Rule, SamplingMode, Seeder,
};
use crate::stats::{summarize, wilson95, Proportion, Summary};

/// Runs `f(0..n)` on up to `workers` threads (0 = all cores), results in index order.
pub fn run_trials<T, F>(workers: usize, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if workers == 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

/// Seeding algorithm of an experiment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Algorithm {
    /// One D² candidate per step.
    KMeansPP,
    /// ℓ D² candidates, keep the one with the largest cost drop.
    Greedy,
    /// ℓ D² candidates, choice by a named rule.
    Rule(String),
    /// Every center drawn ∝ weight.
    UniformBaseline,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeanspp" => Ok(Algorithm::KMeansPP),
            "greedy" => Ok(Algorithm::Greedy),
            "uniform-baseline" => Ok(Algorithm::UniformBaseline),
            _ => match s.strip_prefix("rule:") {
                Some(name) if !name.is_empty() => Ok(Algorithm::Rule(name.to_string())),
                _ => Err(Error::InvalidParameter(format!(
                    "unknown algorithm `{s}` (expected kmeanspp, greedy, rule:<name> or uniform-baseline)"
                ))),
            },
        }
    }
}

impl TryFrom<String> for Algorithm {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::KMeansPP => write!(f, "kmeanspp"),
            Algorithm::Greedy => write!(f, "greedy"),
            Algorithm::Rule(n) => write!(f, "rule:{n}"),
            Algorithm::UniformBaseline => write!(f, "uniform-baseline"),
        }
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> String {
        a.to_string()
    }
}

/// Resolves a rule name: `first`, `greedy`, or the instance's own hint.
pub fn resolve_rule(name: &str, inst: &Instance) -> Result<Box<dyn Rule>> {
    match name {
        "first" => Ok(Box::new(FirstCandidate)),
        "greedy" => Ok(Box::new(Greedy)),
        _ => match &inst.rule_hint {
            Some(h) if h.name == name => Ok(Box::new(h.to_rule())),
            hint => {
                let mut known = vec!["first".to_string(), "greedy".to_string()];
                known.extend(hint.iter().map(|h| h.name.clone()));
                Err(Error::InvalidParameter(format!(
                    "rule `{name}` is not registered for this instance (known: {})",
                    known.join(", ")
                )))
            }
        },
    }
}

/// Builds an instance from a generator name and JSON parameters.
pub fn generate(name: &str, params: &Value) -> Result<Instance> {
    let field = |key: &str, alt: &str| -> Result<usize> {
        params
            .get(key)
            .or_else(|| params.get(alt))
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| Error::InvalidParameter(format!("generator `{name}` needs `{key}`")))
    };
    match name {
        "fig1" => gen_fig1(field("k", "k")?),
        "appendix-a" => gen_appendix_a(field("k", "k")?, field("ell", "l")?),
        "greedy-lb" => gen_greedy_lb(&serde_json::from_value::<GreedyLbParams>(params.clone())?),
        "gaussian" => gen_gaussian_mixture(&serde_json::from_value::<GaussianParams>(params.clone())?),
        other => Err(Error::InvalidParameter(format!(
            "unknown generator `{other}` (known: fig1, appendix-a, greedy-lb, gaussian)"
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSource {
    File {
        file: PathBuf,
    },
    Generator {
        generator: String,
        #[serde(default)]
        params: Value,
    },
}

impl InstanceSource {
    pub fn load(&self) -> Result<Instance> {
        match self {
            InstanceSource::File { file } => read_instance(file),
            InstanceSource::Generator { generator, params } => generate(generator, params),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LloydConfig {
    pub enabled: bool,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LloydConfig {
    fn default() -> Self {
        LloydConfig {
            enabled: false,
            max_iters: 100,
            tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Outputs {
    pub trials_csv: Option<PathBuf>,
    pub summary_json: Option<PathBuf>,
}

/// Everything about a run except where the instance comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub algorithm: Algorithm,
    #[serde(default = "one")]
    pub ell: usize,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub lloyd: LloydConfig,
    /// Worker threads; 0 means all cores.
    #[serde(default = "one")]
    pub workers: usize,
    /// Compute HIT counts and good/bad steps.
    #[serde(default = "yes")]
    pub instrument: bool,
    #[serde(default = "default_budget")]
    pub oracle_budget: u128,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn default_budget() -> u128 {
    DEFAULT_BUDGET
}

impl RunSettings {
    pub fn new(algorithm: Algorithm, ell: usize, trials: usize, seed: u64) -> Self {
        RunSettings {
            algorithm,
            ell,
            trials,
            seed,
            lloyd: LloydConfig::default(),
            workers: 1,
            instrument: true,
            oracle_budget: DEFAULT_BUDGET,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.ell == 0 {
            return Err(Error::InvalidParameter("ℓ must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    #[serde(flatten)]
    pub settings: RunSettings,
    #[serde(default)]
    pub outputs: Outputs,
    /// Replace prescribed centers by heavy points (weight factor × total).
    #[serde(default)]
    pub lift: Option<f64>,
}

impl ExperimentConfig {
    pub fn load_instance(&self) -> Result<Instance> {
        let inst = self.instance.load()?;
        match self.lift {
            Some(f) if !inst.prescribed.is_empty() => lift_prescribed(&inst, f),
            _ => Ok(inst),
        }
    }
}

/// Reference solution used for ratios and instrumentation: the instance's
/// ground truth, else the exact partition optimum if enumeration fits the
/// budget, else the best of 50 Lloyd-polished k-means++ runs.
pub fn reference_partition(inst: &Instance, budget: u128) -> Result<OptimalPartition> {
    let x = &inst.x;
    if let Some(gt) = &inst.ground_truth {
        return OptimalPartition::from_centers(
            x,
            gt.reference_centers.clone(),
            ReferenceSource::GroundTruth,
        );
    }
    let total_k = inst.k + inst.prescribed.len();
    if inst.prescribed.is_empty() && partition_count(x.len(), total_k) <= budget {
        let res = opt_partition(x, total_k, budget)?;
        let Argmin::Partition(labels) = res.argmin else {
            unreachable!("partition oracle returns labels")
        };
        let mut centers = CenterSet::empty(x.dim());
        for b in 0..total_k {
            let members: Vec<usize> = (0..x.len()).filter(|&i| labels[i] == b).collect();
            if members.is_empty() {
                continue;
            }
            centers.push(crate::geometry::centroid_coords(x, &members)?, None)?;
        }
        return OptimalPartition::from_centers(x, centers, ReferenceSource::ExactPartition);
    }
    let seeder = Seeder::with_prescribed(x, inst.prescribed.clone());
    let mut best: Option<(f64, CenterSet)> = None;
    for r in 0..50u64 {
        let trace = seeder.run(inst.k, 1, &FirstCandidate, SamplingMode::D2, splitmix64(r))?;
        let polished = lloyd_refine(x, &trace.final_centers, 100, 1e-9)?;
        let cost = *polished.costs.last().expect("at least the initial cost");
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, polished.centers));
        }
    }
    let (_, centers) = best.expect("50 runs");
    OptimalPartition::from_centers(x, centers, ReferenceSource::HeuristicReference)
}

/// Header of the per-trial CSV. Changing it requires bumping
/// [`TRIALS_CSV_SCHEMA_VERSION`].
pub const TRIALS_CSV_HEADER: [&str; 11] = [
    "trial",
    "seed",
    "final_cost",
    "ratio",
    "lloyd_cost",
    "lloyd_ratio",
    "good_steps",
    "bad_steps",
    "hit_total",
    "hit_max",
    "bad_event",
];
pub const TRIALS_CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub final_cost: f64,
    pub ratio: f64,
    pub lloyd_cost: Option<f64>,
    pub lloyd_ratio: Option<f64>,
    pub good_steps: Option<usize>,
    pub bad_steps: Option<usize>,
    /// HIT count per reference cluster.
    pub hits: Option<Vec<u64>>,
    pub bad_event: Option<bool>,
    /// Point chosen at every step.
    pub chosen: Vec<usize>,
    pub runtime_seconds: f64,
}

impl TrialResult {
    pub fn hit_total(&self) -> Option<u64> {
        self.hits.as_ref().map(|h| h.iter().sum())
    }

    pub fn hit_max(&self) -> Option<u64> {
        self.hits.as_ref().map(|h| h.iter().copied().max().unwrap_or(0))
    }
}

fn ratio(cost: f64, opt: f64) -> f64 {
    if opt > 0.0 {
        cost / opt
    } else if cost == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceInfo {
    pub source: ReferenceSource,
    pub opt_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub generator: String,
    pub n: usize,
    pub dim: usize,
    pub k: usize,
    pub prescribed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub csv_schema_version: u32,
    pub instance: InstanceInfo,
    pub algorithm: Algorithm,
    /// Candidates per step actually used.
    pub ell: usize,
    pub trials: usize,
    pub seed: u64,
    pub reference: ReferenceInfo,
    pub final_cost: Summary,
    pub ratio: Summary,
    pub lloyd_cost: Option<Summary>,
    pub lloyd_ratio: Option<Summary>,
    pub good_steps: Option<Summary>,
    pub bad_steps: Option<Summary>,
    pub hit_total: Option<Summary>,
    pub hit_per_cluster_mean: Option<Vec<f64>>,
    pub bad_event: Option<Proportion>,
    /// Trials whose ratio is below `1 − 1e−9` against an exact reference.
    pub ratio_below_exact_opt: usize,
    pub mean_runtime_seconds: f64,
}

pub struct ExperimentOutput {
    pub trials: Vec<TrialResult>,
    pub report: AggregateReport,
}

/// Runs all trials of `settings` on `inst` against `reference`.
pub fn run_on_instance(
    inst: &Instance,
    settings: &RunSettings,
    reference: &OptimalPartition,
) -> Result<ExperimentOutput> {
    settings.validate()?;
    let x = &inst.x;
    let (ell, rule, mode): (usize, Box<dyn Rule>, SamplingMode) = match &settings.algorithm {
        Algorithm::KMeansPP => (1, Box::new(FirstCandidate), SamplingMode::D2),
        Algorithm::Greedy => (settings.ell, Box::new(Greedy), SamplingMode::D2),
        Algorithm::Rule(name) => (settings.ell, resolve_rule(name, inst)?, SamplingMode::D2),
        Algorithm::UniformBaseline => (1, Box::new(FirstCandidate), SamplingMode::Uniform),
    };
    let cache = DistanceCache::build(x);
    let seeder = Seeder::with_prescribed(x, inst.prescribed.clone()).with_cache(cache.as_ref());
    let opt = reference.opt_cost;
    let trials = run_trials(settings.workers, settings.trials, |t| {
        let start = Instant::now();
        let seed = trial_seed(settings.seed, t as u64);
        let trace = seeder.run(inst.k, ell, rule.as_ref(), mode, seed)?;
        let final_cost = trace.final_cost().expect("k ≥ 1 steps");
        let (lloyd_cost, lloyd_ratio) = if settings.lloyd.enabled {
            let l = lloyd_refine(x, &trace.final_centers, settings.lloyd.max_iters, settings.lloyd.tol)?;
            let c = *l.costs.last().expect("initial cost");
            (Some(c), Some(ratio(c, opt)))
        } else {
            (None, None)
        };
        let (good_steps, bad_steps, hits) = if settings.instrument {
            let classes = step_classes(x, &trace, reference);
            let good = classes.iter().filter(|c| **c == StepClass::Good).count();
            let hits = hit_series(x, &trace, reference, SOLVED_FACTOR);
            (Some(good), Some(classes.len() - good), Some(hits.totals))
        } else {
            (None, None, None)
        };
        let chosen: Vec<usize> = trace.steps.iter().map(|s| s.chosen_point()).collect();
        Ok(TrialResult {
            trial: t,
            seed,
            final_cost,
            ratio: ratio(final_cost, opt),
            lloyd_cost,
            lloyd_ratio,
            good_steps,
            bad_steps,
            hits,
            bad_event: inst.bad_event.as_ref().map(|b| b.occurred(&chosen)),
            chosen,
            runtime_seconds: start.elapsed().as_secs_f64(),
        })
    })?;
    let report = aggregate(inst, settings, ell, reference, &trials);
    Ok(ExperimentOutput { trials, report })
}

fn aggregate(
    inst: &Instance,
    settings: &RunSettings,
    ell: usize,
    reference: &OptimalPartition,
    trials: &[TrialResult],
) -> AggregateReport {
    let col = |f: &dyn Fn(&TrialResult) -> Option<f64>| -> Option<Summary> {
        let v: Option<Vec<f64>> = trials.iter().map(f).collect();
        v.map(|v| summarize(&v))
    };
    let exact = matches!(
        reference.source,
        ReferenceSource::ExactPartition | ReferenceSource::ExactSubset
    );
    let hit_per_cluster_mean = trials.first().and_then(|t| t.hits.as_ref()).map(|h| {
        (0..h.len())
            .map(|k| {
                trials.iter().map(|t| t.hits.as_ref().map_or(0, |h| h[k]) as f64).sum::<f64>()
                    / trials.len() as f64
            })
            .collect()
    });
    let bad_event = inst.bad_event.as_ref().map(|_| {
        let hits = trials.iter().filter(|t| t.bad_event == Some(true)).count();
        wilson95(hits as u64, trials.len() as u64)
    });
    AggregateReport {
        csv_schema_version: TRIALS_CSV_SCHEMA_VERSION,
        instance: InstanceInfo {
            generator: inst.metadata.generator.clone(),
            n: inst.x.len(),
            dim: inst.x.dim(),
            k: inst.k,
            prescribed: inst.prescribed.len(),
        },
        algorithm: settings.algorithm.clone(),
        ell,
        trials: trials.len(),
        seed: settings.seed,
        reference: ReferenceInfo {
            source: reference.source,
            opt_cost: reference.opt_cost,
        },
        final_cost: summarize(&trials.iter().map(|t| t.final_cost).collect::<Vec<_>>()),
        ratio: summarize(&trials.iter().map(|t| t.ratio).collect::<Vec<_>>()),
        lloyd_cost: col(&|t| t.lloyd_cost),
        lloyd_ratio: col(&|t| t.lloyd_ratio),
        good_steps: col(&|t| t.good_steps.map(|v| v as f64)),
        bad_steps: col(&|t| t.bad_steps.map(|v| v as f64)),
        hit_total: col(&|t| t.hit_total().map(|v| v as f64)),
        hit_per_cluster_mean,
        bad_event,
        ratio_below_exact_opt: if exact {
            trials.iter().filter(|t| t.ratio < 1.0 - 1e-9).count()
        } else {
            0
        },
        mean_runtime_seconds: trials.iter().map(|t| t.runtime_seconds).sum::<f64>()
            / trials.len() as f64,
    }
}

/// Loads the instance, finds the reference, runs the trials and writes the
/// configured outputs.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.settings.validate()?;
    let inst = cfg.load_instance()?;
    let reference = reference_partition(&inst, cfg.settings.oracle_budget)?;
    let out = run_on_instance(&inst, &cfg.settings, &reference)?;
    if let Some(p) = &cfg.outputs.trials_csv {
        write_trials_csv(std::fs::File::create(p)?, &out.trials)?;
    }
    if let Some(p) = &cfg.outputs.summary_json {
        std::fs::write(p, serde_json::to_string_pretty(&out.report)?)?;
    }
    Ok(out)
}

fn opt_str(v: Option<impl ToString>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_trials_csv<W: Write>(out: W, trials: &[TrialResult]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(TRIALS_CSV_HEADER)?;
    for t in trials {
        wtr.write_record([
            t.trial.to_string(),
            t.seed.to_string(),
            t.final_cost.to_string(),
            t.ratio.to_string(),
            opt_str(t.lloyd_cost),
            opt_str(t.lloyd_ratio),
            opt_str(t.good_steps),
            opt_str(t.bad_steps),
            opt_str(t.hit_total()),
            opt_str(t.hit_max()),
            opt_str(t.bad_event.map(u8::from)),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// One named check of [`verify_instance`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// `None` when skipped.
    pub passed: Option<bool>,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: Option<bool>, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Structural invariants of an instance file.
pub fn verify_instance(inst: &Instance, budget: u128) -> Vec<Check> {
    let x = &inst.x;
    let mut out = vec![Check::new(
        "structure",
        Some(inst.validate().is_ok()),
        format!("n = {}, dim = {}, k = {}, |C0| = {}", x.len(), x.dim(), inst.k, inst.prescribed.len()),
    )];
    let total_k = inst.k + inst.prescribed.len();
    let distinct = x.distinct_count();
    out.push(Check::new(
        "enough-distinct-points",
        Some(total_k <= distinct),
        format!("k + |C0| = {total_k}, distinct = {distinct}"),
    ));
    if let Some(gt) = &inst.ground_truth {
        let recomputed = crate::geometry::total_cost(x, &gt.reference_centers);
        let ok = recomputed
            .as_ref()
            .is_ok_and(|c| (c - gt.opt_cost).abs() <= 1e-9 * gt.opt_cost.abs().max(1.0));
        out.push(Check::new(
            "ground-truth-cost",
            Some(ok),
            format!("stored {}, recomputed {:?}", gt.opt_cost, recomputed.ok()),
        ));
        if let Some(meta) = inst.metadata.ground_truth_cost {
            let ok = (meta - gt.opt_cost).abs() <= 1e-9 * meta.abs().max(1.0);
            out.push(Check::new(
                "metadata-cost",
                Some(ok),
                format!("metadata {meta}, ground truth {}", gt.opt_cost),
            ));
        }
        let point_supported = gt
            .reference_centers
            .centers
            .iter()
            .all(|c| (0..x.len()).any(|i| x.point(i).coords.sq_dist(c) == 0.0));
        if point_supported && binomial(x.len(), total_k) <= budget {
            let check = opt_subset(x, total_k, budget).map(|r| r.opt_cost);
            let ok = check
                .as_ref()
                .is_ok_and(|o| (o - gt.opt_cost).abs() <= 1e-9 * gt.opt_cost.abs().max(1.0));
            out.push(Check::new(
                "ground-truth-optimal",
                Some(ok),
                format!("exact subset optimum {:?}", check.ok()),
            ));
        } else if !point_supported && partition_count(x.len(), total_k) <= budget {
            let check = opt_partition(x, total_k, budget).map(|r| r.opt_cost);
            let ok = check.as_ref().is_ok_and(|o| *o <= gt.opt_cost * (1.0 + 1e-9));
            out.push(Check::new(
                "ground-truth-bounded",
                Some(ok),
                format!("exact partition optimum {:?}", check.ok()),
            ));
        } else {
            out.push(Check::new("ground-truth-optimal", None, "enumeration exceeds budget"));
        }
    }
    if inst.metadata.generator == "greedy-lb" {
        let ok = inst.metadata.diagnostics.get("all_checks_ok").and_then(Value::as_bool);
        out.push(Check::new(
            "construction-checks",
            Some(ok == Some(true)),
            "recorded generator self-checks",
        ));
    }
    let heavy_ok = inst.prescribed.iter().all(|&i| x.weight(i) > 0.0);
    out.push(Check::new(
        "prescribed-weights",
        Some(heavy_ok),
        format!("lifting factor default {HEAVY_FACTOR:e}"),
    ));
    out
}

/// Coordinates of the reference centers, for reports.
pub fn reference_coords(part: &OptimalPartition) -> &[Coords] {
    &part.reference_centers.centers
}
