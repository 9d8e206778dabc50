//! The ℓ-point adversarial sampling process.
//!
//! `k` elements with nonnegative weights. In round `i` an adversary picks
//! `ℓ_i ∈ [1, ℓ]`, that many elements are drawn independently with
//! probability proportional to weight, the adversary removes one of the drawn
//! elements and may then shrink (never grow) the survivors' weights. The
//! quantity of interest is `AVG_i = Σ w_i / (k − i)`.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::run_trials;
use crate::rng::{stream, sub_seed, trial_seed};
use crate::stats::{summarize, Summary};

/// Column header of the per-round CSV.
pub const PROCESS_CSV_HEADER: [&str; 5] = ["trial", "round", "avg", "max_weight", "removed_id"];
pub const PROCESS_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct ProcessState {
    /// Surviving `(id, weight)` pairs in id order.
    pub elements: Vec<(usize, f64)>,
    pub round: usize,
    pub avg_series: Vec<f64>,
}

impl ProcessState {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySet);
        }
        for &w in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidWeight(w));
            }
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::ZeroWeight);
        }
        Ok(ProcessState {
            elements: weights.iter().copied().enumerate().collect(),
            round: 0,
            avg_series: Vec::new(),
        })
    }

    pub fn total(&self) -> f64 {
        self.elements.iter().map(|e| e.1).sum()
    }

    pub fn avg(&self) -> f64 {
        self.total() / self.elements.len() as f64
    }

    pub fn max_weight(&self) -> f64 {
        self.elements.iter().map(|e| e.1).fold(0.0, f64::max)
    }

    pub fn weight_of(&self, id: usize) -> Option<f64> {
        self.elements.iter().find(|e| e.0 == id).map(|e| e.1)
    }

    /// One draw proportional to weight; uniform if every weight is zero.
    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = self.total();
        if total <= 0.0 {
            return self.elements[rng.random_range(0..self.elements.len())].0;
        }
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut last = self.elements[0].0;
        for &(id, w) in &self.elements {
            if w > 0.0 {
                acc += w;
                last = id;
                if u < acc {
                    return id;
                }
            }
        }
        last
    }
}

/// An adversary strategy. Implementations must be deterministic given the
/// state and the RNG they are handed.
pub trait Adversary: Send + Sync {
    fn name(&self) -> &str;
    /// `ℓ_i` for the coming round.
    fn sample_count(&self, state: &ProcessState, rng: &mut ChaCha8Rng) -> usize;
    /// Which of the sampled ids to remove.
    fn remove(&self, state: &ProcessState, sampled: &[usize], rng: &mut ChaCha8Rng) -> usize;
    /// New weights for the survivors, in the order of `state.elements`.
    fn reweight(&self, state: &ProcessState, _rng: &mut ChaCha8Rng) -> Vec<f64> {
        state.elements.iter().map(|e| e.1).collect()
    }
}

/// Samples `ℓ` elements, removes the first one drawn, keeps weights.
#[derive(Clone, Debug)]
pub struct IdentityAdversary {
    pub ell: usize,
}

impl Adversary for IdentityAdversary {
    fn name(&self) -> &str {
        "identity"
    }

    fn sample_count(&self, _: &ProcessState, _: &mut ChaCha8Rng) -> usize {
        self.ell
    }

    fn remove(&self, _: &ProcessState, sampled: &[usize], _: &mut ChaCha8Rng) -> usize {
        sampled[0]
    }
}

/// Samples `ℓ` elements and removes the lightest one drawn (lowest id on
/// ties), so heavy elements survive as long as possible.
#[derive(Clone, Debug)]
pub struct ProtectHeaviest {
    pub ell: usize,
}

impl Adversary for ProtectHeaviest {
    fn name(&self) -> &str {
        "protect-heaviest"
    }

    fn sample_count(&self, _: &ProcessState, _: &mut ChaCha8Rng) -> usize {
        self.ell
    }

    fn remove(&self, state: &ProcessState, sampled: &[usize], _: &mut ChaCha8Rng) -> usize {
        let w = |id: usize| state.weight_of(id).expect("sampled ids survive");
        *sampled
            .iter()
            .min_by(|&&a, &&b| w(a).total_cmp(&w(b)).then(a.cmp(&b)))
            .expect("at least one sample")
    }
}

/// Looks up an adversary by name.
pub fn adversary_by_name(name: &str, ell: usize) -> Result<Box<dyn Adversary>> {
    match name {
        "identity" => Ok(Box::new(IdentityAdversary { ell })),
        "protect-heaviest" => Ok(Box::new(ProtectHeaviest { ell })),
        other => Err(Error::InvalidParameter(format!(
            "unknown adversary `{other}` (known: identity, protect-heaviest)"
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub avg: f64,
    pub max_weight: f64,
    pub removed_id: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub rounds: Vec<RoundRecord>,
}

impl TrialOutcome {
    pub fn avg_series(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.avg).collect()
    }

    /// Round in which `id` was removed.
    pub fn removal_round(&self, id: usize) -> Option<usize> {
        self.rounds.iter().find(|r| r.removed_id == id).map(|r| r.round)
    }

    /// `max_i AVG_i / AVG_0`.
    pub fn max_drift(&self) -> f64 {
        let a0 = self.rounds[0].avg;
        self.rounds.iter().map(|r| r.avg / a0).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Plays one game to the end. Each round's randomness comes from its own
/// sub-stream of `seed`.
pub fn run_trial(
    weights: &[f64],
    ell: usize,
    adversary: &dyn Adversary,
    seed: u64,
) -> Result<TrialOutcome> {
    if ell == 0 {
        return Err(Error::InvalidParameter("ℓ must be at least 1".into()));
    }
    let mut st = ProcessState::new(weights)?;
    let k = weights.len();
    let initial_total = st.total();
    let mut rounds = Vec::with_capacity(k);
    while !st.elements.is_empty() {
        let mut rng = stream(sub_seed(seed, st.round as u64));
        let avg = st.avg();
        debug_assert!(avg <= initial_total / (k - st.round) as f64 * (1.0 + 1e-12));
        st.avg_series.push(avg);
        let max_weight = st.max_weight();

        let li = adversary.sample_count(&st, &mut rng);
        if li == 0 || li > ell {
            return Err(Error::InvalidParameter(format!(
                "adversary `{}` chose ℓ_i = {li}, allowed 1..={ell}",
                adversary.name()
            )));
        }
        let sampled: Vec<usize> = (0..li).map(|_| st.draw(&mut rng)).collect();
        let removed = adversary.remove(&st, &sampled, &mut rng);
        if !sampled.contains(&removed) {
            return Err(Error::InvalidParameter(format!(
                "adversary `{}` removed {removed}, which was not sampled",
                adversary.name()
            )));
        }
        st.elements.retain(|e| e.0 != removed);
        st.round += 1;
        rounds.push(RoundRecord {
            round: st.round - 1,
            avg,
            max_weight,
            removed_id: removed,
        });

        if !st.elements.is_empty() {
            let new = adversary.reweight(&st, &mut rng);
            if new.len() != st.elements.len() {
                return Err(Error::DimensionMismatch {
                    expected: st.elements.len(),
                    got: new.len(),
                });
            }
            for (e, &w) in st.elements.iter_mut().zip(&new) {
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidWeight(w));
                }
                if w > e.1 {
                    return Err(Error::WeightIncrease {
                        element: e.0,
                        old: e.1,
                        new: w,
                    });
                }
                e.1 = w;
            }
        }
    }
    Ok(TrialOutcome { rounds })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessReport {
    pub schema_version: u32,
    pub k: usize,
    pub ell: usize,
    pub adversary: String,
    pub trials: usize,
    pub seed: u64,
    /// Distribution of `AVG_i` across trials, per round.
    pub per_round: Vec<Summary>,
    /// Empirical lower bound on `g(k, ℓ)`: the largest `AVG_i / AVG_0` seen.
    pub max_drift: f64,
    pub mean_final_drift: f64,
    #[serde(skip)]
    pub outcomes: Vec<TrialOutcome>,
}

/// Runs `trials` independent games on up to `workers` threads. The result
/// does not depend on `workers`.
pub fn run_process(
    weights: &[f64],
    ell: usize,
    adversary: &dyn Adversary,
    seed: u64,
    trials: usize,
    workers: usize,
) -> Result<ProcessReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let outcomes = run_trials(workers, trials, |t| {
        run_trial(weights, ell, adversary, trial_seed(seed, t as u64))
    })?;
    let k = weights.len();
    let per_round = (0..k)
        .map(|i| summarize(&outcomes.iter().map(|o| o.rounds[i].avg).collect::<Vec<_>>()))
        .collect();
    let max_drift = outcomes.iter().map(TrialOutcome::max_drift).fold(f64::NEG_INFINITY, f64::max);
    let finals: Vec<f64> = outcomes
        .iter()
        .map(|o| o.rounds[k - 1].avg / o.rounds[0].avg)
        .collect();
    Ok(ProcessReport {
        schema_version: PROCESS_SCHEMA_VERSION,
        k,
        ell,
        adversary: adversary.name().to_string(),
        trials,
        seed,
        per_round,
        max_drift,
        mean_final_drift: crate::stats::mean(&finals),
        outcomes,
    })
}

/// Empirical lower bound on `g(k, ℓ)` for one adversary.
pub fn estimate_g(
    weights: &[f64],
    ell: usize,
    adversary: &dyn Adversary,
    seed: u64,
    trials: usize,
    workers: usize,
) -> Result<f64> {
    run_process(weights, ell, adversary, seed, trials, workers).map(|r| r.max_drift)
}

/// `k − 1` unit elements and one element of weight `heavy`.
pub fn one_heavy(k: usize, heavy: f64) -> Vec<f64> {
    let mut w = vec![1.0; k - 1];
    w.push(heavy);
    w
}

/// Initial weights of a process run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialWeights {
    Explicit(Vec<f64>),
    /// `k − 1` unit elements and one of weight `heavy` (default `k`).
    OneHeavy { k: usize, heavy: Option<f64> },
}

impl InitialWeights {
    pub fn weights(&self) -> Vec<f64> {
        match self {
            InitialWeights::Explicit(w) => w.clone(),
            InitialWeights::OneHeavy { k, heavy } => one_heavy(*k, heavy.unwrap_or(*k as f64)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessConfig {
    pub weights: InitialWeights,
    pub ell: usize,
    pub adversary: String,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub csv: Option<std::path::PathBuf>,
    #[serde(default)]
    pub summary_json: Option<std::path::PathBuf>,
}

fn default_trials() -> usize {
    1000
}

fn default_workers() -> usize {
    1
}

/// Runs a configured process and writes its outputs.
pub fn run_process_config(cfg: &ProcessConfig) -> Result<ProcessReport> {
    let weights = cfg.weights.weights();
    let adv = adversary_by_name(&cfg.adversary, cfg.ell)?;
    let report = run_process(&weights, cfg.ell, adv.as_ref(), cfg.seed, cfg.trials, cfg.workers)?;
    if let Some(p) = &cfg.csv {
        write_process_csv(std::fs::File::create(p)?, &report.outcomes)?;
    }
    if let Some(p) = &cfg.summary_json {
        std::fs::write(p, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(report)
}

pub fn write_process_csv<W: Write>(out: W, outcomes: &[TrialOutcome]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(PROCESS_CSV_HEADER)?;
    for (t, o) in outcomes.iter().enumerate() {
        for r in &o.rounds {
            wtr.write_record([
                t.to_string(),
                r.round.to_string(),
                r.avg.to_string(),
                r.max_weight.to_string(),
                r.removed_id.to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
