//! `kmpp`: generate instances, run seeding experiments, compute exact optima,
//! simulate the adversarial sampling process and verify instance files.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kmpp_core::format::{read_instance, write_instance};
use kmpp_core::harness::{
    generate, run_experiment, verify_instance, Algorithm, ExperimentConfig, InstanceSource,
    LloydConfig, Outputs, RunSettings,
};
use kmpp_core::instances::{lift_prescribed, HEAVY_FACTOR};
use kmpp_core::oracle::{opt_partition, opt_subset, DEFAULT_BUDGET};
use kmpp_core::process::{run_process_config, InitialWeights, ProcessConfig};
use kmpp_core::Error;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "kmpp", version, about = "k-means++ seeding experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Run seeding trials and report costs, ratios and instrumentation.
    Run(RunArgs),
    /// Exact optimum of an instance by enumeration.
    Oracle(OracleArgs),
    /// Simulate the adversarial sampling process.
    Process(ProcessArgs),
    /// Check the invariants of an instance file.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    /// fig1, appendix-a, greedy-lb or gaussian.
    generator: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "l", alias = "ell")]
    ell: Option<usize>,
    /// greedy-lb: divisor in the phase-count formula.
    #[arg(long)]
    ct: Option<f64>,
    /// greedy-lb: phase count override.
    #[arg(long)]
    t: Option<usize>,
    /// gaussian: points per cluster.
    #[arg(long)]
    points_per_cluster: Option<usize>,
    /// gaussian: dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// gaussian: minimum distance between cluster means.
    #[arg(long)]
    separation: Option<f64>,
    /// gaussian: put the means on a line.
    #[arg(long)]
    collinear: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra generator parameters as JSON, merged over the flags.
    #[arg(long)]
    params: Option<String>,
    /// Replace prescribed centers by heavy points.
    #[arg(long)]
    lift: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration as JSON; the flags below are ignored if given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    generator: Option<String>,
    /// Generator parameters as JSON.
    #[arg(long)]
    params: Option<String>,
    /// kmeanspp, greedy, rule:<name> or uniform-baseline.
    #[arg(long, default_value = "kmeanspp")]
    alg: String,
    #[arg(long = "l", alias = "ell", default_value_t = 1)]
    ell: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    lloyd: bool,
    #[arg(long)]
    no_instrument: bool,
    #[arg(long)]
    budget: Option<u128>,
    /// Worker threads (0 = all cores); overrides the config file.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Number of centers; defaults to the instance's k plus its prescribed centers.
    #[arg(long)]
    k: Option<usize>,
    /// subset or partition.
    #[arg(long, default_value = "subset")]
    method: String,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

#[derive(Args)]
struct ProcessArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated initial weights.
    #[arg(long, conflicts_with = "one_heavy")]
    weights: Option<String>,
    /// k − 1 unit elements plus one heavy element of weight --heavy (default k).
    #[arg(long)]
    one_heavy: Option<usize>,
    #[arg(long)]
    heavy: Option<f64>,
    #[arg(long = "l", alias = "ell", default_value_t = 1)]
    ell: usize,
    /// identity or protect-heaviest.
    #[arg(long, default_value = "identity")]
    adversary: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

fn parse_json(s: &Option<String>) -> Result<Value> {
    match s {
        Some(s) => serde_json::from_str(s).context("--params is not valid JSON"),
        None => Ok(json!({})),
    }
}

fn hint(e: Error) -> anyhow::Error {
    let extra = match &e {
        Error::BudgetExceeded { .. } => "; raise --budget or downscale the instance",
        Error::TooSmallT(_) => "; pass --t or lower --ct",
        Error::KExceedsPoints { .. } => "; lower k",
        _ => "",
    };
    anyhow::anyhow!("{e}{extra}")
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let mut params = json!({});
    let obj = params.as_object_mut().expect("object");
    if let Some(k) = a.k {
        obj.insert("k".into(), json!(k));
    }
    if let Some(l) = a.ell {
        obj.insert("ell".into(), json!(l));
    }
    match a.generator.as_str() {
        "greedy-lb" => {
            if let Some(ct) = a.ct {
                obj.insert("constants".into(), json!({ "c_t": ct }));
            }
            if let Some(t) = a.t {
                obj.insert("t_override".into(), json!(t));
            }
        }
        "gaussian" => {
            obj.insert("points_per_cluster".into(), json!(a.points_per_cluster.unwrap_or(100)));
            obj.insert("dim".into(), json!(a.dim.unwrap_or(2)));
            obj.insert("separation".into(), json!(a.separation.unwrap_or(10.0)));
            obj.insert("collinear".into(), json!(a.collinear));
            obj.insert("seed".into(), json!(a.seed));
        }
        _ => {}
    }
    if let Value::Object(extra) = parse_json(&a.params)? {
        obj.extend(extra);
    }
    let mut inst = generate(&a.generator, &params).map_err(hint)?;
    if a.lift && !inst.prescribed.is_empty() {
        inst = lift_prescribed(&inst, HEAVY_FACTOR)?;
    }
    write_instance(&a.out, &inst)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "out": a.out,
            "generator": inst.metadata.generator,
            "n": inst.x.len(),
            "dim": inst.x.dim(),
            "k": inst.k,
            "prescribed": inst.prescribed.len(),
            "ground_truth_cost": inst.metadata.ground_truth_cost,
        }))?
    );
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let mut cfg: ExperimentConfig = match &a.config {
        Some(p) => serde_json::from_str(
            &std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )
        .context("invalid experiment config")?,
        None => {
            let instance = match (&a.instance, &a.generator) {
                (Some(f), None) => InstanceSource::File { file: f.clone() },
                (None, Some(g)) => InstanceSource::Generator {
                    generator: g.clone(),
                    params: parse_json(&a.params)?,
                },
                _ => bail!("give exactly one of --instance, --generator or --config"),
            };
            let algorithm: Algorithm = a.alg.parse().map_err(hint)?;
            let mut settings = RunSettings::new(algorithm, a.ell, a.trials, a.seed);
            settings.lloyd = LloydConfig {
                enabled: a.lloyd,
                ..LloydConfig::default()
            };
            settings.instrument = !a.no_instrument;
            if let Some(b) = a.budget {
                settings.oracle_budget = b;
            }
            ExperimentConfig {
                instance,
                settings,
                outputs: Outputs {
                    trials_csv: a.csv.clone(),
                    summary_json: a.summary.clone(),
                },
                lift: None,
            }
        }
    };
    if let Some(w) = a.workers {
        cfg.settings.workers = w;
    }
    let out = run_experiment(&cfg).map_err(hint)?;
    if cfg.outputs.summary_json.is_none() {
        println!("{}", serde_json::to_string_pretty(&out.report)?);
    }
    if out.report.ratio_below_exact_opt > 0 {
        bail!(
            "{} trials beat the exact optimum",
            out.report.ratio_below_exact_opt
        );
    }
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let k = a.k.unwrap_or(inst.k + inst.prescribed.len());
    let res = match a.method.as_str() {
        "subset" => opt_subset(&inst.x, k, a.budget),
        "partition" => opt_partition(&inst.x, k, a.budget),
        m => bail!("unknown method `{m}` (subset or partition)"),
    }
    .map_err(hint)?;
    println!("{}", serde_json::to_string_pretty(&res)?);
    Ok(())
}

fn cmd_process(a: ProcessArgs) -> Result<()> {
    let mut cfg: ProcessConfig = match &a.config {
        Some(p) => serde_json::from_str(
            &std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )
        .context("invalid process config")?,
        None => {
            let weights = match (&a.weights, a.one_heavy) {
                (Some(w), None) => InitialWeights::Explicit(
                    w.split(',')
                        .map(|v| v.trim().parse::<f64>())
                        .collect::<Result<_, _>>()
                        .context("--weights must be comma-separated numbers")?,
                ),
                (None, Some(k)) => InitialWeights::OneHeavy { k, heavy: a.heavy },
                _ => bail!("give --weights, --one-heavy or --config"),
            };
            ProcessConfig {
                weights,
                ell: a.ell,
                adversary: a.adversary.clone(),
                trials: a.trials,
                seed: a.seed,
                workers: 1,
                csv: a.csv.clone(),
                summary_json: a.summary.clone(),
            }
        }
    };
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    let report = run_process_config(&cfg).map_err(hint)?;
    if cfg.summary_json.is_none() {
        println!("{}", serde_json::to_string_pretty(&report)?);
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let checks = verify_instance(&inst, a.budget);
    let mut failed = 0;
    for c in &checks {
        let tag = match c.passed {
            Some(true) => "ok",
            Some(false) => {
                failed += 1;
                "FAIL"
            }
            None => "skip",
        };
        println!("{tag:>4}  {}: {}", c.name, c.detail);
    }
    if failed > 0 {
        bail!("{failed} check(s) failed");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Run(a) => cmd_run(a),
        Cmd::Oracle(a) => cmd_oracle(a),
        Cmd::Process(a) => cmd_process(a),
        Cmd::Verify(a) => cmd_verify(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
