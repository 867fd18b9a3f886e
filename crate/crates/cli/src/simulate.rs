//! Monte Carlo runs of the random-coding scheme.
//!
//! A single run writes `summary.json`, plus `trials.csv` with columns
//! `trial,status,distortion` under `--per-trial`. Several runs (the n-sweep)
//! write `summary.json` as an array and `sweep.csv` with columns
//! `n,trials,ok,failure_rate,mean_distortion,exceed_fraction,r1_effective,r2_effective`.

use std::path::PathBuf;

use cascade_core::fmt::sig12;
use cascade_core::presets::{self, Preset};
use cascade_core::simulator::{outcomes_csv, run_trials, run_trials_with_outcomes, SimConfig, SimSummary};
use clap::{Args, ValueHint};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::{from_value, load_config, render_json};
use crate::Global;

pub const SWEEP_HEADER: &str = "n,trials,ok,failure_rate,mean_distortion,exceed_fraction,r1_effective,r2_effective";

#[derive(Args)]
pub struct Opts {
    /// SimConfig JSON or run manifest; flags override its values.
    #[arg(long, value_hint = ValueHint::FilePath)]
    config: Option<PathBuf>,
    /// Block length.
    #[arg(long)]
    n: Option<usize>,
    /// Typicality slack.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Codebook redraws; trials are split evenly across them.
    #[arg(long)]
    batches: Option<usize>,
    /// Slack on codebook exponents; defaults to epsilon.
    #[arg(long, allow_hyphen_values = true)]
    codebook_slack: Option<f64>,
    /// Slack on bin exponents; defaults to twice the codebook slack.
    #[arg(long, allow_hyphen_values = true)]
    bin_slack: Option<f64>,
    /// Distortion level for the exceedance fraction.
    #[arg(long)]
    d_target: Option<f64>,
    /// Refuse codebooks above 2^cap stored symbols.
    #[arg(long)]
    memory_cap_log2: Option<f64>,
    /// Also write per-trial outcomes; needs --out-dir.
    #[arg(long)]
    per_trial: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub runs: Vec<SimConfig>,
    #[serde(default)]
    pub per_trial: bool,
}

fn resolve(opts: &Opts, global: &Global) -> Result<(SimulateConfig, u64)> {
    let (mut cfg, file_seed) = match (&opts.config, global.preset) {
        (Some(_), Some(_)) => return Err(CliError::Usage("--config and --preset are exclusive".into())),
        (Some(path), None) => {
            let loaded = load_config(path, "simulate")?;
            let cfg = if loaded.config.get("runs").is_some() {
                from_value::<SimulateConfig>(path, loaded.config)?
            } else {
                SimulateConfig { preset: None, runs: vec![from_value(path, loaded.config)?], per_trial: false }
            };
            let seed = loaded.seed.or(cfg.runs.first().map(|r| r.seed));
            (cfg, seed)
        }
        (None, Some(p)) => {
            let seed = global.seed.unwrap_or(0);
            let runs = match p {
                Preset::LosslessIdentical => vec![presets::lossless_identical_sim(seed)],
                Preset::NSweep => presets::SWEEP_BLOCKLENGTHS.iter().map(|&n| presets::sweep_sim(n, seed)).collect(),
                _ => {
                    return Err(CliError::Usage(format!(
                        "simulate takes lossless-identical or n-sweep, got {}",
                        p.name()
                    )))
                }
            };
            (SimulateConfig { preset: Some(p.name().into()), runs, per_trial: false }, Some(seed))
        }
        (None, None) => return Err(CliError::Usage("simulate needs --config or --preset".into())),
    };
    if cfg.runs.is_empty() {
        return Err(cascade_core::Error::Validation("runs: no simulation configured".into()).into());
    }
    if opts.n.is_some() && cfg.runs.len() > 1 {
        return Err(CliError::Usage("--n cannot override a sweep over block lengths".into()));
    }
    let seed = global.seed.or(file_seed).unwrap_or(0);
    for run in &mut cfg.runs {
        run.seed = seed;
        if let Some(n) = opts.n {
            run.n = n;
        }
        if let Some(e) = opts.epsilon {
            run.epsilon = e;
        }
        if let Some(t) = opts.trials {
            run.trials = t;
        }
        if let Some(b) = opts.batches {
            run.batches = b;
        }
        if let Some(s) = opts.codebook_slack {
            run.codebook_slack = Some(s);
        }
        if let Some(s) = opts.bin_slack {
            run.bin_slack = Some(s);
        }
        if let Some(d) = opts.d_target {
            run.d_target = Some(d);
        }
        if let Some(c) = opts.memory_cap_log2 {
            run.memory_cap_log2 = c;
        }
        run.validate()?;
    }
    cfg.per_trial |= opts.per_trial;
    if cfg.per_trial && !global.sink.has_dir() {
        return Err(CliError::Usage("--per-trial needs --out-dir".into()));
    }
    Ok((cfg, seed))
}

fn opt(v: Option<f64>) -> String {
    v.map(sig12).unwrap_or_default()
}

fn sweep_csv(summaries: &[SimSummary]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for s in summaries {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            s.n,
            s.trials,
            s.counts.ok,
            sig12(s.failure_rate),
            opt(s.mean_distortion),
            opt(s.exceed_fraction),
            sig12(s.rates.r1_effective),
            sig12(s.rates.r2_effective)
        ));
    }
    out
}

pub fn run(opts: Opts, mut global: Global) -> Result<()> {
    let (cfg, seed) = resolve(&opts, &global)?;
    let mut summaries = Vec::with_capacity(cfg.runs.len());
    let sweep = cfg.runs.len() > 1;
    for run in &cfg.runs {
        if cfg.per_trial {
            let (summary, outcomes) = run_trials_with_outcomes(run)?;
            let name = if sweep { format!("trials_n{}.csv", run.n) } else { "trials.csv".into() };
            global.sink.emit(&name, &outcomes_csv(&outcomes), false)?;
            summaries.push(summary);
        } else {
            summaries.push(run_trials(run)?);
        }
    }
    if sweep {
        global.sink.emit("summary.json", &render_json(&summaries), false)?;
        global.sink.emit("sweep.csv", &sweep_csv(&summaries), true)?;
    } else {
        global.sink.emit("summary.json", &render_json(&summaries[0]), true)?;
    }
    global.sink.finish("simulate", seed, &cfg)
}
