//! Grid sweep of the Gaussian closed forms.
//!
//! With `--r1` and `--r2` the output has columns
//! `px,py,rho,r1,r2,d_inner,d_outer,strategy`; with `--d` it has
//! `px,py,rho,d,r_upper,r_lower,gap`. Rows follow the nesting order of the
//! columns, first column outermost.

use std::path::PathBuf;

use cascade_core::fmt::sig12;
use cascade_core::gaussian::{inner_bound_distortion, outer_bound_distortion, strategy_threshold, sumrate_gap, sumrate_lower, sumrate_upper};
use cascade_core::GaussianPair;
use clap::{Args, ValueHint};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::grid::parse_grid;
use crate::output::{from_value, load_config};
use crate::Global;

pub const RATE_HEADER: &str = "px,py,rho,r1,r2,d_inner,d_outer,strategy";
pub const SUMRATE_HEADER: &str = "px,py,rho,d,r_upper,r_lower,gap";
const OUTPUT_FILE: &str = "gaussian_sweep.csv";

#[derive(Args)]
pub struct Opts {
    /// JSON config or run manifest; flags override its values.
    #[arg(long, value_hint = ValueHint::FilePath)]
    config: Option<PathBuf>,
    /// Variance of X, as `a,b,c` or `start:stop:count`.
    #[arg(long, allow_hyphen_values = true)]
    px: Option<String>,
    /// Variance of Y.
    #[arg(long, allow_hyphen_values = true)]
    py: Option<String>,
    /// Correlation coefficient.
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    /// Rate of the first link, bits per symbol.
    #[arg(long, allow_hyphen_values = true)]
    r1: Option<String>,
    /// Rate of the second link, bits per symbol.
    #[arg(long, allow_hyphen_values = true)]
    r2: Option<String>,
    /// Distortion levels; switches to sum-rate bounds.
    #[arg(long, allow_hyphen_values = true)]
    d: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub px: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub py: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<f64>>,
}

fn resolve(opts: &Opts, global: &Global) -> Result<(SweepConfig, Option<u64>)> {
    let (mut cfg, seed) = match &opts.config {
        Some(path) => {
            let loaded = load_config(path, "gaussian-sweep")?;
            (from_value::<SweepConfig>(path, loaded.config)?, loaded.seed)
        }
        None => (SweepConfig::default(), None),
    };
    let flags = [
        ("px", &opts.px, &mut cfg.px),
        ("py", &opts.py, &mut cfg.py),
        ("rho", &opts.rho, &mut cfg.rho),
        ("r1", &opts.r1, &mut cfg.r1),
        ("r2", &opts.r2, &mut cfg.r2),
        ("d", &opts.d, &mut cfg.d),
    ];
    for (name, flag, slot) in flags {
        if let Some(spec) = flag {
            *slot = Some(parse_grid(name, spec)?);
        }
    }
    Ok((cfg, global.seed.or(seed)))
}

fn required<'a>(name: &str, grid: &'a Option<Vec<f64>>) -> Result<&'a [f64]> {
    grid.as_deref().ok_or_else(|| CliError::Usage(format!("gaussian-sweep needs --{name}")))
}

/// The CSV for a resolved config.
pub fn sweep_csv(cfg: &SweepConfig) -> Result<String> {
    let (px, py, rho) = (required("px", &cfg.px)?, required("py", &cfg.py)?, required("rho", &cfg.rho)?);
    let pairs = px.iter().flat_map(|&a| py.iter().flat_map(move |&b| rho.iter().map(move |&r| (a, b, r))));
    let at = |p: (f64, f64, f64), what: String, e: cascade_core::Error| {
        CliError::Core(cascade_core::Error::Validation(format!("at px = {}, py = {}, rho = {}, {what}: {e}", p.0, p.1, p.2)))
    };
    let mut out = String::new();
    match &cfg.d {
        Some(ds) => {
            if cfg.r1.is_some() || cfg.r2.is_some() {
                return Err(CliError::Usage("--d cannot be combined with --r1 or --r2".into()));
            }
            out.push_str(SUMRATE_HEADER);
            out.push('\n');
            for p in pairs {
                let pair = GaussianPair::new(p.0, p.1, p.2)?;
                for &d in ds {
                    let ctx = |e| at(p, format!("d = {d}"), e);
                    let upper = sumrate_upper(&pair, d).map_err(ctx)?.rate;
                    let lower = sumrate_lower(&pair, d).map_err(ctx)?.rate;
                    let gap = sumrate_gap(&pair, d).map_err(ctx)?;
                    let row = [p.0, p.1, p.2, d, upper, lower, gap].map(sig12);
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
            }
        }
        None => {
            let (r1s, r2s) = (required("r1", &cfg.r1)?, required("r2", &cfg.r2)?);
            out.push_str(RATE_HEADER);
            out.push('\n');
            for p in pairs {
                let pair = GaussianPair::new(p.0, p.1, p.2)?;
                for &r1 in r1s {
                    for &r2 in r2s {
                        let ctx = |e| at(p, format!("r1 = {r1}, r2 = {r2}"), e);
                        let inner = inner_bound_distortion(&pair, r1, r2).map_err(ctx)?;
                        let outer = outer_bound_distortion(&pair, r1, r2).map_err(ctx)?;
                        let strategy = strategy_threshold(&pair, r1).map_err(ctx)?.choice;
                        let row = [p.0, p.1, p.2, r1, r2, inner, outer].map(sig12);
                        out.push_str(&format!("{},{}\n", row.join(","), strategy.as_str()));
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn run(opts: Opts, mut global: Global) -> Result<()> {
    global.reject_preset("gaussian-sweep")?;
    let (cfg, seed) = resolve(&opts, &global)?;
    let csv = sweep_csv(&cfg)?;
    global.sink.emit(OUTPUT_FILE, &csv, true)?;
    global.sink.finish("gaussian-sweep", seed.unwrap_or(0), &cfg)
}
