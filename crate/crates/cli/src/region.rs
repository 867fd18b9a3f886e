//! Frontier search on a finite-alphabet source, or closed-form Markov rates.
//!
//! Search outputs `inner_frontier.{csv,json}` and `outer_frontier.{csv,json}`;
//! the CSV columns are `r1,r2,d,kind,seed`. Markov inputs output
//! `markov.{csv,json}` with columns `chain,r1,r2,witness_r1,witness_r2`.

use std::path::PathBuf;

use cascade_core::fmt::sig12;
use cascade_core::model::SourceDocument;
use cascade_core::presets::{self, Preset};
use cascade_core::region::{
    evaluate_inner_point, markov_inner_witness, markov_rates, optimize_inner_frontier, optimize_outer_frontier,
    MarkovChain, RegionFrontier, SearchBudget,
};
use cascade_core::{DistortionFn, JointSource, Kernel};
use clap::{Args, ValueEnum, ValueHint};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::grid::parse_grid;
use crate::output::{from_value, load_config, read_json, render_json};
use crate::Global;

const DEFAULT_RESTARTS: usize = 4;
const DEFAULT_ITERATIONS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Inner,
    Outer,
    #[default]
    Both,
}

#[derive(Args)]
pub struct Opts {
    /// JSON config or run manifest; flags override its values.
    #[arg(long, value_hint = ValueHint::FilePath)]
    config: Option<PathBuf>,
    /// Source and distortion document `{"px_y": [[..]], "d": [[[..]]]}`.
    #[arg(long, value_hint = ValueHint::FilePath)]
    input: Option<PathBuf>,
    /// Which frontiers to search.
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// |U| of the inner search; defaults to |X| + 2.
    #[arg(long)]
    u: Option<usize>,
    /// |V| of the inner search; defaults to |X| + 2.
    #[arg(long)]
    v: Option<usize>,
    /// |U| of the outer search; defaults to |X| + 2.
    #[arg(long)]
    outer_u: Option<usize>,
    /// Random restarts per objective.
    #[arg(long)]
    restarts: Option<usize>,
    /// Local-search iterations per restart.
    #[arg(long)]
    iterations: Option<usize>,
    /// Distortion slices, as `a,b,c` or `start:stop:count`. Without them the
    /// search sweeps a fixed set of distortion weights.
    #[arg(long)]
    targets: Option<String>,
}

/// Markov chain input: `kernel` is `p(z|y)` for `X_Y_Z` and `p(z|x)` for `Y_X_Z`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovInput {
    pub chain: MarkovChain,
    pub px_y: Vec<Vec<f64>>,
    pub kernel: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markov: Option<MarkovInput>,
    #[serde(default)]
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_cards: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_u: Option<usize>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub targets: Vec<f64>,
}

fn default_restarts() -> usize {
    DEFAULT_RESTARTS
}

fn default_iterations() -> usize {
    DEFAULT_ITERATIONS
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            preset: None,
            source: None,
            markov: None,
            kind: Kind::Both,
            inner_cards: None,
            outer_u: None,
            restarts: DEFAULT_RESTARTS,
            iterations: DEFAULT_ITERATIONS,
            targets: Vec::new(),
        }
    }
}

fn resolve(opts: &Opts, global: &Global) -> Result<(RegionConfig, u64)> {
    let (mut cfg, file_seed) = match &opts.config {
        Some(path) => {
            let loaded = load_config(path, "region")?;
            (from_value::<RegionConfig>(path, loaded.config)?, loaded.seed)
        }
        None => (RegionConfig::default(), None),
    };
    if opts.input.is_some() && global.preset.is_some() {
        return Err(CliError::Usage("--input and --preset are exclusive".into()));
    }
    if let Some(path) = &opts.input {
        cfg.source = Some(from_value(path, read_json(path)?)?);
        cfg.markov = None;
        cfg.preset = None;
    }
    match global.preset {
        Some(p @ Preset::KornerMarton) => {
            let (source, dist) = presets::korner_marton();
            cfg.source = Some(SourceDocument::new(&source, &dist));
            cfg.markov = None;
            cfg.preset = Some(p.name().into());
            if cfg.targets.is_empty() {
                cfg.targets = vec![0.0];
            }
        }
        Some(p @ Preset::MarkovCopy) => {
            let (chain, source, kernel) = presets::markov_copy();
            cfg.markov = Some(MarkovInput { chain, px_y: source.rows(), kernel: kernel.to_rows() });
            cfg.source = None;
            cfg.preset = Some(p.name().into());
        }
        Some(p) => return Err(CliError::Usage(format!("region takes korner-marton or markov-copy, got {}", p.name()))),
        None => {}
    }
    if cfg.source.is_some() && cfg.markov.is_some() {
        return Err(CliError::Usage("config gives both source and markov".into()));
    }
    if let Some(k) = opts.kind {
        cfg.kind = k;
    }
    if let Some(r) = opts.restarts {
        cfg.restarts = r;
    }
    if let Some(i) = opts.iterations {
        cfg.iterations = i;
    }
    if let Some(spec) = &opts.targets {
        cfg.targets = parse_grid("targets", spec)?;
    }
    if let Some(doc) = &cfg.source {
        let nx = doc.px_y.len();
        let [u, v] = cfg.inner_cards.unwrap_or([nx + 2, nx + 2]);
        cfg.inner_cards = Some([opts.u.unwrap_or(u), opts.v.unwrap_or(v)]);
        cfg.outer_u = Some(opts.outer_u.or(cfg.outer_u).unwrap_or(nx + 2));
    } else if cfg.markov.is_none() {
        return Err(CliError::Usage("region needs --input, --config or --preset".into()));
    }
    Ok((cfg, global.seed.or(file_seed).unwrap_or(0)))
}

fn run_markov(input: &MarkovInput, global: &mut Global) -> Result<()> {
    let source = JointSource::from_rows(&input.px_y)?;
    let kernel = Kernel::from_rows(&input.kernel)?;
    let (r1, r2) = markov_rates(&source, input.chain, &input.chain.expand(&source, &kernel)?)?;
    // U = Z, V trivial; distortion plays no part in the rates
    let witness = match input.chain {
        MarkovChain::YXZ => {
            let aux = markov_inner_witness(&source, &kernel)?;
            let (nx, ny, nz) = (source.size_x(), source.size_y(), kernel.cols());
            let zero = DistortionFn::new(nx, ny, nz, vec![0.0; nx * ny * nz])?;
            let t = evaluate_inner_point(&source, &zero, &aux)?;
            Some((t.r1, t.r2))
        }
        MarkovChain::XYZ => None,
    };
    let chain = match input.chain {
        MarkovChain::XYZ => "X_Y_Z",
        MarkovChain::YXZ => "Y_X_Z",
    };
    let (w1, w2) = witness.map_or((String::new(), String::new()), |(a, b)| (sig12(a), sig12(b)));
    let csv = format!("chain,r1,r2,witness_r1,witness_r2\n{chain},{},{},{w1},{w2}\n", sig12(r1), sig12(r2));
    let report = serde_json::json!({
        "chain": input.chain,
        "r1": r1,
        "r2": r2,
        "witness": witness.map(|(a, b)| serde_json::json!({"r1": a, "r2": b})),
    });
    global.sink.emit("markov.csv", &csv, true)?;
    global.sink.emit("markov.json", &render_json(&report), false)
}

fn run_search(cfg: &RegionConfig, doc: &SourceDocument, seed: u64, global: &mut Global) -> Result<()> {
    let (source, dist) = doc.clone().into_parts()?;
    let nz = dist.size_z();
    let budget = SearchBudget::new(cfg.restarts, cfg.iterations, seed).with_targets(cfg.targets.clone());
    let mut frontiers: Vec<RegionFrontier> = Vec::new();
    if cfg.kind != Kind::Outer {
        let [u, v] = cfg.inner_cards.expect("resolved");
        frontiers.push(optimize_inner_frontier(&source, &dist, (u, v, nz), &budget)?);
    }
    if cfg.kind != Kind::Inner {
        let u = cfg.outer_u.expect("resolved");
        frontiers.push(optimize_outer_frontier(&source, &dist, (u, nz), &budget)?);
    }
    let mut combined = String::new();
    for f in &frontiers {
        let name = format!("{}_frontier", f.kind.as_str());
        let csv = f.to_csv();
        global.sink.emit(&format!("{name}.csv"), &csv, false)?;
        global.sink.emit(&format!("{name}.json"), &render_json(f), false)?;
        if combined.is_empty() {
            combined.push_str(&csv);
        } else {
            combined.extend(csv.lines().skip(1).map(|l| format!("{l}\n")));
        }
    }
    if !global.sink.has_dir() {
        print!("{combined}");
    }
    Ok(())
}

pub fn run(opts: Opts, mut global: Global) -> Result<()> {
    let (cfg, seed) = resolve(&opts, &global)?;
    match (&cfg.markov, &cfg.source) {
        (Some(m), _) => run_markov(m, &mut global)?,
        (None, Some(doc)) => run_search(&cfg, doc, seed, &mut global)?,
        (None, None) => unreachable!("resolve requires an input"),
    }
    global.sink.finish("region", seed, &cfg)
}
