//! Verification suites. Each prints one PASS or FAIL line with details,
//! writes `verify_<suite>.json` under `--out-dir`, and fails with exit code 4
//! when any check fails.

use std::collections::BTreeMap;
use std::path::PathBuf;

use cascade_core::gaussian::{
    forward_distortion, forward_subcase_threshold, forward_subcase_values, recompress_distortion, strategy_threshold,
    sum_variance, sumrate_gap, Strategy,
};
use cascade_core::model::entropy;
use cascade_core::presets;
use cascade_core::region::{
    evaluate_inner_point, lossless_function_rates, markov_inner_witness, markov_rates, optimize_inner_frontier,
    optimize_outer_frontier, FunctionTable, MarkovChain, RegionFrontier, SearchBudget,
};
use cascade_core::{DistortionFn, GaussianPair, JointSource, Kernel};
use clap::{Args, ValueEnum, ValueHint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::{from_value, load_config, render_json};
use crate::Global;

/// Failures listed in a report; the count covers all of them.
const MAX_LISTED: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Sum-rate gap within one bit and non-increasing in D.
    Lemma1,
    /// Forward wins exactly below the strategy threshold.
    Threshold,
    /// Both forward expressions agree at the sub-case boundary.
    Continuity,
    /// Outer search never beats inner search at matched slices.
    Sandwich,
    /// Markov witness matches the closed-form rates.
    Markov,
    /// Lossless function search reaches `(H(f|Y), H(f))`.
    Function,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma1 => "lemma1",
            Suite::Threshold => "threshold",
            Suite::Continuity => "continuity",
            Suite::Sandwich => "sandwich",
            Suite::Markov => "markov",
            Suite::Function => "function",
        }
    }
}

#[derive(Args)]
pub struct Opts {
    /// Suite to run.
    #[arg(value_enum)]
    suite: Option<Suite>,
    /// Run manifest or `{"suite": ...}`; the positional suite overrides it.
    #[arg(long, value_hint = ValueHint::FilePath)]
    config: Option<PathBuf>,
    /// Print the JSON report instead of the summary line.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub suite: Suite,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub pass: bool,
    pub checks: usize,
    pub failure_count: usize,
    pub failures: Vec<String>,
    pub metrics: BTreeMap<&'static str, f64>,
    pub summary: String,
}

struct Tally {
    checks: usize,
    failures: Vec<String>,
    metrics: BTreeMap<&'static str, f64>,
}

impl Tally {
    fn new() -> Self {
        Self { checks: 0, failures: Vec::new(), metrics: BTreeMap::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn metric(&mut self, name: &'static str, v: f64) {
        self.metrics.insert(name, v);
    }

    fn finish(self, suite: Suite, seed: u64, summary: String) -> SuiteReport {
        let failure_count = self.failures.len();
        SuiteReport {
            suite,
            seed,
            pass: failure_count == 0 && self.checks > 0,
            checks: self.checks,
            failure_count,
            failures: self.failures.into_iter().take(MAX_LISTED).collect(),
            metrics: self.metrics,
            summary,
        }
    }
}

fn random_row(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    // normalized exponentials, floored away from zero
    let raw: Vec<f64> = (0..len).map(|_| -(1.0 - rng.random::<f64>()).ln() + 0.02).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

fn random_source(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> Result<JointSource> {
    Ok(JointSource::new(nx, ny, random_row(rng, nx * ny))?)
}

fn random_dist(rng: &mut ChaCha8Rng, nx: usize, ny: usize, nz: usize) -> Result<DistortionFn> {
    Ok(DistortionFn::new(nx, ny, nz, (0..nx * ny * nz).map(|_| rng.random::<f64>()).collect())?)
}

fn lemma1(seed: u64) -> Result<SuiteReport> {
    let tol = 1e-9;
    let mut t = Tally::new();
    let mut max_gap = f64::NEG_INFINITY;
    for px in [0.25, 1.0, 2.0, 3.5] {
        for py in [1.0, 2.0, 4.0, 9.0] {
            if px > py {
                continue;
            }
            for rho in [-0.95, -0.6, -0.2, 0.0, 0.3, 0.7, 0.95] {
                let pair = GaussianPair::new(px, py, rho)?;
                let p_sum = sum_variance(&pair);
                let mut previous = f64::INFINITY;
                for k in 1..=40 {
                    let d = p_sum * k as f64 / 40.0;
                    let gap = sumrate_gap(&pair, d)?;
                    max_gap = max_gap.max(gap);
                    t.check((-tol..=1.0 + tol).contains(&gap) && gap <= previous + tol, || {
                        format!("px {px}, py {py}, rho {rho}, d {d}: gap {gap}, previous {previous}")
                    });
                    previous = gap;
                }
            }
        }
    }
    t.metric("max_gap", max_gap);
    let summary = format!("{} grid points, max gap {max_gap:.6} bit", t.checks);
    Ok(t.finish(Suite::Lemma1, seed, summary))
}

fn threshold(seed: u64) -> Result<SuiteReport> {
    let tol = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new();
    for _ in 0..100 {
        let py = rng.random_range(0.1..5.0);
        let px = py * rng.random_range(1.05..20.0);
        let rho = rng.random_range(-0.99..0.99);
        let pair = GaussianPair::new(px, py, rho)?;
        let thr = 0.5 * (px / py).log2();
        let mut r1s: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..2.0 * thr + 1.0)).collect();
        r1s.push(thr);
        for r1 in r1s {
            for r2 in [0.0, 0.5, 2.0, rng.random_range(0.0..6.0)] {
                let fw = forward_distortion(&pair, r1, r2)?;
                let rc = recompress_distortion(&pair, r1, r2)?;
                let choice = strategy_threshold(&pair, r1)?.choice;
                let ok = if r1 < thr {
                    fw <= rc + tol && choice == Strategy::Forward
                } else {
                    rc <= fw + tol && choice == Strategy::Recompress
                };
                t.check(ok, || format!("px {px}, py {py}, rho {rho}, r1 {r1}, r2 {r2}: forward {fw}, recompress {rc}"));
            }
        }
    }
    let summary = format!("100 pairs with px > py, {} rate points", t.checks);
    Ok(t.finish(Suite::Threshold, seed, summary))
}

fn continuity(seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let pair = GaussianPair::new(rng.random_range(0.1..10.0), rng.random_range(0.1..10.0), rng.random_range(-0.99..0.99))?;
        let r1 = rng.random_range(0.0..5.0);
        let r2 = forward_subcase_threshold(&pair, r1)?;
        let (below, above) = forward_subcase_values(&pair, r1, r2)?;
        let diff = (below - above).abs();
        worst = worst.max(diff);
        t.check(diff <= 1e-9, || format!("{pair:?}, r1 {r1}: {below} vs {above}"));
    }
    t.metric("worst_disagreement", worst);
    let summary = format!("{} boundary points, worst disagreement {worst:.3e}", t.checks);
    Ok(t.finish(Suite::Continuity, seed, summary))
}

/// Minimum and zero-rate distortion levels.
fn distortion_range(source: &JointSource, dist: &DistortionFn) -> (f64, f64) {
    let (nx, ny, nz) = (dist.size_x(), dist.size_y(), dist.size_z());
    let pairs = || (0..nx).flat_map(move |x| (0..ny).map(move |y| (x, y)));
    let d_min = pairs()
        .map(|(x, y)| source.p(x, y) * (0..nz).map(|z| dist.get(x, y, z)).fold(f64::MAX, f64::min))
        .sum();
    let d_max = (0..nz)
        .map(|z| pairs().map(|(x, y)| source.p(x, y) * dist.get(x, y, z)).sum::<f64>())
        .fold(f64::MAX, f64::min);
    (d_min, d_max)
}

fn support(frontier: &RegionFrontier, d: f64, w1: f64, w2: f64) -> Option<f64> {
    frontier.best_weighted(d, w1, w2).map(|p| w1 * p.triple.r1 + w2 * p.triple.r2)
}

fn sandwich(seed: u64) -> Result<SuiteReport> {
    let slack = 5e-3;
    let directions = [(1.0, 0.0), (0.0, 1.0), (0.5, 0.5), (0.25, 0.75), (0.75, 0.25)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new();
    let mut worst = f64::NEG_INFINITY;
    for s in 0..3u64 {
        let source = random_source(&mut rng, 2, 2)?;
        let dist = random_dist(&mut rng, 2, 2, 2)?;
        let (d_min, d_max) = distortion_range(&source, &dist);
        let slices: Vec<f64> = [0.0, 0.5].iter().map(|f| d_min + f * (d_max - d_min)).collect();
        let inner_budget = SearchBudget::new(3, 3000, seed.wrapping_add(s)).with_targets(slices.clone());
        let inner = optimize_inner_frontier(&source, &dist, (2, 2, 2), &inner_budget)?;
        let outer_budget = SearchBudget::new(8, 8000, seed.wrapping_add(100 + s)).with_targets(slices.clone());
        let outer = optimize_outer_frontier(&source, &dist, (4, 2), &outer_budget)?;
        for &d in &slices {
            for &(w1, w2) in &directions {
                let (i, o) = (support(&inner, d, w1, w2), support(&outer, d, w1, w2));
                if let (Some(i), Some(o)) = (i, o) {
                    worst = worst.max(o - i);
                }
                t.check(matches!((i, o), (Some(i), Some(o)) if o <= i + slack), || {
                    format!("source {s}, D {d}, direction ({w1}, {w2}): outer {o:?}, inner {i:?}")
                });
            }
        }
    }
    t.metric("worst_outer_excess", worst);
    let summary = format!("3 sources x 2 slices x 5 directions, worst outer excess {worst:.2e}");
    Ok(t.finish(Suite::Sandwich, seed, summary))
}

fn markov(seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (nx, ny, nz) = (rng.random_range(2..5), rng.random_range(2..5), rng.random_range(2..5));
        let source = random_source(&mut rng, nx, ny)?;
        let rows: Vec<Vec<f64>> = (0..nx).map(|_| random_row(&mut rng, nz)).collect();
        let kernel = Kernel::from_rows(&rows)?;
        let chain = MarkovChain::YXZ;
        let (r1, r2) = markov_rates(&source, chain, &chain.expand(&source, &kernel)?)?;
        let dist = random_dist(&mut rng, nx, ny, nz)?;
        let w = evaluate_inner_point(&source, &dist, &markov_inner_witness(&source, &kernel)?)?;
        let dev = (w.r1 - r1).abs().max((w.r2 - r2).abs());
        worst = worst.max(dev);
        t.check(dev <= 1e-10, || format!("sizes ({nx}, {ny}, {nz}): witness ({}, {}) vs ({r1}, {r2})", w.r1, w.r2));
    }
    t.metric("worst_deviation", worst);
    let summary = format!("20 random Y-X-Z instances, worst deviation {worst:.3e}");
    Ok(t.finish(Suite::Markov, seed, summary))
}

/// `H(f(X,Y) | Y)` and `H(f(X,Y))`.
fn function_entropies(source: &JointSource, f: &FunctionTable) -> Result<(f64, f64)> {
    let (ny, nz) = (source.size_y(), f.size_z());
    let mut p_zy = vec![0.0; nz * ny];
    for x in 0..source.size_x() {
        for y in 0..ny {
            p_zy[f.get(x, y) * ny + y] += source.p(x, y);
        }
    }
    let h_zy = entropy(&p_zy)?;
    let h_y = entropy(&source.marginal_y())?;
    Ok((h_zy - h_y, f.entropy(source)?))
}

fn function(seed: u64) -> Result<SuiteReport> {
    let tol = 5e-3;
    let budget = SearchBudget::new(4, 3000, seed);
    let km = presets::doubly_symmetric(presets::KM_CROSSOVER)?;
    let same = JointSource::from_rows(&[vec![0.3, 0.0], vec![0.0, 0.7]])?;
    let cases = [
        ("x xor y", km.clone(), FunctionTable::from_fn(2, 2, |x, y| x ^ y)),
        ("y", km, FunctionTable::from_fn(2, 2, |_, y| y)),
        ("x with x = y", same, FunctionTable::from_fn(2, 2, |x, _| x)),
    ];
    let mut t = Tally::new();
    let mut worst = 0.0f64;
    for (name, source, f) in &cases {
        let (r1, r2) = function_entropies(source, f)?;
        let found = lossless_function_rates(source, f, &budget)?;
        let dev = (found.r1 - r1).abs().max((found.r2 - r2).abs());
        worst = worst.max(dev);
        t.check(dev <= tol, || format!("{name}: found ({}, {}), expected ({r1}, {r2})", found.r1, found.r2));
    }
    t.metric("worst_deviation", worst);
    let summary = format!("{} functions, worst deviation from (H(f|Y), H(f)) {worst:.2e}", cases.len());
    Ok(t.finish(Suite::Function, seed, summary))
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    match suite {
        Suite::Lemma1 => lemma1(seed),
        Suite::Threshold => threshold(seed),
        Suite::Continuity => continuity(seed),
        Suite::Sandwich => sandwich(seed),
        Suite::Markov => markov(seed),
        Suite::Function => function(seed),
    }
}

pub fn run(opts: Opts, mut global: Global) -> Result<()> {
    global.reject_preset("verify")?;
    let (file_suite, file_seed) = match &opts.config {
        Some(path) => {
            let loaded = load_config(path, "verify")?;
            (Some(from_value::<VerifyConfig>(path, loaded.config)?.suite), loaded.seed)
        }
        None => (None, None),
    };
    let suite = opts
        .suite
        .or(file_suite)
        .ok_or_else(|| CliError::Usage("verify needs a suite name".into()))?;
    let seed = global.seed.or(file_seed).unwrap_or(0);
    let report = run_suite(suite, seed)?;
    let json = render_json(&report);
    if opts.json {
        print!("{json}");
    } else {
        println!("{} {}: {}", if report.pass { "PASS" } else { "FAIL" }, suite.name(), report.summary);
        for f in &report.failures {
            println!("  {f}");
        }
    }
    global.sink.emit(&format!("verify_{}.json", suite.name()), &json, false)?;
    global.sink.finish("verify", seed, &VerifyConfig { suite })?;
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Verification(format!("{} of {} checks failed in {}", report.failure_count, report.checks, suite.name())))
    }
}
