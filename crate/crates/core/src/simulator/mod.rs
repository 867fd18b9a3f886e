//! Monte Carlo run of the random-coding scheme behind the inner region.
//!
//! Encoder 1 looks for the first codeword `u(i)` jointly typical with `x^n`,
//! then the first `v(i, j)` typical with `(x^n, u(i))`, and sends the two bin
//! indices. Encoder 2 recovers `i` and `j` as the unique typical candidates
//! in those bins given `y^n`, picks the first `z(i, k)` typical with
//! everything it holds, and sends `(i, k)`. The decoder looks up `z(i, k)`.
//!
//! Typicality is robust strong typicality: every symbol tuple's empirical
//! frequency lies within `epsilon * p` of `p`, and impossible tuples never
//! occur. Codebook and bin exponents carry their own slacks, which default
//! to `epsilon` and twice the codebook slack.

mod codebook;
mod typical;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::region::{evaluate_inner_point, AuxiliarySystem, AX_U, AX_V, AX_X, AX_Y, AX_Z};
use crate::{DistortionFn, Error, JointSource, Result};

pub use codebook::{generate_codebooks, CodebookSet, CodebookSizes, SchemeInformation};
pub use typical::is_jointly_typical;
use typical::TypicalityTest;

/// Default memory cap, in log2 of stored codeword symbols.
pub const DEFAULT_MEMORY_CAP_LOG2: f64 = 28.0;

/// Number of equal-width cells in the distortion histogram.
pub const HISTOGRAM_CELLS: usize = 20;

fn one() -> usize {
    1
}

fn default_cap() -> f64 {
    DEFAULT_MEMORY_CAP_LOG2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Block length.
    pub n: usize,
    /// Typicality slack.
    pub epsilon: f64,
    /// Slack added to codebook exponents; defaults to `epsilon`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codebook_slack: Option<f64>,
    /// Slack added to bin exponents; defaults to twice the codebook slack.
    /// Negative values shrink the bin range below the conditional rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_slack: Option<f64>,
    pub source: JointSource,
    pub dist: DistortionFn,
    pub aux: AuxiliarySystem,
    pub trials: usize,
    /// Codebooks are redrawn for each batch.
    #[serde(default = "one")]
    pub batches: usize,
    pub seed: u64,
    /// Distortion level for the exceedance fraction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_target: Option<f64>,
    #[serde(default = "default_cap")]
    pub memory_cap_log2: f64,
}

impl SimConfig {
    pub fn new(
        n: usize,
        epsilon: f64,
        source: JointSource,
        dist: DistortionFn,
        aux: AuxiliarySystem,
        trials: usize,
        seed: u64,
    ) -> Self {
        Self {
            n,
            epsilon,
            codebook_slack: None,
            bin_slack: None,
            source,
            dist,
            aux,
            trials,
            batches: 1,
            seed,
            d_target: None,
            memory_cap_log2: DEFAULT_MEMORY_CAP_LOG2,
        }
    }

    pub fn with_slacks(mut self, codebook: f64, bin: f64) -> Self {
        self.codebook_slack = Some(codebook);
        self.bin_slack = Some(bin);
        self
    }

    pub fn with_batches(mut self, batches: usize) -> Self {
        self.batches = batches;
        self
    }

    pub fn with_d_target(mut self, d: f64) -> Self {
        self.d_target = Some(d);
        self
    }

    pub fn with_memory_cap_log2(mut self, cap: f64) -> Self {
        self.memory_cap_log2 = cap;
        self
    }

    pub fn codebook_slack(&self) -> f64 {
        self.codebook_slack.unwrap_or(self.epsilon)
    }

    pub fn bin_slack(&self) -> f64 {
        self.bin_slack.unwrap_or(2.0 * self.codebook_slack())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Validation("block length must be positive".into()));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Validation(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        for (name, v) in [("codebook_slack", self.codebook_slack()), ("bin_slack", self.bin_slack())] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite, got {v}")));
            }
        }
        if self.batches == 0 {
            return Err(Error::Validation("batch count must be positive".into()));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::Validation("block length too large".into()));
        }
        if !self.memory_cap_log2.is_finite() {
            return Err(Error::Validation("memory cap must be finite".into()));
        }
        if let Some(d) = self.d_target {
            if !d.is_finite() {
                return Err(Error::Validation("d_target must be finite".into()));
            }
        }
        self.aux.check_compatible(&self.source, &self.dist)?;
        let sizes = [self.source.size_x(), self.source.size_y(), self.aux.size_u(), self.aux.size_v(), self.aux.size_z()];
        if sizes.iter().any(|&s| s > 256) {
            return Err(Error::Validation("alphabets above 256 symbols are not supported".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Validation(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Ok,
    Enc1UFail,
    Enc1VFail,
    Enc2UAmbiguous,
    Enc2VAmbiguous,
    Enc2ZFail,
}

impl TrialStatus {
    pub const ALL: [TrialStatus; 6] = [
        TrialStatus::Ok,
        TrialStatus::Enc1UFail,
        TrialStatus::Enc1VFail,
        TrialStatus::Enc2UAmbiguous,
        TrialStatus::Enc2VAmbiguous,
        TrialStatus::Enc2ZFail,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TrialStatus::Ok => "ok",
            TrialStatus::Enc1UFail => "enc1_u_fail",
            TrialStatus::Enc1VFail => "enc1_v_fail",
            TrialStatus::Enc2UAmbiguous => "enc2_u_ambiguous",
            TrialStatus::Enc2VAmbiguous => "enc2_v_ambiguous",
            TrialStatus::Enc2ZFail => "enc2_z_fail",
        }
    }
}

/// What Encoder 1 sends. On failure the bins of codeword 0 are sent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Encoder1Output {
    pub b_u: u64,
    pub b_v: u64,
    pub failure: Option<TrialStatus>,
}

/// What Encoder 2 sends. On failure the failing index is sent as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Encoder2Output {
    pub i: usize,
    pub k: usize,
    pub failure: Option<TrialStatus>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Messages {
    pub b_u: u64,
    pub b_v: u64,
    pub i: usize,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub batch: usize,
    pub status: TrialStatus,
    /// Block distortion, present only for successful trials.
    pub distortion: Option<f64>,
    /// Block distortion of whatever the decoder produced.
    pub realized_distortion: f64,
    pub messages: Messages,
}

/// Typicality tests and codebook sizes shared by all trials of a configuration.
#[derive(Debug, Clone)]
pub struct Scheme {
    cfg: SimConfig,
    sizes: CodebookSizes,
    expected_distortion: f64,
    xu: TypicalityTest,
    xuv: TypicalityTest,
    yu: TypicalityTest,
    yuv: TypicalityTest,
    yuvz: TypicalityTest,
}

impl Scheme {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        let sizes = CodebookSizes::plan(cfg)?;
        let joint = cfg.aux.joint(&cfg.source)?;
        let test = |axes: &[usize]| TypicalityTest::new(&joint.marginal_unchecked(axes), cfg.n, cfg.epsilon);
        Ok(Self {
            cfg: cfg.clone(),
            sizes,
            expected_distortion: evaluate_inner_point(&cfg.source, &cfg.dist, &cfg.aux)?.d,
            xu: test(&[AX_X, AX_U]),
            xuv: test(&[AX_X, AX_U, AX_V]),
            yu: test(&[AX_Y, AX_U]),
            yuv: test(&[AX_Y, AX_U, AX_V]),
            yuvz: test(&[AX_Y, AX_U, AX_V, AX_Z]),
        })
    }

    pub fn sizes(&self) -> &CodebookSizes {
        &self.sizes
    }

    pub fn codebooks(&self, batch: usize) -> Result<CodebookSet> {
        codebook::generate_batch(&self.cfg, &self.sizes, batch as u64)
    }

    fn check_len(&self, seq: &[u8]) -> Result<()> {
        if seq.len() != self.cfg.n {
            return Err(Error::Validation(format!("block of length {} for n = {}", seq.len(), self.cfg.n)));
        }
        Ok(())
    }

    fn check_codebooks(&self, cb: &CodebookSet) -> Result<()> {
        if cb.sizes() != &self.sizes {
            return Err(Error::Validation("codebooks were drawn for another configuration".into()));
        }
        Ok(())
    }

    pub fn encode1(&self, x: &[u8], cb: &CodebookSet) -> Result<Encoder1Output> {
        self.check_len(x)?;
        self.check_codebooks(cb)?;
        let nu = self.cfg.aux.size_u();
        let base_x: Vec<usize> = x.iter().map(|&s| s as usize).collect();
        let mut counts = Vec::new();
        let Some(i) = (0..self.sizes.m1 as usize).find(|&i| self.xu.check(&base_x, cb.u(i), &mut counts)) else {
            return Ok(Encoder1Output { b_u: cb.bin_u(0), b_v: cb.bin_v(0, 0), failure: Some(TrialStatus::Enc1UFail) });
        };
        let base_xu: Vec<usize> = x.iter().zip(cb.u(i)).map(|(&x, &u)| x as usize * nu + u as usize).collect();
        match (0..self.sizes.m2 as usize).find(|&j| self.xuv.check(&base_xu, cb.v(i, j), &mut counts)) {
            Some(j) => Ok(Encoder1Output { b_u: cb.bin_u(i), b_v: cb.bin_v(i, j), failure: None }),
            None => Ok(Encoder1Output { b_u: cb.bin_u(i), b_v: cb.bin_v(i, 0), failure: Some(TrialStatus::Enc1VFail) }),
        }
    }

    pub fn encode2(&self, y: &[u8], b_u: u64, b_v: u64, cb: &CodebookSet) -> Result<Encoder2Output> {
        self.check_len(y)?;
        self.check_codebooks(cb)?;
        let (nu, nv) = (self.cfg.aux.size_u(), self.cfg.aux.size_v());
        let mut counts = Vec::new();
        let base_y: Vec<usize> = y.iter().map(|&s| s as usize).collect();
        let Some(i) = unique(cb.members_u(b_u), |i| self.yu.check(&base_y, cb.u(i), &mut counts)) else {
            return Ok(Encoder2Output { i: 0, k: 0, failure: Some(TrialStatus::Enc2UAmbiguous) });
        };
        let base_yu: Vec<usize> = y.iter().zip(cb.u(i)).map(|(&y, &u)| y as usize * nu + u as usize).collect();
        let Some(j) = unique(cb.members_v(i, b_v), |j| self.yuv.check(&base_yu, cb.v(i, j), &mut counts)) else {
            return Ok(Encoder2Output { i, k: 0, failure: Some(TrialStatus::Enc2VAmbiguous) });
        };
        let base_yuv: Vec<usize> = base_yu.iter().zip(cb.v(i, j)).map(|(&b, &v)| b * nv + v as usize).collect();
        match (0..self.sizes.m3 as usize).find(|&k| self.yuvz.check(&base_yuv, cb.z(i, k), &mut counts)) {
            Some(k) => Ok(Encoder2Output { i, k, failure: None }),
            None => Ok(Encoder2Output { i, k: 0, failure: Some(TrialStatus::Enc2ZFail) }),
        }
    }

    /// Runs every trial and returns the summary with the per-trial outcomes.
    pub fn run(&self) -> Result<(SimSummary, Vec<TrialOutcome>)> {
        let cfg = &self.cfg;
        let per_batch = cfg.trials.div_ceil(cfg.batches).max(1);
        let source_draw = WeightedIndex::new(cfg.source.probs()).map_err(|e| Error::InvalidPmf(e.to_string()))?;
        let ny = cfg.source.size_y();
        let mut outcomes = Vec::with_capacity(cfg.trials);
        for batch in 0..cfg.batches {
            let range = (batch * per_batch).min(cfg.trials)..((batch + 1) * per_batch).min(cfg.trials);
            if range.is_empty() {
                continue;
            }
            let cb = self.codebooks(batch)?;
            let part: Result<Vec<TrialOutcome>> = range
                .into_par_iter()
                .map(|trial| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(2 * trial as u64 + 1);
                    let (x, y): (Vec<u8>, Vec<u8>) = (0..cfg.n)
                        .map(|_| {
                            let s = source_draw.sample(&mut rng);
                            ((s / ny) as u8, (s % ny) as u8)
                        })
                        .unzip();
                    let e1 = self.encode1(&x, &cb)?;
                    let e2 = self.encode2(&y, e1.b_u, e1.b_v, &cb)?;
                    let z = decode(e2.i, e2.k, &cb)?;
                    let realized = cfg.dist.block_average(&x, &y, z);
                    let status = e1.failure.or(e2.failure).unwrap_or(TrialStatus::Ok);
                    Ok(TrialOutcome {
                        trial,
                        batch,
                        status,
                        distortion: (status == TrialStatus::Ok).then_some(realized),
                        realized_distortion: realized,
                        messages: Messages { b_u: e1.b_u, b_v: e1.b_v, i: e2.i, k: e2.k },
                    })
                })
                .collect();
            outcomes.extend(part?);
        }
        Ok((self.summarize(&outcomes), outcomes))
    }

    fn summarize(&self, outcomes: &[TrialOutcome]) -> SimSummary {
        let cfg = &self.cfg;
        let d_max = cfg.dist.table().iter().copied().fold(0.0, f64::max);
        let mut counts = StatusCounts::default();
        let mut histogram = Histogram::new(0.0, d_max, HISTOGRAM_CELLS);
        let mut ok = Vec::new();
        for o in outcomes {
            counts.add(o.status);
            if let Some(d) = o.distortion {
                histogram.add(d);
                ok.push(d);
            }
        }
        let mean = (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64);
        let std_error = mean.filter(|_| ok.len() > 1).map(|m| {
            let var = ok.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (ok.len() - 1) as f64;
            (var / ok.len() as f64).sqrt()
        });
        let exceed_fraction = match (cfg.d_target, outcomes.len()) {
            (Some(t), len) if len > 0 => {
                Some(outcomes.iter().filter(|o| o.realized_distortion > t).count() as f64 / len as f64)
            }
            _ => None,
        };
        let s = &self.sizes;
        let n = cfg.n as f64;
        let info = &s.info;
        let rates = RateReport {
            r1_nominal: info.x_u_given_y + info.x_v_given_yu + 2.0 * cfg.bin_slack(),
            r1_effective: ((s.bins_u as f64).log2() + (s.bins_v as f64).log2()) / n,
            r2_nominal: info.x_u + info.yv_z_given_u + 2.0 * cfg.codebook_slack(),
            r2_effective: ((s.m1 as f64).log2() + (s.m3 as f64).log2()) / n,
        };
        SimSummary {
            n: cfg.n,
            trials: outcomes.len(),
            batches: cfg.batches,
            epsilon: cfg.epsilon,
            codebook_slack: cfg.codebook_slack(),
            bin_slack: cfg.bin_slack(),
            failure_rate: if outcomes.is_empty() { 0.0 } else { 1.0 - counts.ok as f64 / outcomes.len() as f64 },
            counts,
            mean_distortion: mean,
            std_error,
            expected_distortion: self.expected_distortion,
            d_target: cfg.d_target,
            exceed_fraction,
            histogram,
            rates,
            sizes: *s,
        }
    }
}

/// The only member passing `typical`, if exactly one does.
fn unique(members: &[u32], mut typical: impl FnMut(usize) -> bool) -> Option<usize> {
    let mut found = None;
    for &m in members {
        if typical(m as usize) {
            if found.is_some() {
                return None;
            }
            found = Some(m as usize);
        }
    }
    found
}

/// Encoder 1 for a single block.
pub fn encode1(x: &[u8], cb: &CodebookSet, cfg: &SimConfig) -> Result<Encoder1Output> {
    Scheme::new(cfg)?.encode1(x, cb)
}

/// Encoder 2 for a single block.
pub fn encode2(y: &[u8], b_u: u64, b_v: u64, cb: &CodebookSet, cfg: &SimConfig) -> Result<Encoder2Output> {
    Scheme::new(cfg)?.encode2(y, b_u, b_v, cb)
}

/// The decoder: codeword `z(i, k)`.
pub fn decode(i: usize, k: usize, cb: &CodebookSet) -> Result<&[u8]> {
    let s = cb.sizes();
    if i as u64 >= s.m1 || k as u64 >= s.m3 {
        return Err(Error::Validation(format!("indices ({i}, {k}) outside {} x {}", s.m1, s.m3)));
    }
    Ok(cb.z(i, k))
}

/// Runs `cfg.trials` blocks and summarizes them.
pub fn run_trials(cfg: &SimConfig) -> Result<SimSummary> {
    Ok(run_trials_with_outcomes(cfg)?.0)
}

pub fn run_trials_with_outcomes(cfg: &SimConfig) -> Result<(SimSummary, Vec<TrialOutcome>)> {
    Scheme::new(cfg)?.run()
}

/// Per-trial CSV with columns `trial,status,distortion`.
pub fn outcomes_csv(outcomes: &[TrialOutcome]) -> String {
    let mut out = String::from("trial,status,distortion\n");
    for o in outcomes {
        let d = o.distortion.map(crate::fmt::sig12).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", o.trial, o.status.as_str(), d));
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub ok: u64,
    pub enc1_u_fail: u64,
    pub enc1_v_fail: u64,
    pub enc2_u_ambiguous: u64,
    pub enc2_v_ambiguous: u64,
    pub enc2_z_fail: u64,
}

impl StatusCounts {
    pub fn add(&mut self, status: TrialStatus) {
        *self.slot(status) += 1;
    }

    pub fn get(&self, status: TrialStatus) -> u64 {
        let mut c = *self;
        *c.slot(status)
    }

    fn slot(&mut self, status: TrialStatus) -> &mut u64 {
        match status {
            TrialStatus::Ok => &mut self.ok,
            TrialStatus::Enc1UFail => &mut self.enc1_u_fail,
            TrialStatus::Enc1VFail => &mut self.enc1_v_fail,
            TrialStatus::Enc2UAmbiguous => &mut self.enc2_u_ambiguous,
            TrialStatus::Enc2VAmbiguous => &mut self.enc2_v_ambiguous,
            TrialStatus::Enc2ZFail => &mut self.enc2_z_fail,
        }
    }

    pub fn total(&self) -> u64 {
        TrialStatus::ALL.iter().map(|&s| self.get(s)).sum()
    }

    pub fn failures(&self) -> u64 {
        self.total() - self.ok
    }

    pub fn merge(&self, other: &Self) -> Self {
        let mut out = *self;
        for s in TrialStatus::ALL {
            *out.slot(s) += other.get(s);
        }
        out
    }
}

/// Equal-width histogram on `[lo, hi]`; the last cell is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, cells: usize) -> Self {
        Self { lo, hi, counts: vec![0; cells.max(1)] }
    }

    pub fn add(&mut self, v: f64) {
        let cells = self.counts.len();
        let width = self.hi - self.lo;
        let cell = if width > 0.0 { ((v - self.lo) / width * cells as f64).floor() } else { 0.0 };
        let cell = (cell.max(0.0) as usize).min(cells - 1);
        self.counts[cell] += 1;
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.lo != other.lo || self.hi != other.hi || self.counts.len() != other.counts.len() {
            return Err(Error::Validation("histograms have different cells".into()));
        }
        let counts = self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect();
        Ok(Self { lo: self.lo, hi: self.hi, counts })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// `I(X;U|Y) + I(X;V|Y,U)` plus both bin slacks.
    pub r1_nominal: f64,
    /// `log2(bins_u bins_v) / n`.
    pub r1_effective: f64,
    /// `I(X;U) + I(Y,V;Z|U)` plus both codebook slacks.
    pub r2_nominal: f64,
    /// `log2(m1 m3) / n`.
    pub r2_effective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub n: usize,
    pub trials: usize,
    pub batches: usize,
    pub epsilon: f64,
    pub codebook_slack: f64,
    pub bin_slack: f64,
    pub counts: StatusCounts,
    /// Fraction of trials with any failure status.
    pub failure_rate: f64,
    /// Mean block distortion over successful trials.
    pub mean_distortion: Option<f64>,
    pub std_error: Option<f64>,
    /// `E d(X,Y,Z)` under the auxiliary joint.
    pub expected_distortion: f64,
    pub d_target: Option<f64>,
    /// Fraction of all trials whose decoded block exceeds `d_target`.
    pub exceed_fraction: Option<f64>,
    pub histogram: Histogram,
    pub rates: RateReport,
    pub sizes: CodebookSizes,
}
