//! Multi-restart local search over products of probability simplices.
//!
//! Each task starts from random kernels (Dirichlet(1) rows, or random
//! deterministic rows on odd restarts), then perturbs one conditional row at
//! a time and keeps the change when the scalarized score does not get worse.
//! The score is `w1 R1 + w2 R2 + mu D`; when a distortion target is set the
//! search first drives `D` under the target and only then trades rates.
//! Tasks are independent and seeded from `(seed, task index)`, so results do
//! not depend on how rayon schedules them.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eval::{InnerEvaluator, OuterEvaluator};
use super::frontier::{FrontierKind, FrontierPoint, RegionFrontier, Witness};
use super::{AuxiliarySystem, OuterSystem};
use crate::error::{Error, Result};
use crate::model::{DistortionFn, JointSource, Kernel, RateDistortionTriple};

/// Distortion weight used with explicit distortion targets; only breaks ties.
const TARGET_TIE_WEIGHT: f64 = 1e-3;
/// Slack under which a target is considered met.
const TARGET_SLACK: f64 = 1e-12;
const POLISH_PASSES: usize = 3;

/// Share of iterations that move an encoder row and refit the decoder.
const REFIT_PROBABILITY: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub restarts: usize,
    /// Row perturbations per restart.
    pub iterations: usize,
    pub seed: u64,
    /// `(w1, w2)` pairs weighting `R1` and `R2`.
    #[serde(default = "default_rate_weights")]
    pub rate_weights: Vec<(f64, f64)>,
    /// Values of `mu`, used when `distortion_targets` is empty.
    #[serde(default = "default_distortion_weights")]
    pub distortion_weights: Vec<f64>,
    /// Distortion slices to search at. When non-empty each task enforces
    /// `D <= target` instead of sweeping `mu`.
    #[serde(default)]
    pub distortion_targets: Vec<f64>,
}

pub fn default_rate_weights() -> Vec<(f64, f64)> {
    vec![(1.0, 0.001), (0.75, 0.25), (0.5, 0.5), (0.25, 0.75), (0.001, 1.0)]
}

pub fn default_distortion_weights() -> Vec<f64> {
    vec![0.1, 0.5, 2.0, 8.0]
}

impl SearchBudget {
    pub fn new(restarts: usize, iterations: usize, seed: u64) -> Self {
        Self {
            restarts,
            iterations,
            seed,
            rate_weights: default_rate_weights(),
            distortion_weights: default_distortion_weights(),
            distortion_targets: Vec::new(),
        }
    }

    pub fn with_targets(mut self, targets: Vec<f64>) -> Self {
        self.distortion_targets = targets;
        self
    }

    pub fn with_rate_weights(mut self, weights: Vec<(f64, f64)>) -> Self {
        self.rate_weights = weights;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::ZeroBudget("restarts = 0".into()));
        }
        if self.iterations == 0 {
            return Err(Error::ZeroBudget("iterations = 0".into()));
        }
        if self.rate_weights.is_empty() {
            return Err(Error::ZeroBudget("no rate weights".into()));
        }
        for &(a, b) in &self.rate_weights {
            if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite() && a + b > 0.0) {
                return Err(Error::Validation(format!("bad rate weight pair ({a}, {b})")));
            }
        }
        if self.distortion_targets.is_empty() {
            if self.distortion_weights.is_empty() {
                return Err(Error::ZeroBudget("no distortion weights and no targets".into()));
            }
            if let Some(m) = self.distortion_weights.iter().find(|m| !(**m >= 0.0 && m.is_finite())) {
                return Err(Error::Validation(format!("bad distortion weight {m}")));
            }
        }
        if let Some(t) = self.distortion_targets.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(Error::Validation(format!("bad distortion target {t}")));
        }
        Ok(())
    }

    fn objectives(&self) -> Vec<Objective> {
        let mut out = Vec::new();
        for &(w1, w2) in &self.rate_weights {
            if self.distortion_targets.is_empty() {
                for &mu in &self.distortion_weights {
                    out.push(Objective { w1, w2, mu, target: None });
                }
            } else {
                for &t in &self.distortion_targets {
                    out.push(Objective { w1, w2, mu: TARGET_TIE_WEIGHT, target: Some(t) });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Objective {
    w1: f64,
    w2: f64,
    mu: f64,
    target: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Score {
    violation: f64,
    value: f64,
}

impl Objective {
    fn score(&self, t: &RateDistortionTriple) -> Score {
        let violation = self.target.map_or(0.0, |target| (t.d - target - TARGET_SLACK).max(0.0));
        Score { violation, value: self.w1 * t.r1 + self.w2 * t.r2 + self.mu * t.d }
    }
}

impl Score {
    /// Feasibility first, then value; ties count as no worse.
    fn no_worse_than(&self, other: &Score) -> bool {
        match (self.violation > 0.0, other.violation > 0.0) {
            (false, true) => true,
            (true, false) => false,
            (true, true) => {
                self.violation < other.violation
                    || (self.violation == other.violation && self.value <= other.value)
            }
            (false, false) => self.value <= other.value,
        }
    }
}

pub(crate) trait Searchable: Clone + Send + Sync {
    fn kernels(&self) -> [&Kernel; 2];
    fn kernels_mut(&mut self) -> [&mut Kernel; 2];
}

impl Searchable for AuxiliarySystem {
    fn kernels(&self) -> [&Kernel; 2] {
        [self.kernel_uv_given_x(), self.kernel_z_given_yuv()]
    }

    fn kernels_mut(&mut self) -> [&mut Kernel; 2] {
        AuxiliarySystem::kernels_mut(self)
    }
}

impl Searchable for OuterSystem {
    fn kernels(&self) -> [&Kernel; 2] {
        [self.kernel_u_given_x(), self.kernel_z_given_yu()]
    }

    fn kernels_mut(&mut self) -> [&mut Kernel; 2] {
        OuterSystem::kernels_mut(self)
    }
}

pub(crate) trait Evaluate<S> {
    fn evaluate(&mut self, s: &S) -> RateDistortionTriple;
}

impl Evaluate<AuxiliarySystem> for InnerEvaluator<'_> {
    fn evaluate(&mut self, s: &AuxiliarySystem) -> RateDistortionTriple {
        self.eval(s)
    }
}

impl Evaluate<OuterSystem> for OuterEvaluator<'_> {
    fn evaluate(&mut self, s: &OuterSystem) -> RateDistortionTriple {
        self.eval(s)
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64) -> f64 {
    (rng.random::<f64>() * lo.ln()).exp()
}

fn dirichlet_row(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    let mut total = 0.0;
    for v in out.iter_mut() {
        *v = rng.sample::<f64, _>(Exp1);
        total += *v;
    }
    out.iter_mut().for_each(|v| *v /= total);
}

fn vertex_row(out: &mut [f64], k: usize) {
    out.iter_mut().enumerate().for_each(|(i, v)| *v = if i == k { 1.0 } else { 0.0 });
}

pub(crate) fn random_kernel(rows: usize, cols: usize, vertices: bool, rng: &mut ChaCha8Rng) -> Kernel {
    let mut data = vec![0.0; rows * cols];
    for row in data.chunks_mut(cols) {
        if vertices {
            vertex_row(row, rng.random_range(0..cols));
        } else {
            dirichlet_row(rng, row);
        }
    }
    Kernel::new(rows, cols, data).expect("rows are normalized")
}

fn normalize(row: &mut [f64]) {
    let s: f64 = row.iter().sum();
    if s > 0.0 {
        row.iter_mut().for_each(|v| *v /= s);
    }
}

fn argmax(row: &[f64]) -> usize {
    row.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .map_or(0, |(i, _)| i)
}

/// Applies one random move to `row`. `other` is a different row of the
/// same kernel, if any.
fn perturb(row: &mut [f64], other: Option<&[f64]>, rng: &mut ChaCha8Rng) {
    let n = row.len();
    let support: Vec<usize> = (0..n).filter(|&i| row[i] > 0.0).collect();
    let pick_pair = |rng: &mut ChaCha8Rng| {
        let i = *support.choose(rng).expect("row has mass");
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        (i, j)
    };
    match rng.random_range(0..100) {
        0..35 => {
            let (i, j) = pick_pair(rng);
            let t = row[i] * log_uniform(rng, 1e-4);
            row[i] -= t;
            row[j] += t;
        }
        35..50 => {
            let (i, j) = pick_pair(rng);
            row[j] += row[i];
            row[i] = 0.0;
        }
        50..60 => vertex_row(row, rng.random_range(0..n)),
        60..70 => match other {
            Some(o) => row.copy_from_slice(o),
            None => vertex_row(row, argmax(row)),
        },
        70..90 => {
            let s = log_uniform(rng, 1e-4);
            let mut fresh = vec![0.0; n];
            dirichlet_row(rng, &mut fresh);
            row.iter_mut().zip(&fresh).for_each(|(v, f)| *v = (1.0 - s) * *v + s * f);
        }
        _ => vertex_row(row, argmax(row)),
    }
    row.iter_mut().for_each(|v| *v = v.max(0.0));
    normalize(row);
}

/// Current state of one local search.
struct Walk<'a, S, E> {
    sys: S,
    eval: &'a mut E,
    obj: &'a Objective,
    triple: RateDistortionTriple,
    score: Score,
}

impl<S: Searchable, E: Evaluate<S>> Walk<'_, S, E> {
    fn rescore(&mut self) -> (RateDistortionTriple, Score) {
        let t = self.eval.evaluate(&self.sys);
        let s = self.obj.score(&t);
        (t, s)
    }

    /// Applies `f` to row `r` of kernel `k`, keeping the change if it is no worse.
    fn try_row(&mut self, k: usize, r: usize, saved: &mut Vec<f64>, f: impl FnOnce(&mut [f64])) {
        saved.clear();
        saved.extend_from_slice(self.sys.kernels()[k].row(r));
        f(self.sys.kernels_mut()[k].row_mut(r));
        let (t, s) = self.rescore();
        if s.no_worse_than(&self.score) {
            self.triple = t;
            self.score = s;
        } else {
            self.sys.kernels_mut()[k].row_mut(r).copy_from_slice(saved);
        }
    }

    /// Moves encoder row `r`, then gives every decoder row its best vertex.
    /// The pair of changes is kept only if the result is no worse.
    fn try_with_refit(&mut self, r: usize, other: Option<&[f64]>, rng: &mut ChaCha8Rng) {
        let backup = self.sys.clone();
        perturb(self.sys.kernels_mut()[0].row_mut(r), other, rng);
        let (mut best_t, mut best_s) = self.rescore();
        let (rows, cols) = (self.sys.kernels()[1].rows(), self.sys.kernels()[1].cols());
        let mut best_row = vec![0.0; cols];
        for row in 0..rows {
            best_row.copy_from_slice(self.sys.kernels()[1].row(row));
            for z in 0..cols {
                vertex_row(self.sys.kernels_mut()[1].row_mut(row), z);
                let (t, s) = self.rescore();
                if s.no_worse_than(&best_s) {
                    best_t = t;
                    best_s = s;
                    best_row.copy_from_slice(self.sys.kernels()[1].row(row));
                }
            }
            self.sys.kernels_mut()[1].row_mut(row).copy_from_slice(&best_row);
        }
        if best_s.no_worse_than(&self.score) {
            self.triple = best_t;
            self.score = best_s;
        } else {
            self.sys = backup;
        }
    }
}

fn local_search<S: Searchable, E: Evaluate<S>>(
    sys: S,
    eval: &mut E,
    obj: &Objective,
    iterations: usize,
    rng: &mut ChaCha8Rng,
) -> (S, RateDistortionTriple) {
    let triple = eval.evaluate(&sys);
    let score = obj.score(&triple);
    let movable: Vec<usize> = (0..2).filter(|&k| sys.kernels()[k].cols() > 1).collect();
    if movable.is_empty() {
        return (sys, triple);
    }
    let mut walk = Walk { sys, eval, obj, triple, score };
    let mut saved = Vec::new();
    let mut other = Vec::new();

    for _ in 0..iterations {
        let refit = movable.len() == 2 && rng.random_bool(REFIT_PROBABILITY);
        let k = if refit { 0 } else { *movable.choose(rng).expect("non-empty") };
        let rows = walk.sys.kernels()[k].rows();
        let r = rng.random_range(0..rows);
        other.clear();
        if rows > 1 {
            let mut o = rng.random_range(0..rows - 1);
            if o >= r {
                o += 1;
            }
            other.extend_from_slice(walk.sys.kernels()[k].row(o));
        }
        let other_row = (!other.is_empty()).then_some(other.as_slice());
        if refit {
            walk.try_with_refit(r, other_row, rng);
        } else {
            walk.try_row(k, r, &mut saved, |row| perturb(row, other_row, rng));
        }
    }

    // snap rows to their modes where that costs nothing
    for _ in 0..POLISH_PASSES {
        for &k in &movable {
            for r in 0..walk.sys.kernels()[k].rows() {
                walk.try_row(k, r, &mut saved, |row| vertex_row(row, argmax(row)));
            }
        }
    }
    (walk.sys, walk.triple)
}

fn task_rng(seed: u64, task: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task as u64);
    rng
}

/// Searches test channels with `(|U|, |V|, |Z|) = cards` and returns the
/// Pareto frontier of the inner points found, each with its witness.
pub fn optimize_inner_frontier(
    source: &JointSource,
    dist: &DistortionFn,
    cards: (usize, usize, usize),
    budget: &SearchBudget,
) -> Result<RegionFrontier> {
    budget.validate()?;
    dist.check_source(source)?;
    let (nu, nv, nz) = cards;
    if nu == 0 || nv == 0 || nz == 0 {
        return Err(Error::Validation(format!("cardinalities must be positive, got {cards:?}")));
    }
    if nz != dist.size_z() {
        return Err(Error::Validation(format!(
            "|Z| = {nz} does not match the distortion table's {}",
            dist.size_z()
        )));
    }
    let (nx, ny) = (source.size_x(), source.size_y());
    let objectives = budget.objectives();
    let tasks: Vec<(usize, usize)> = (0..objectives.len())
        .flat_map(|o| (0..budget.restarts).map(move |r| (o, r)))
        .collect();

    let points: Vec<FrontierPoint> = tasks
        .par_iter()
        .enumerate()
        .map(|(t, &(o, restart))| {
            let mut rng = task_rng(budget.seed, t);
            let vertices = restart % 2 == 1;
            let k1 = random_kernel(nx, nu * nv, vertices, &mut rng);
            let k2 = random_kernel(ny * nu * nv, nz, vertices, &mut rng);
            let start = AuxiliarySystem::new(nu, nv, nz, k1, k2).expect("shapes match");
            let mut eval = InnerEvaluator::new(source, dist, cards);
            let (sys, triple) = local_search(start, &mut eval, &objectives[o], budget.iterations, &mut rng);
            FrontierPoint { triple, witness: Witness::Inner(sys) }
        })
        .collect();
    Ok(RegionFrontier::new(FrontierKind::Inner, budget.seed, points))
}

/// Searches outer test channels with `(|U|, |Z|) = cards`. The result is
/// flagged as a heuristic minimum: a better search can only lower it.
pub fn optimize_outer_frontier(
    source: &JointSource,
    dist: &DistortionFn,
    cards: (usize, usize),
    budget: &SearchBudget,
) -> Result<RegionFrontier> {
    budget.validate()?;
    dist.check_source(source)?;
    let (nu, nz) = cards;
    if nu == 0 || nz == 0 {
        return Err(Error::Validation(format!("cardinalities must be positive, got {cards:?}")));
    }
    if nz != dist.size_z() {
        return Err(Error::Validation(format!(
            "|Z| = {nz} does not match the distortion table's {}",
            dist.size_z()
        )));
    }
    let (nx, ny) = (source.size_x(), source.size_y());
    let objectives = budget.objectives();
    let tasks: Vec<(usize, usize)> = (0..objectives.len())
        .flat_map(|o| (0..budget.restarts).map(move |r| (o, r)))
        .collect();

    let points: Vec<FrontierPoint> = tasks
        .par_iter()
        .enumerate()
        .map(|(t, &(o, restart))| {
            let mut rng = task_rng(budget.seed, t);
            let vertices = restart % 2 == 1;
            let k1 = random_kernel(nx, nu, vertices, &mut rng);
            let k2 = random_kernel(ny * nu, nz, vertices, &mut rng);
            let start = OuterSystem::new(nu, nz, k1, k2).expect("shapes match");
            let mut eval = OuterEvaluator::new(source, dist, cards);
            let (sys, triple) = local_search(start, &mut eval, &objectives[o], budget.iterations, &mut rng);
            FrontierPoint { triple, witness: Witness::Outer(sys) }
        })
        .collect();
    Ok(RegionFrontier::new(FrontierKind::Outer, budget.seed, points))
}
