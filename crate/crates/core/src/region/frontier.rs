use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{AuxiliarySystem, OuterSystem};
use crate::model::RateDistortionTriple;

/// A point counts toward a distortion slice `D` when its distortion is at most `D + SLICE_TOLERANCE`.
pub const SLICE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontierKind {
    Inner,
    Outer,
}

impl FrontierKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FrontierKind::Inner => "inner",
            FrontierKind::Outer => "outer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "system", rename_all = "snake_case")]
pub enum Witness {
    Inner(AuxiliarySystem),
    Outer(OuterSystem),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub triple: RateDistortionTriple,
    pub witness: Witness,
}

/// Pareto-pruned set of evaluated points with their witnesses.
///
/// Inner frontiers are certified members of the inner region but say nothing
/// about completeness. Outer frontiers come from a heuristic minimization, so
/// their rates are upper estimates of the true outer-region minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionFrontier {
    pub kind: FrontierKind,
    pub heuristic_minimum: bool,
    pub seed: u64,
    pub points: Vec<FrontierPoint>,
}

fn lexicographic(a: &RateDistortionTriple, b: &RateDistortionTriple) -> Ordering {
    a.r1
        .total_cmp(&b.r1)
        .then(a.r2.total_cmp(&b.r2))
        .then(a.d.total_cmp(&b.d))
}

/// Drops every point weakly dominated by another, keeping the
/// lexicographically first of exact duplicates. Output is sorted by `(r1, r2, d)`.
pub fn pareto_prune(mut points: Vec<FrontierPoint>) -> Vec<FrontierPoint> {
    points.sort_by(|a, b| lexicographic(&a.triple, &b.triple));
    let mut kept: Vec<FrontierPoint> = Vec::new();
    for p in points {
        // any dominator precedes p in lexicographic order
        if !kept.iter().any(|k| k.triple.weakly_dominates(&p.triple)) {
            kept.push(p);
        }
    }
    kept
}

impl RegionFrontier {
    pub fn new(kind: FrontierKind, seed: u64, points: Vec<FrontierPoint>) -> Self {
        Self { kind, heuristic_minimum: kind == FrontierKind::Outer, seed, points: pareto_prune(points) }
    }

    /// Union of two frontiers of the same kind.
    pub fn merge(mut self, other: RegionFrontier) -> RegionFrontier {
        debug_assert_eq!(self.kind, other.kind);
        self.points.extend(other.points);
        self.points = pareto_prune(std::mem::take(&mut self.points));
        self
    }

    pub fn slice(&self, d: f64) -> impl Iterator<Item = &FrontierPoint> {
        self.points.iter().filter(move |p| p.triple.d <= d + SLICE_TOLERANCE)
    }

    /// Point minimizing `w1 * r1 + w2 * r2` among those meeting distortion `d`.
    pub fn best_weighted(&self, d: f64, w1: f64, w2: f64) -> Option<&FrontierPoint> {
        let score = |p: &FrontierPoint| w1 * p.triple.r1 + w2 * p.triple.r2;
        self.slice(d).min_by(|a, b| score(a).total_cmp(&score(b)).then(lexicographic(&a.triple, &b.triple)))
    }

    pub fn min_r1(&self, d: f64) -> Option<f64> {
        self.slice(d).map(|p| p.triple.r1).min_by(f64::total_cmp)
    }

    pub fn min_r2(&self, d: f64) -> Option<f64> {
        self.slice(d).map(|p| p.triple.r2).min_by(f64::total_cmp)
    }

    /// CSV with columns `r1,r2,d,kind,seed`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r1,r2,d,kind,seed\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                crate::fmt::sig12(p.triple.r1),
                crate::fmt::sig12(p.triple.r2),
                crate::fmt::sig12(p.triple.d),
                self.kind.as_str(),
                self.seed
            ));
        }
        out
    }
}
