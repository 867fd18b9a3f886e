//! Cases where the inner and outer bounds meet: lossless computation of a
//! function of `(X, Y)`, and coordination along a Markov chain.

use serde::{Deserialize, Serialize};

use super::search::{optimize_inner_frontier, SearchBudget};
use super::AuxiliarySystem;
use crate::error::{Error, Result};
use crate::model::{cmi_unchecked, DistortionFn, JointPmf, JointSource, Kernel, RateDistortionTriple};

/// Row tolerance when checking that a kernel ignores a variable.
const MARKOV_TOLERANCE: f64 = 1e-12;

/// Function table `f[x][y]` with values in `0..size_z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FunctionTable(pub Vec<Vec<usize>>);

impl FunctionTable {
    pub fn from_fn(size_x: usize, size_y: usize, f: impl Fn(usize, usize) -> usize) -> Self {
        Self((0..size_x).map(|x| (0..size_y).map(|y| f(x, y)).collect()).collect())
    }

    pub fn get(&self, x: usize, y: usize) -> usize {
        self.0[x][y]
    }

    pub fn size_z(&self) -> usize {
        self.0.iter().flatten().max().map_or(1, |m| m + 1)
    }

    fn check(&self, source: &JointSource) -> Result<()> {
        if self.0.len() != source.size_x() || self.0.iter().any(|r| r.len() != source.size_y()) {
            return Err(Error::Validation(format!(
                "function table must be {}x{}",
                source.size_x(),
                source.size_y()
            )));
        }
        Ok(())
    }

    /// `H(f(X, Y))` under the source.
    pub fn entropy(&self, source: &JointSource) -> Result<f64> {
        self.check(source)?;
        let mut pz = vec![0.0; self.size_z()];
        for x in 0..source.size_x() {
            for y in 0..source.size_y() {
                pz[self.get(x, y)] += source.p(x, y);
            }
        }
        crate::model::entropy(&pz)
    }
}

/// [`lossless_function_rates_with`] using `|V| = |X| + 2`.
pub fn lossless_function_rates(
    source: &JointSource,
    f: &FunctionTable,
    budget: &SearchBudget,
) -> Result<RateDistortionTriple> {
    lossless_function_rates_with(source, f, source.size_x() + 2, budget)
}

/// Smallest `(R1, R2)` found for computing `Z = f(X, Y)` exactly.
///
/// `U` is held trivial and `V` is searched under Hamming distortion at
/// `D = 0`. On that slice `R2 = I(Y,V;Z) = H(Z)` for every feasible system,
/// so the search minimizes `R1` and `R2` lands on `H(f(X, Y))`.
pub fn lossless_function_rates_with(
    source: &JointSource,
    f: &FunctionTable,
    size_v: usize,
    budget: &SearchBudget,
) -> Result<RateDistortionTriple> {
    f.check(source)?;
    let nz = f.size_z();
    let dist = DistortionFn::hamming_to(source.size_x(), source.size_y(), nz, |x, y| f.get(x, y))?;
    let budget = SearchBudget {
        rate_weights: vec![(1.0, 0.01)],
        distortion_targets: vec![0.0],
        ..budget.clone()
    };
    let frontier = optimize_inner_frontier(source, &dist, (1, size_v, nz), &budget)?;
    let best = frontier
        .slice(0.0)
        .min_by(|a, b| a.triple.r1.total_cmp(&b.triple.r1).then(a.triple.r2.total_cmp(&b.triple.r2)))
        .ok_or_else(|| Error::Validation("search found no zero-distortion system; raise the budget".into()))?;
    RateDistortionTriple::new(best.triple.r1, best.triple.r2, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarkovChain {
    /// `X - Y - Z`: `Z` depends on the sources only through `Y`.
    #[serde(rename = "X_Y_Z")]
    XYZ,
    /// `Y - X - Z`: `Z` depends on the sources only through `X`.
    #[serde(rename = "Y_X_Z")]
    YXZ,
}

impl MarkovChain {
    /// Expands `p(z|y)` (for `X - Y - Z`) or `p(z|x)` (for `Y - X - Z`) into a
    /// kernel on `(x, y)` with rows indexed `x * size_y + y`.
    pub fn expand(&self, source: &JointSource, kernel: &Kernel) -> Result<Kernel> {
        let (nx, ny) = (source.size_x(), source.size_y());
        let (expected, pick): (usize, fn(usize, usize) -> usize) = match self {
            MarkovChain::XYZ => (ny, |_, y| y),
            MarkovChain::YXZ => (nx, |x, _| x),
        };
        if kernel.rows() != expected {
            return Err(Error::Validation(format!(
                "kernel has {} rows, expected {expected}",
                kernel.rows()
            )));
        }
        let mut data = Vec::with_capacity(nx * ny * kernel.cols());
        for x in 0..nx {
            for y in 0..ny {
                data.extend_from_slice(kernel.row(pick(x, y)));
            }
        }
        Kernel::new(nx * ny, kernel.cols(), data)
    }

    fn check(&self, source: &JointSource, kernel: &Kernel) -> Result<()> {
        let (nx, ny) = (source.size_x(), source.size_y());
        if kernel.rows() != nx * ny {
            return Err(Error::Validation(format!(
                "p(z|x,y) needs {} rows, got {}",
                nx * ny,
                kernel.rows()
            )));
        }
        // rows that must coincide: same y for X-Y-Z, same x for Y-X-Z
        let (outer, inner, row): (usize, usize, fn(usize, usize, usize) -> usize) = match self {
            MarkovChain::XYZ => (ny, nx, |y, x, ny| x * ny + y),
            MarkovChain::YXZ => (nx, ny, |x, y, ny| x * ny + y),
        };
        for a in 0..outer {
            let mut reference: Option<usize> = None;
            for b in 0..inner {
                let r = row(a, b, ny);
                let (x, y) = (r / ny, r % ny);
                if source.p(x, y) <= 0.0 {
                    continue;
                }
                match reference {
                    None => reference = Some(r),
                    Some(r0) => {
                        let differs = kernel
                            .row(r)
                            .iter()
                            .zip(kernel.row(r0))
                            .any(|(p, q)| (p - q).abs() > MARKOV_TOLERANCE);
                        if differs {
                            return Err(Error::Validation(format!(
                                "p(z|x,y) rows {r0} and {r} differ, violating the {self:?} chain"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Closed-form rates for coordination along a Markov chain, given
/// `p(z|x,y)` with rows indexed `x * size_y + y`.
///
/// `X - Y - Z` needs `(0, I(Y;Z))`; `Y - X - Z` needs `(I(X;Z|Y), I(X;Z))`.
pub fn markov_rates(source: &JointSource, chain: MarkovChain, kernel: &Kernel) -> Result<(f64, f64)> {
    chain.check(source, kernel)?;
    let (nx, ny, nz) = (source.size_x(), source.size_y(), kernel.cols());
    let mut probs = Vec::with_capacity(nx * ny * nz);
    for x in 0..nx {
        for y in 0..ny {
            probs.extend(kernel.row(x * ny + y).iter().map(|p| source.p(x, y) * p));
        }
    }
    let joint = JointPmf::from_parts_unchecked(vec![nx, ny, nz], probs);
    Ok(match chain {
        MarkovChain::XYZ => (0.0, cmi_unchecked(&joint, &[1], &[2], &[])),
        MarkovChain::YXZ => (cmi_unchecked(&joint, &[0], &[2], &[1]), cmi_unchecked(&joint, &[0], &[2], &[])),
    })
}

/// Inner witness for a `Y - X - Z` chain: `U = Z` drawn from `p(z|x)` at
/// Encoder 1, `V` trivial, and the decoder outputs `U`.
pub fn markov_inner_witness(source: &JointSource, kernel_z_given_x: &Kernel) -> Result<AuxiliarySystem> {
    let (nx, ny, nz) = (source.size_x(), source.size_y(), kernel_z_given_x.cols());
    if kernel_z_given_x.rows() != nx {
        return Err(Error::Validation(format!(
            "p(z|x) needs {nx} rows, got {}",
            kernel_z_given_x.rows()
        )));
    }
    AuxiliarySystem::new(
        nz,
        1,
        nz,
        kernel_z_given_x.clone(),
        Kernel::deterministic(ny * nz, nz, |row| row % nz)?,
    )
}
