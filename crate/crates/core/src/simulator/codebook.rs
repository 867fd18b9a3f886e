use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SimConfig;
use crate::model::cmi_unchecked;
use crate::region::{AX_U, AX_V, AX_X, AX_Y, AX_Z};
use crate::{Error, JointPmf, Result};

/// Largest exponent for which a codebook or bin count is represented exactly.
const MAX_COUNT_LOG2: f64 = 62.0;

/// Information quantities of the auxiliary joint that set the codebook sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeInformation {
    /// `I(X;U)`
    pub x_u: f64,
    /// `I(X;V|U)`
    pub x_v_given_u: f64,
    /// `I(Y,V;Z|U)`
    pub yv_z_given_u: f64,
    /// `I(X;U|Y)`
    pub x_u_given_y: f64,
    /// `I(X;V|Y,U)`
    pub x_v_given_yu: f64,
}

impl SchemeInformation {
    pub(crate) fn of(joint: &JointPmf) -> Self {
        Self {
            x_u: cmi_unchecked(joint, &[AX_X], &[AX_U], &[]),
            x_v_given_u: cmi_unchecked(joint, &[AX_X], &[AX_V], &[AX_U]),
            yv_z_given_u: cmi_unchecked(joint, &[AX_Y, AX_V], &[AX_Z], &[AX_U]),
            x_u_given_y: cmi_unchecked(joint, &[AX_X], &[AX_U], &[AX_Y]),
            x_v_given_yu: cmi_unchecked(joint, &[AX_X], &[AX_V], &[AX_Y, AX_U]),
        }
    }
}

/// Codebook sizes and bin ranges for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodebookSizes {
    pub n: usize,
    pub m1: u64,
    pub m2: u64,
    pub m3: u64,
    pub bins_u: u64,
    pub bins_v: u64,
    /// Codeword symbols held in memory: `n m1 (1 + m2 + m3)`.
    pub total_symbols: u64,
    pub info: SchemeInformation,
}

impl CodebookSizes {
    /// Sizes for `cfg`, refusing configurations above the memory cap.
    pub fn plan(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let joint = cfg.aux.joint(&cfg.source)?;
        let info = SchemeInformation::of(&joint);
        let n = cfg.n as f64;
        let (cs, bs) = (cfg.codebook_slack(), cfg.bin_slack());
        let e1 = n * (info.x_u + cs);
        let e2 = n * (info.x_v_given_u + cs);
        let e3 = n * (info.yv_z_given_u + cs);

        // log2 of n m1 (1 + m2 + m3), stable for huge exponents
        let (l1, l2, l3) = (ceil_log2(e1), ceil_log2(e2), ceil_log2(e3));
        let lmax = l2.max(l3);
        let tail = lmax + ((0.0 - lmax).exp2() + (l2 - lmax).exp2() + (l3 - lmax).exp2()).log2();
        let total_log2 = n.log2() + l1 + tail;
        if total_log2 > cfg.memory_cap_log2 {
            return Err(Error::CodebookTooLarge {
                m1_log2: l1,
                m2_log2: l2,
                m3_log2: l3,
                total_log2,
                cap_log2: cfg.memory_cap_log2,
            });
        }
        let (m1, m2, m3) = (ceil_pow2(e1)?, ceil_pow2(e2)?, ceil_pow2(e3)?);
        let bins_u = ceil_pow2(n * (info.x_u_given_y + bs))?;
        let bins_v = ceil_pow2(n * (info.x_v_given_yu + bs))?;
        Ok(Self {
            n: cfg.n,
            m1,
            m2,
            m3,
            bins_u,
            bins_v,
            total_symbols: cfg.n as u64 * m1 * (1 + m2 + m3),
            info,
        })
    }
}

/// `ceil(2^e)` as an exact integer.
fn ceil_pow2(e: f64) -> Result<u64> {
    if e > MAX_COUNT_LOG2 {
        return Err(Error::Domain(format!("count 2^{e:.2} does not fit in 64 bits")));
    }
    let v = e.exp2();
    // absorb rounding noise in the exponent so that 2^6 stays 64
    let r = v.round();
    Ok(if (v - r).abs() <= 1e-9 * v { r as u64 } else { v.ceil() as u64 })
}

/// `log2(ceil(2^e))`, exact enough for size reports at any exponent.
fn ceil_log2(e: f64) -> f64 {
    if e > 52.0 {
        e
    } else {
        (e.exp2() * (1.0 - 1e-12)).ceil().log2()
    }
}

/// Random codebooks and bin assignments, symbols stored as bytes.
///
/// Codewords are indexed from 0: `u(i)`, `v(i, j)` and `z(i, k)` with
/// `i < m1`, `j < m2`, `k < m3`. Bins take values in `0..bins_u` and `0..bins_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookSet {
    sizes: CodebookSizes,
    cb_u: Vec<u8>,
    cb_v: Vec<u8>,
    cb_z: Vec<u8>,
    bins_u: Vec<u64>,
    bins_v: Vec<u64>,
    // codeword indices sorted by bin (globally for u, per row i for v)
    order_u: Vec<u32>,
    order_v: Vec<u32>,
}

impl CodebookSet {
    pub fn sizes(&self) -> &CodebookSizes {
        &self.sizes
    }

    pub fn u(&self, i: usize) -> &[u8] {
        let n = self.sizes.n;
        &self.cb_u[i * n..(i + 1) * n]
    }

    pub fn v(&self, i: usize, j: usize) -> &[u8] {
        let n = self.sizes.n;
        let at = (i * self.sizes.m2 as usize + j) * n;
        &self.cb_v[at..at + n]
    }

    pub fn z(&self, i: usize, k: usize) -> &[u8] {
        let n = self.sizes.n;
        let at = (i * self.sizes.m3 as usize + k) * n;
        &self.cb_z[at..at + n]
    }

    pub fn bin_u(&self, i: usize) -> u64 {
        self.bins_u[i]
    }

    pub fn bin_v(&self, i: usize, j: usize) -> u64 {
        self.bins_v[i * self.sizes.m2 as usize + j]
    }

    /// Indices `i` with `b_U(i) = bin`, in increasing order.
    pub(crate) fn members_u(&self, bin: u64) -> &[u32] {
        let lo = self.order_u.partition_point(|&i| self.bins_u[i as usize] < bin);
        let hi = self.order_u.partition_point(|&i| self.bins_u[i as usize] <= bin);
        &self.order_u[lo..hi]
    }

    /// Indices `j` with `b_V(j, i) = bin`, in increasing order.
    pub(crate) fn members_v(&self, i: usize, bin: u64) -> &[u32] {
        let m2 = self.sizes.m2 as usize;
        let row = &self.order_v[i * m2..(i + 1) * m2];
        let bins = &self.bins_v[i * m2..(i + 1) * m2];
        let lo = row.partition_point(|&j| bins[j as usize] < bin);
        let hi = row.partition_point(|&j| bins[j as usize] <= bin);
        &row[lo..hi]
    }
}

/// Codebooks for batch 0 of `cfg`.
pub fn generate_codebooks(cfg: &SimConfig) -> Result<CodebookSet> {
    generate_batch(cfg, &CodebookSizes::plan(cfg)?, 0)
}

pub(crate) fn generate_batch(cfg: &SimConfig, sizes: &CodebookSizes, batch: u64) -> Result<CodebookSet> {
    let joint = cfg.aux.joint(&cfg.source)?;
    let p_u = joint.marginal_unchecked(&[AX_U]);
    let p_uv = joint.marginal_unchecked(&[AX_U, AX_V]);
    let p_uz = joint.marginal_unchecked(&[AX_U, AX_Z]);
    let draw_u = WeightedIndex::new(p_u.probs()).map_err(|e| Error::InvalidPmf(e.to_string()))?;
    let given_u = |pair: &JointPmf| -> Vec<Option<WeightedIndex<f64>>> {
        let cols = pair.shape()[1];
        pair.probs().chunks(cols).map(|row| WeightedIndex::new(row).ok()).collect()
    };
    let (v_given_u, z_given_u) = (given_u(&p_uv), given_u(&p_uz));

    let n = sizes.n;
    let (m1, m2, m3) = (sizes.m1 as usize, sizes.m2 as usize, sizes.m3 as usize);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(2 * batch);

    let cb_u: Vec<u8> = (0..m1 * n).map(|_| draw_u.sample(&mut rng) as u8).collect();
    let row_seeds: Vec<(u64, u64)> = (0..m1).map(|_| (rng.random(), rng.random())).collect();
    let bins_u: Vec<u64> = (0..m1).map(|_| rng.random_range(0..sizes.bins_u)).collect();
    let bins_v: Vec<u64> = (0..m1 * m2).map(|_| rng.random_range(0..sizes.bins_v)).collect();

    // superposition layers: each symbol drawn from p(.|u_t) of its cloud centre
    let layer = |len: usize, seed_of: &(dyn Fn(usize) -> u64 + Sync), dists: &[Option<WeightedIndex<f64>>]| {
        let mut out = vec![0u8; m1 * len * n];
        if len > 0 {
            out.par_chunks_mut(len * n).enumerate().for_each(|(i, chunk)| {
                let mut r = ChaCha8Rng::seed_from_u64(seed_of(i));
                let centre = &cb_u[i * n..(i + 1) * n];
                for word in chunk.chunks_mut(n) {
                    for (s, &u) in word.iter_mut().zip(centre) {
                        let d = dists[u as usize].as_ref().expect("codeword symbols have positive probability");
                        *s = d.sample(&mut r) as u8;
                    }
                }
            });
        }
        out
    };
    let cb_v = layer(m2, &|i| row_seeds[i].0, &v_given_u);
    let cb_z = layer(m3, &|i| row_seeds[i].1, &z_given_u);

    let mut order_u: Vec<u32> = (0..m1 as u32).collect();
    order_u.sort_by_key(|&i| (bins_u[i as usize], i));
    let mut order_v: Vec<u32> = Vec::with_capacity(m1 * m2);
    for i in 0..m1 {
        let bins = &bins_v[i * m2..(i + 1) * m2];
        let mut row: Vec<u32> = (0..m2 as u32).collect();
        row.sort_by_key(|&j| (bins[j as usize], j));
        order_v.extend(row);
    }

    Ok(CodebookSet { sizes: *sizes, cb_u, cb_v, cb_z, bins_u, bins_v, order_u, order_v })
}
