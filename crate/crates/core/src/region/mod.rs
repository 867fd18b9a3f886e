//! Inner and outer rate-distortion regions on finite alphabets.
//!
//! A point of the inner region is certified by an [`AuxiliarySystem`]: test
//! channels `p(u,v|x)` and `p(z|y,u,v)` that, together with the source,
//! induce `p0(x,y) p(u,v|x) p(z|y,u,v)`. The triple
//!
//! ```text
//! R1 = I(X;U,V|Y),  R2 = I(X;U) + I(Y,V;Z|U),  D = E d(X,Y,Z)
//! ```
//!
//! and everything coordinatewise above it is achievable. The outer region is
//! described the same way by an [`OuterSystem`] `p(u|x) p(z|y,u)` with
//! `R1 = I(X;U|Y)`, `R2 = I(X,Y;Z)`. Both regions are treated as closed.

mod eval;
mod frontier;
mod search;
mod special;

pub use frontier::{pareto_prune, FrontierKind, FrontierPoint, RegionFrontier, Witness, SLICE_TOLERANCE};
pub use search::{optimize_inner_frontier, optimize_outer_frontier, SearchBudget};
pub use special::{
    lossless_function_rates, lossless_function_rates_with, markov_inner_witness, markov_rates,
    FunctionTable, MarkovChain,
};

#[cfg(test)]
pub(crate) use eval::{InnerEvaluator, OuterEvaluator};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{cmi_unchecked, DistortionFn, JointPmf, JointSource, Kernel, RateDistortionTriple};

// axis order of the five-variable joint
pub(crate) const AX_X: usize = 0;
pub(crate) const AX_Y: usize = 1;
pub(crate) const AX_U: usize = 2;
pub(crate) const AX_V: usize = 3;
pub(crate) const AX_Z: usize = 4;

/// Test channels `p(u,v|x)` and `p(z|y,u,v)` defining a candidate inner point.
///
/// `kernel_uv_given_x` has one row per `x` and columns indexed `u * size_v + v`.
/// `kernel_z_given_yuv` has rows indexed `(y * size_u + u) * size_v + v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AuxiliaryRepr", into = "AuxiliaryRepr")]
pub struct AuxiliarySystem {
    size_u: usize,
    size_v: usize,
    size_z: usize,
    kernel_uv_given_x: Kernel,
    kernel_z_given_yuv: Kernel,
}

#[derive(Serialize, Deserialize)]
struct AuxiliaryRepr {
    size_u: usize,
    size_v: usize,
    size_z: usize,
    uv_given_x: Kernel,
    z_given_yuv: Kernel,
}

impl TryFrom<AuxiliaryRepr> for AuxiliarySystem {
    type Error = Error;

    fn try_from(r: AuxiliaryRepr) -> Result<Self> {
        Self::new(r.size_u, r.size_v, r.size_z, r.uv_given_x, r.z_given_yuv)
    }
}

impl From<AuxiliarySystem> for AuxiliaryRepr {
    fn from(a: AuxiliarySystem) -> Self {
        Self {
            size_u: a.size_u,
            size_v: a.size_v,
            size_z: a.size_z,
            uv_given_x: a.kernel_uv_given_x,
            z_given_yuv: a.kernel_z_given_yuv,
        }
    }
}

impl AuxiliarySystem {
    pub fn new(
        size_u: usize,
        size_v: usize,
        size_z: usize,
        kernel_uv_given_x: Kernel,
        kernel_z_given_yuv: Kernel,
    ) -> Result<Self> {
        if size_u == 0 || size_v == 0 || size_z == 0 {
            return Err(Error::Validation("auxiliary alphabets must be non-empty".into()));
        }
        if kernel_uv_given_x.cols() != size_u * size_v {
            return Err(Error::Validation(format!(
                "p(u,v|x) has {} columns, expected |U||V| = {}",
                kernel_uv_given_x.cols(),
                size_u * size_v
            )));
        }
        if kernel_z_given_yuv.cols() != size_z {
            return Err(Error::Validation(format!(
                "p(z|y,u,v) has {} columns, expected |Z| = {size_z}",
                kernel_z_given_yuv.cols()
            )));
        }
        if !kernel_z_given_yuv.rows().is_multiple_of(size_u * size_v) {
            return Err(Error::Validation(format!(
                "p(z|y,u,v) has {} rows, not a multiple of |U||V| = {}",
                kernel_z_given_yuv.rows(),
                size_u * size_v
            )));
        }
        Ok(Self { size_u, size_v, size_z, kernel_uv_given_x, kernel_z_given_yuv })
    }

    /// Builds the system from closures returning `p(u,v|x)` and `p(z|y,u,v)`.
    pub fn from_fns(
        size_x: usize,
        size_y: usize,
        (size_u, size_v, size_z): (usize, usize, usize),
        uv: impl Fn(usize, usize, usize) -> f64,
        z: impl Fn(usize, usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut k1 = Vec::with_capacity(size_x * size_u * size_v);
        for x in 0..size_x {
            for u in 0..size_u {
                for v in 0..size_v {
                    k1.push(uv(x, u, v));
                }
            }
        }
        let mut k2 = Vec::with_capacity(size_y * size_u * size_v * size_z);
        for y in 0..size_y {
            for u in 0..size_u {
                for v in 0..size_v {
                    for zz in 0..size_z {
                        k2.push(z(y, u, v, zz));
                    }
                }
            }
        }
        Self::new(
            size_u,
            size_v,
            size_z,
            Kernel::new(size_x, size_u * size_v, k1)?,
            Kernel::new(size_y * size_u * size_v, size_z, k2)?,
        )
    }

    pub fn size_u(&self) -> usize {
        self.size_u
    }

    pub fn size_v(&self) -> usize {
        self.size_v
    }

    pub fn size_z(&self) -> usize {
        self.size_z
    }

    pub fn size_x(&self) -> usize {
        self.kernel_uv_given_x.rows()
    }

    pub fn size_y(&self) -> usize {
        self.kernel_z_given_yuv.rows() / (self.size_u * self.size_v)
    }

    pub fn kernel_uv_given_x(&self) -> &Kernel {
        &self.kernel_uv_given_x
    }

    pub fn kernel_z_given_yuv(&self) -> &Kernel {
        &self.kernel_z_given_yuv
    }

    pub(crate) fn kernels_mut(&mut self) -> [&mut Kernel; 2] {
        [&mut self.kernel_uv_given_x, &mut self.kernel_z_given_yuv]
    }

    pub fn p_uv_given_x(&self, x: usize, u: usize, v: usize) -> f64 {
        self.kernel_uv_given_x.get(x, u * self.size_v + v)
    }

    pub fn p_z_given_yuv(&self, y: usize, u: usize, v: usize, z: usize) -> f64 {
        self.kernel_z_given_yuv.get((y * self.size_u + u) * self.size_v + v, z)
    }

    pub fn check_compatible(&self, source: &JointSource, dist: &DistortionFn) -> Result<()> {
        dist.check_source(source)?;
        if self.size_x() != source.size_x() || self.size_y() != source.size_y() {
            return Err(Error::Validation(format!(
                "auxiliary system is built for a {}x{} source, got {}x{}",
                self.size_x(),
                self.size_y(),
                source.size_x(),
                source.size_y()
            )));
        }
        if self.size_z != dist.size_z() {
            return Err(Error::Validation(format!(
                "auxiliary system reconstructs |Z| = {}, distortion expects {}",
                self.size_z,
                dist.size_z()
            )));
        }
        Ok(())
    }

    /// Induced joint `p(x,y,u,v,z)` with axes in that order.
    pub fn joint(&self, source: &JointSource) -> Result<JointPmf<f64>> {
        if self.size_x() != source.size_x() || self.size_y() != source.size_y() {
            return Err(Error::Validation("auxiliary system does not match the source".into()));
        }
        let (nx, ny, nu, nv, nz) = (source.size_x(), source.size_y(), self.size_u, self.size_v, self.size_z);
        let mut probs = Vec::with_capacity(nx * ny * nu * nv * nz);
        for x in 0..nx {
            for y in 0..ny {
                let pxy = source.p(x, y);
                for u in 0..nu {
                    for v in 0..nv {
                        let puv = pxy * self.p_uv_given_x(x, u, v);
                        for z in 0..nz {
                            probs.push(puv * self.p_z_given_yuv(y, u, v, z));
                        }
                    }
                }
            }
        }
        Ok(JointPmf::from_parts_unchecked(vec![nx, ny, nu, nv, nz], probs))
    }

    /// Time sharing: with an independent switch `Q` taking `a` with probability
    /// `weight_a`, set `U' = (Q, U_Q)`, `V' = V_Q`, `Z = Z_Q`. The induced
    /// triple is the same convex combination of the two triples.
    pub fn time_share(a: &Self, b: &Self, weight_a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight_a) {
            return Err(Error::Validation(format!("mixing weight {weight_a} outside [0, 1]")));
        }
        if a.size_x() != b.size_x() || a.size_y() != b.size_y() || a.size_z != b.size_z {
            return Err(Error::Validation("time sharing needs systems on the same alphabets".into()));
        }
        let (nx, ny, nz) = (a.size_x(), a.size_y(), a.size_z);
        let nu = a.size_u + b.size_u;
        let nv = a.size_v.max(b.size_v);
        // (system, weight, offset into U')
        let parts = [(a, weight_a, 0), (b, 1.0 - weight_a, a.size_u)];
        let mut k1 = vec![0.0; nx * nu * nv];
        let mut k2 = vec![0.0; ny * nu * nv * nz];
        for (sys, w, off) in parts {
            for x in 0..nx {
                for u in 0..sys.size_u {
                    for v in 0..sys.size_v {
                        k1[x * nu * nv + (off + u) * nv + v] = w * sys.p_uv_given_x(x, u, v);
                    }
                }
            }
            for y in 0..ny {
                for u in 0..sys.size_u {
                    for v in 0..nv {
                        let row = ((y * nu) + off + u) * nv + v;
                        if v < sys.size_v {
                            for z in 0..nz {
                                k2[row * nz + z] = sys.p_z_given_yuv(y, u, v, z);
                            }
                        } else {
                            // never reached: p(v'|u') = 0 here
                            k2[row * nz] = 1.0;
                        }
                    }
                }
            }
        }
        Self::new(nu, nv, nz, Kernel::new(nx, nu * nv, k1)?, Kernel::new(ny * nu * nv, nz, k2)?)
    }
}

/// Test channels `p(u|x)` and `p(z|y,u)` defining a candidate outer point.
/// `kernel_z_given_yu` rows are indexed `y * size_u + u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OuterRepr", into = "OuterRepr")]
pub struct OuterSystem {
    size_u: usize,
    size_z: usize,
    kernel_u_given_x: Kernel,
    kernel_z_given_yu: Kernel,
}

#[derive(Serialize, Deserialize)]
struct OuterRepr {
    size_u: usize,
    size_z: usize,
    u_given_x: Kernel,
    z_given_yu: Kernel,
}

impl TryFrom<OuterRepr> for OuterSystem {
    type Error = Error;

    fn try_from(r: OuterRepr) -> Result<Self> {
        Self::new(r.size_u, r.size_z, r.u_given_x, r.z_given_yu)
    }
}

impl From<OuterSystem> for OuterRepr {
    fn from(o: OuterSystem) -> Self {
        Self { size_u: o.size_u, size_z: o.size_z, u_given_x: o.kernel_u_given_x, z_given_yu: o.kernel_z_given_yu }
    }
}

impl OuterSystem {
    pub fn new(size_u: usize, size_z: usize, kernel_u_given_x: Kernel, kernel_z_given_yu: Kernel) -> Result<Self> {
        if size_u == 0 || size_z == 0 {
            return Err(Error::Validation("auxiliary alphabets must be non-empty".into()));
        }
        if kernel_u_given_x.cols() != size_u {
            return Err(Error::Validation(format!(
                "p(u|x) has {} columns, expected |U| = {size_u}",
                kernel_u_given_x.cols()
            )));
        }
        if kernel_z_given_yu.cols() != size_z || !kernel_z_given_yu.rows().is_multiple_of(size_u) {
            return Err(Error::Validation(format!(
                "p(z|y,u) is {}x{}, expected (|Y||U|) x {size_z}",
                kernel_z_given_yu.rows(),
                kernel_z_given_yu.cols()
            )));
        }
        Ok(Self { size_u, size_z, kernel_u_given_x, kernel_z_given_yu })
    }

    /// Views an inner system as an outer one with `U' = (U, V)`.
    ///
    /// The outer rates of the result never exceed the inner rates of `aux`:
    /// `R1` is unchanged and `I(X,Y;Z) <= I(X;U) + I(Y,V;Z|U)`.
    pub fn from_inner(aux: &AuxiliarySystem) -> Self {
        Self {
            size_u: aux.size_u * aux.size_v,
            size_z: aux.size_z,
            kernel_u_given_x: aux.kernel_uv_given_x.clone(),
            kernel_z_given_yu: aux.kernel_z_given_yuv.clone(),
        }
    }

    pub fn size_u(&self) -> usize {
        self.size_u
    }

    pub fn size_z(&self) -> usize {
        self.size_z
    }

    pub fn size_x(&self) -> usize {
        self.kernel_u_given_x.rows()
    }

    pub fn size_y(&self) -> usize {
        self.kernel_z_given_yu.rows() / self.size_u
    }

    pub fn kernel_u_given_x(&self) -> &Kernel {
        &self.kernel_u_given_x
    }

    pub fn kernel_z_given_yu(&self) -> &Kernel {
        &self.kernel_z_given_yu
    }

    pub(crate) fn kernels_mut(&mut self) -> [&mut Kernel; 2] {
        [&mut self.kernel_u_given_x, &mut self.kernel_z_given_yu]
    }

    pub fn check_compatible(&self, source: &JointSource, dist: &DistortionFn) -> Result<()> {
        dist.check_source(source)?;
        if self.size_x() != source.size_x() || self.size_y() != source.size_y() || self.size_z != dist.size_z() {
            return Err(Error::Validation(format!(
                "outer system ({}x{} -> |Z| = {}) does not match source {}x{} with |Z| = {}",
                self.size_x(),
                self.size_y(),
                self.size_z,
                source.size_x(),
                source.size_y(),
                dist.size_z()
            )));
        }
        Ok(())
    }

    /// Induced joint `p(x,y,u,z)`.
    pub fn joint(&self, source: &JointSource) -> Result<JointPmf<f64>> {
        if self.size_x() != source.size_x() || self.size_y() != source.size_y() {
            return Err(Error::Validation("outer system does not match the source".into()));
        }
        let (nx, ny, nu, nz) = (source.size_x(), source.size_y(), self.size_u, self.size_z);
        let mut probs = Vec::with_capacity(nx * ny * nu * nz);
        for x in 0..nx {
            for y in 0..ny {
                for u in 0..nu {
                    let pu = source.p(x, y) * self.kernel_u_given_x.get(x, u);
                    for z in 0..nz {
                        probs.push(pu * self.kernel_z_given_yu.get(y * nu + u, z));
                    }
                }
            }
        }
        Ok(JointPmf::from_parts_unchecked(vec![nx, ny, nu, nz], probs))
    }
}

fn expected_distortion(joint: &JointPmf<f64>, dist: &DistortionFn, z_axis: usize) -> f64 {
    let shape = joint.shape();
    let mut idx = vec![0usize; shape.len()];
    let mut total = 0.0;
    for &p in joint.probs() {
        if p > 0.0 {
            total += p * dist.get(idx[AX_X], idx[AX_Y], idx[z_axis]);
        }
        for ax in (0..shape.len()).rev() {
            idx[ax] += 1;
            if idx[ax] < shape[ax] {
                break;
            }
            idx[ax] = 0;
        }
    }
    total
}

/// `(I(X;U,V|Y), I(X;U) + I(Y,V;Z|U), E d(X,Y,Z))` for an inner system.
pub fn evaluate_inner_point(
    source: &JointSource,
    dist: &DistortionFn,
    aux: &AuxiliarySystem,
) -> Result<RateDistortionTriple> {
    aux.check_compatible(source, dist)?;
    let joint = aux.joint(source)?;
    let r1 = cmi_unchecked(&joint, &[AX_X], &[AX_U, AX_V], &[AX_Y]);
    let r2 = cmi_unchecked(&joint, &[AX_X], &[AX_U], &[])
        + cmi_unchecked(&joint, &[AX_Y, AX_V], &[AX_Z], &[AX_U]);
    let d = expected_distortion(&joint, dist, AX_Z);
    RateDistortionTriple::new(r1, r2, d)
}

/// `(I(X;U|Y), I(X,Y;Z), E d(X,Y,Z))` for an outer system.
pub fn evaluate_outer_point(
    source: &JointSource,
    dist: &DistortionFn,
    sys: &OuterSystem,
) -> Result<RateDistortionTriple> {
    sys.check_compatible(source, dist)?;
    let joint = sys.joint(source)?;
    // axes: X=0, Y=1, U=2, Z=3
    let r1 = cmi_unchecked(&joint, &[0], &[2], &[1]);
    let r2 = cmi_unchecked(&joint, &[0, 1], &[3], &[]);
    let d = expected_distortion(&joint, dist, 3);
    RateDistortionTriple::new(r1, r2, d)
}

#[cfg(test)]
mod tests;
