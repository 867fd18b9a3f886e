// Allocation-free evaluators used inside the search loop. They compute the
// same triples as `evaluate_inner_point` / `evaluate_outer_point` through
// direct marginal sums.

use super::{AuxiliarySystem, OuterSystem};
use crate::model::{DistortionFn, JointSource, RateDistortionTriple};

fn neg_plogp(p: f64) -> f64 {
    if p > 1e-15 {
        -p * p.log2()
    } else {
        0.0
    }
}

fn entropy(buf: &[f64]) -> f64 {
    buf.iter().map(|&p| neg_plogp(p)).sum()
}

fn clear(buf: &mut [f64]) {
    buf.iter_mut().for_each(|v| *v = 0.0);
}

pub(crate) struct InnerEvaluator<'a> {
    source: &'a JointSource,
    dist: &'a DistortionFn,
    dims: (usize, usize, usize, usize, usize),
    h_x: f64,
    h_y: f64,
    h_xy: f64,
    xyuv: Vec<f64>,
    yuv: Vec<f64>,
    xu: Vec<f64>,
    yuvz: Vec<f64>,
    uz: Vec<f64>,
}

impl<'a> InnerEvaluator<'a> {
    pub(crate) fn new(source: &'a JointSource, dist: &'a DistortionFn, cards: (usize, usize, usize)) -> Self {
        let (nx, ny) = (source.size_x(), source.size_y());
        let (nu, nv, nz) = cards;
        Self {
            source,
            dist,
            dims: (nx, ny, nu, nv, nz),
            h_x: entropy(&source.marginal_x()),
            h_y: entropy(&source.marginal_y()),
            h_xy: entropy(source.probs()),
            xyuv: vec![0.0; nx * ny * nu * nv],
            yuv: vec![0.0; ny * nu * nv],
            xu: vec![0.0; nx * nu],
            yuvz: vec![0.0; ny * nu * nv * nz],
            uz: vec![0.0; nu * nz],
        }
    }

    pub(crate) fn eval(&mut self, aux: &AuxiliarySystem) -> RateDistortionTriple {
        let (nx, ny, nu, nv, nz) = self.dims;
        debug_assert_eq!((aux.size_u(), aux.size_v(), aux.size_z()), (nu, nv, nz));
        clear(&mut self.yuv);
        clear(&mut self.xu);
        clear(&mut self.yuvz);
        clear(&mut self.uz);
        let k1 = aux.kernel_uv_given_x();
        let k2 = aux.kernel_z_given_yuv();
        let mut d = 0.0;
        for x in 0..nx {
            let row1 = k1.row(x);
            for y in 0..ny {
                let pxy = self.source.p(x, y);
                for uv in 0..nu * nv {
                    let p = pxy * row1[uv];
                    let yuv = y * nu * nv + uv;
                    self.xyuv[x * ny * nu * nv + yuv] = p;
                    self.yuv[yuv] += p;
                    self.xu[x * nu + uv / nv] += p;
                    if p == 0.0 {
                        continue;
                    }
                    let row2 = k2.row(yuv);
                    for (z, &pz) in row2.iter().enumerate() {
                        let q = p * pz;
                        self.yuvz[yuv * nz + z] += q;
                        d += q * self.dist.get(x, y, z);
                    }
                }
            }
        }
        for yuv in 0..ny * nu * nv {
            let u = (yuv / nv) % nu;
            for z in 0..nz {
                self.uz[u * nz + z] += self.yuvz[yuv * nz + z];
            }
        }
        let h_yuv = entropy(&self.yuv);
        let h_xyuv = entropy(&self.xyuv);
        let h_xu = entropy(&self.xu);
        let h_yuvz = entropy(&self.yuvz);
        let h_uz = entropy(&self.uz);
        let h_u: f64 = (0..nu)
            .map(|u| neg_plogp((0..nx).map(|x| self.xu[x * nu + u]).sum()))
            .sum();

        let r1 = (self.h_xy + h_yuv - h_xyuv - self.h_y).max(0.0);
        let i_xu = (self.h_x + h_u - h_xu).max(0.0);
        let i_yvz_u = (h_yuv + h_uz - h_yuvz - h_u).max(0.0);
        RateDistortionTriple { r1, r2: i_xu + i_yvz_u, d }
    }
}

pub(crate) struct OuterEvaluator<'a> {
    source: &'a JointSource,
    dist: &'a DistortionFn,
    dims: (usize, usize, usize, usize),
    h_y: f64,
    h_xy: f64,
    xyu: Vec<f64>,
    yu: Vec<f64>,
    xyz: Vec<f64>,
    z: Vec<f64>,
}

impl<'a> OuterEvaluator<'a> {
    pub(crate) fn new(source: &'a JointSource, dist: &'a DistortionFn, cards: (usize, usize)) -> Self {
        let (nx, ny) = (source.size_x(), source.size_y());
        let (nu, nz) = cards;
        Self {
            source,
            dist,
            dims: (nx, ny, nu, nz),
            h_y: entropy(&source.marginal_y()),
            h_xy: entropy(source.probs()),
            xyu: vec![0.0; nx * ny * nu],
            yu: vec![0.0; ny * nu],
            xyz: vec![0.0; nx * ny * nz],
            z: vec![0.0; nz],
        }
    }

    pub(crate) fn eval(&mut self, sys: &OuterSystem) -> RateDistortionTriple {
        let (nx, ny, nu, nz) = self.dims;
        debug_assert_eq!((sys.size_u(), sys.size_z()), (nu, nz));
        clear(&mut self.yu);
        clear(&mut self.xyz);
        clear(&mut self.z);
        let k1 = sys.kernel_u_given_x();
        let k2 = sys.kernel_z_given_yu();
        let mut d = 0.0;
        for x in 0..nx {
            let row1 = k1.row(x);
            for y in 0..ny {
                let pxy = self.source.p(x, y);
                for (u, &pu) in row1.iter().enumerate() {
                    let p = pxy * pu;
                    self.xyu[(x * ny + y) * nu + u] = p;
                    self.yu[y * nu + u] += p;
                    if p == 0.0 {
                        continue;
                    }
                    for (z, &pz) in k2.row(y * nu + u).iter().enumerate() {
                        let q = p * pz;
                        self.xyz[(x * ny + y) * nz + z] += q;
                        d += q * self.dist.get(x, y, z);
                    }
                }
            }
        }
        for xy in 0..nx * ny {
            for z in 0..nz {
                self.z[z] += self.xyz[xy * nz + z];
            }
        }
        let r1 = (self.h_xy + entropy(&self.yu) - entropy(&self.xyu) - self.h_y).max(0.0);
        let r2 = (self.h_xy + entropy(&self.z) - entropy(&self.xyz)).max(0.0);
        RateDistortionTriple { r1, r2, d }
    }
}
