//! Source models, distortion tables, conditional kernels and information measures.

mod measures;
mod pmf;

pub use measures::{binary_entropy, conditional_mutual_information, entropy, mutual_information};
pub(crate) use measures::cmi_unchecked;
pub use pmf::JointPmf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

fn sum_tolerance() -> f64 {
    <f64 as Real>::sum_tolerance()
}

/// Finite-alphabet joint source `p0(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct JointSource {
    size_x: usize,
    size_y: usize,
    pmf: Vec<f64>,
}

impl JointSource {
    /// `pmf` is row-major with `x` as the slow index.
    pub fn new(size_x: usize, size_y: usize, pmf: Vec<f64>) -> Result<Self> {
        if size_x == 0 || size_y == 0 {
            return Err(Error::Validation("source alphabets must be non-empty".into()));
        }
        // JointPmf validates shape and normalization
        JointPmf::new(vec![size_x, size_y], pmf.clone())?;
        Ok(Self { size_x, size_y, pmf })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let size_x = rows.len();
        let size_y = rows.first().map_or(0, Vec::len);
        if let Some(x) = rows.iter().position(|r| r.len() != size_y) {
            return Err(Error::Validation(format!(
                "row {x} has {} entries, expected {size_y}",
                rows[x].len()
            )));
        }
        Self::new(size_x, size_y, rows.concat())
    }

    pub fn size_x(&self) -> usize {
        self.size_x
    }

    pub fn size_y(&self) -> usize {
        self.size_y
    }

    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.pmf[x * self.size_y + y]
    }

    pub fn probs(&self) -> &[f64] {
        &self.pmf
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        (0..self.size_x).map(|x| (0..self.size_y).map(|y| self.p(x, y)).sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.size_y).map(|y| (0..self.size_x).map(|x| self.p(x, y)).sum()).collect()
    }

    pub fn to_pmf(&self) -> JointPmf<f64> {
        JointPmf::from_parts_unchecked(vec![self.size_x, self.size_y], self.pmf.clone())
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.pmf.chunks(self.size_y).map(<[f64]>::to_vec).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for JointSource {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<JointSource> for Vec<Vec<f64>> {
    fn from(s: JointSource) -> Self {
        s.rows()
    }
}

/// Per-letter distortion `d(x, y, z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Vec<f64>>>", into = "Vec<Vec<Vec<f64>>>")]
pub struct DistortionFn {
    size_x: usize,
    size_y: usize,
    size_z: usize,
    table: Vec<f64>,
}

impl DistortionFn {
    pub fn new(size_x: usize, size_y: usize, size_z: usize, table: Vec<f64>) -> Result<Self> {
        if size_x == 0 || size_y == 0 || size_z == 0 {
            return Err(Error::Validation("distortion alphabets must be non-empty".into()));
        }
        if table.len() != size_x * size_y * size_z {
            return Err(Error::Validation(format!(
                "distortion table has {} entries, expected {}",
                table.len(),
                size_x * size_y * size_z
            )));
        }
        if let Some(k) = table.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Validation(format!(
                "distortion entry {k} is {}; entries must be finite and non-negative",
                table[k]
            )));
        }
        Ok(Self { size_x, size_y, size_z, table })
    }

    pub fn from_nested(d: &[Vec<Vec<f64>>]) -> Result<Self> {
        let size_x = d.len();
        let size_y = d.first().map_or(0, Vec::len);
        let size_z = d.first().and_then(|r| r.first()).map_or(0, Vec::len);
        for (x, plane) in d.iter().enumerate() {
            if plane.len() != size_y {
                return Err(Error::Validation(format!(
                    "d[{x}] has {} rows, expected {size_y}",
                    plane.len()
                )));
            }
            for (y, row) in plane.iter().enumerate() {
                if row.len() != size_z {
                    return Err(Error::Validation(format!(
                        "d[{x}][{y}] has {} entries, expected {size_z}",
                        row.len()
                    )));
                }
            }
        }
        Self::new(size_x, size_y, size_z, d.iter().flatten().flatten().copied().collect())
    }

    /// Hamming distortion against a target function: `d = 1{z != f(x, y)}`.
    pub fn hamming_to(size_x: usize, size_y: usize, size_z: usize, f: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let mut table = vec![1.0; size_x * size_y * size_z];
        for x in 0..size_x {
            for y in 0..size_y {
                let z = f(x, y);
                if z >= size_z {
                    return Err(Error::Validation(format!(
                        "f({x}, {y}) = {z} is outside the reconstruction alphabet of size {size_z}"
                    )));
                }
                table[(x * size_y + y) * size_z + z] = 0.0;
            }
        }
        Self::new(size_x, size_y, size_z, table)
    }

    pub fn size_x(&self) -> usize {
        self.size_x
    }

    pub fn size_y(&self) -> usize {
        self.size_y
    }

    pub fn size_z(&self) -> usize {
        self.size_z
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.table[(x * self.size_y + y) * self.size_z + z]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn check_source(&self, source: &JointSource) -> Result<()> {
        if self.size_x != source.size_x() || self.size_y != source.size_y() {
            return Err(Error::Validation(format!(
                "distortion is defined on {}x{} but the source is {}x{}",
                self.size_x,
                self.size_y,
                source.size_x(),
                source.size_y()
            )));
        }
        Ok(())
    }

    /// Average distortion of a block.
    pub fn block_average(&self, x: &[u8], y: &[u8], z: &[u8]) -> f64 {
        debug_assert!(x.len() == y.len() && y.len() == z.len());
        if x.is_empty() {
            return 0.0;
        }
        let total: f64 = x
            .iter()
            .zip(y)
            .zip(z)
            .map(|((&a, &b), &c)| self.get(a as usize, b as usize, c as usize))
            .sum();
        total / x.len() as f64
    }

    pub fn nested(&self) -> Vec<Vec<Vec<f64>>> {
        self.table
            .chunks(self.size_y * self.size_z)
            .map(|plane| plane.chunks(self.size_z).map(<[f64]>::to_vec).collect())
            .collect()
    }
}

impl TryFrom<Vec<Vec<Vec<f64>>>> for DistortionFn {
    type Error = Error;

    fn try_from(d: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        Self::from_nested(&d)
    }
}

impl From<DistortionFn> for Vec<Vec<Vec<f64>>> {
    fn from(d: DistortionFn) -> Self {
        d.nested()
    }
}

/// Row-stochastic matrix: row `r` is a conditional pmf over `cols` outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Kernel {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Kernel {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Validation("kernel needs at least one row and column".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Validation(format!(
                "kernel {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        for (r, row) in data.chunks(cols).enumerate() {
            if let Some(c) = row.iter().position(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidPmf(format!("kernel row {r} entry {c} is {}", row[c])));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > sum_tolerance() {
                return Err(Error::InvalidPmf(format!("kernel row {r} sums to {s}")));
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|row| row.len() != cols) {
            return Err(Error::Validation(format!(
                "kernel row {r} has {} entries, expected {cols}",
                rows[r].len()
            )));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Every row puts all its mass on `f(row)`.
    pub fn deterministic(rows: usize, cols: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        let mut data = vec![0.0; rows * cols];
        for r in 0..rows {
            let c = f(r);
            if c >= cols {
                return Err(Error::Validation(format!("row {r} maps to column {c} >= {cols}")));
            }
            data[r * cols + c] = 1.0;
        }
        Self::new(rows, cols, data)
    }

    /// Every row equal to `row`.
    pub fn constant_rows(rows: usize, row: &[f64]) -> Result<Self> {
        Self::new(rows, row.len(), row.repeat(rows))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Kernel {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<Kernel> for Vec<Vec<f64>> {
    fn from(k: Kernel) -> Self {
        k.to_rows()
    }
}

/// `(R1, R2, D)`: rates in bits per source symbol and the distortion level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateDistortionTriple {
    pub r1: f64,
    pub r2: f64,
    pub d: f64,
}

impl RateDistortionTriple {
    pub fn new(r1: f64, r2: f64, d: f64) -> Result<Self> {
        if !(r1 >= 0.0 && r2 >= 0.0 && d >= 0.0) {
            return Err(Error::Validation(format!(
                "rate-distortion triple must be non-negative, got ({r1}, {r2}, {d})"
            )));
        }
        Ok(Self { r1, r2, d })
    }

    /// Coordinatewise `<=`.
    pub fn weakly_dominates(&self, other: &Self) -> bool {
        self.r1 <= other.r1 && self.r2 <= other.r2 && self.d <= other.d
    }

    pub fn strictly_dominates(&self, other: &Self) -> bool {
        self.r1 < other.r1 && self.r2 < other.r2 && self.d < other.d
    }
}

/// Zero-mean jointly Gaussian pair with variances `px`, `py` and correlation `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPair<T> {
    pub px: T,
    pub py: T,
    pub rho: T,
}

impl<T: Real> GaussianPair<T> {
    pub fn new(px: T, py: T, rho: T) -> Result<Self> {
        if !(px > T::zero() && px.is_finite()) || !(py > T::zero() && py.is_finite()) {
            return Err(Error::Validation(format!(
                "variances must be positive and finite, got px = {px:?}, py = {py:?}"
            )));
        }
        if !(rho >= -T::one() && rho <= T::one()) {
            return Err(Error::Validation(format!("correlation must lie in [-1, 1], got {rho:?}")));
        }
        Ok(Self { px, py, rho })
    }

    /// `1 - rho^2`, exactly zero at `|rho| = 1`.
    pub fn decorrelation(&self) -> T {
        if self.rho.abs() == T::one() {
            T::zero()
        } else {
            T::one() - self.rho * self.rho
        }
    }
}

/// The JSON document accepted for a source and distortion pair:
/// `{"px_y": [[...]], "d": [[[...]]]}`, nested x -> y -> z.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceDocument {
    pub px_y: Vec<Vec<f64>>,
    pub d: Vec<Vec<Vec<f64>>>,
}

impl SourceDocument {
    pub fn new(source: &JointSource, dist: &DistortionFn) -> Self {
        Self { px_y: source.rows(), d: dist.nested() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("source document: {e}")))
    }

    /// Validates both fields, naming the offending one on failure.
    pub fn into_parts(self) -> Result<(JointSource, DistortionFn)> {
        let source = JointSource::from_rows(&self.px_y)
            .map_err(|e| Error::Validation(format!("px_y: {e}")))?;
        let dist = DistortionFn::from_nested(&self.d)
            .map_err(|e| Error::Validation(format!("d: {e}")))?;
        dist.check_source(&source).map_err(|e| Error::Validation(format!("d: {e}")))?;
        Ok((source, dist))
    }
}
