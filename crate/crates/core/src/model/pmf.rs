use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense joint probability mass function over a product of finite alphabets,
/// stored row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf<T> {
    shape: Vec<usize>,
    probs: Vec<T>,
}

impl<T: Real> JointPmf<T> {
    pub fn new(shape: Vec<usize>, probs: Vec<T>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::InvalidPmf("joint pmf needs at least one axis".into()));
        }
        if let Some(axis) = shape.iter().position(|&s| s == 0) {
            return Err(Error::InvalidPmf(format!("axis {axis} has zero alphabet size")));
        }
        let len: usize = shape.iter().product();
        if len != probs.len() {
            return Err(Error::InvalidPmf(format!(
                "shape {shape:?} needs {len} entries, got {}",
                probs.len()
            )));
        }
        validate_probs(&probs)?;
        Ok(Self { shape, probs })
    }

    /// Builds a pmf whose entries the caller has already validated.
    pub(crate) fn from_parts_unchecked(shape: Vec<usize>, probs: Vec<T>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), probs.len());
        Self { shape, probs }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn get(&self, index: &[usize]) -> T {
        self.probs[flat_index(&self.shape, index)]
    }

    fn check_axes(&self, axes: &[usize]) -> Result<()> {
        for (k, &a) in axes.iter().enumerate() {
            if a >= self.ndim() {
                return Err(Error::Validation(format!(
                    "axis {a} out of range for a {}-variable pmf",
                    self.ndim()
                )));
            }
            if axes[..k].contains(&a) {
                return Err(Error::Validation(format!("axis {a} listed twice")));
            }
        }
        Ok(())
    }

    /// Marginal over `axes`, kept in the order given. An empty axis list
    /// yields the trivial one-point distribution.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointPmf<T>> {
        self.check_axes(axes)?;
        Ok(self.marginal_unchecked(axes))
    }

    pub(crate) fn marginal_unchecked(&self, axes: &[usize]) -> JointPmf<T> {
        let out_shape: Vec<usize> = if axes.is_empty() {
            vec![1]
        } else {
            axes.iter().map(|&a| self.shape[a]).collect()
        };
        let out_len: usize = out_shape.iter().product();
        let mut out = vec![T::zero(); out_len];

        // stride of each source axis inside the output array (0 if summed out)
        let mut out_stride = vec![0usize; self.ndim()];
        let mut s = 1;
        for &a in axes.iter().rev() {
            out_stride[a] = s;
            s *= self.shape[a];
        }

        let mut counter = vec![0usize; self.ndim()];
        let mut target = 0usize;
        for &p in &self.probs {
            out[target] = out[target] + p;
            // odometer increment, last axis fastest
            for ax in (0..self.ndim()).rev() {
                counter[ax] += 1;
                target += out_stride[ax];
                if counter[ax] < self.shape[ax] {
                    break;
                }
                target -= out_stride[ax] * counter[ax];
                counter[ax] = 0;
            }
        }
        JointPmf::from_parts_unchecked(out_shape, out)
    }

    /// Joint entropy of the variables in `axes`, in bits.
    pub fn entropy_of(&self, axes: &[usize]) -> Result<T> {
        self.check_axes(axes)?;
        Ok(self.entropy_of_unchecked(axes))
    }

    pub(crate) fn entropy_of_unchecked(&self, axes: &[usize]) -> T {
        if axes.is_empty() {
            return T::zero();
        }
        if axes.len() == self.ndim() && axes.iter().enumerate().all(|(k, &a)| k == a) {
            return entropy_unchecked(&self.probs);
        }
        entropy_unchecked(self.marginal_unchecked(axes).probs())
    }
}

pub(crate) fn flat_index(shape: &[usize], index: &[usize]) -> usize {
    debug_assert_eq!(shape.len(), index.len());
    index
        .iter()
        .zip(shape)
        .fold(0, |acc, (&i, &s)| {
            debug_assert!(i < s);
            acc * s + i
        })
}

pub(crate) fn validate_probs<T: Real>(probs: &[T]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidPmf("empty probability vector".into()));
    }
    let mut total = T::zero();
    for (k, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < T::zero() {
            return Err(Error::InvalidPmf(format!("entry {k} is {p:?}")));
        }
        total = total + p;
    }
    if (total - T::one()).abs() > T::sum_tolerance() {
        return Err(Error::InvalidPmf(format!("entries sum to {total:?}")));
    }
    Ok(())
}

/// `-sum p log2 p` with entries below the zero threshold skipped.
pub(crate) fn entropy_unchecked<T: Real>(probs: &[T]) -> T {
    let cut = T::zero_threshold();
    let h = probs
        .iter()
        .filter(|&&p| p > cut)
        .fold(T::zero(), |acc, &p| acc - p * p.log2());
    h.max(T::zero())
}
