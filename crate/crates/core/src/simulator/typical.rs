use crate::model::JointPmf;
use crate::scalar::Real;
use crate::{Error, Result};

/// Robust strong typicality of a tuple of equal-length sequences.
///
/// True iff every symbol tuple `a` has empirical frequency within `eps * p(a)`
/// of `p(a)`, and tuples with `p(a) = 0` never occur.
pub fn is_jointly_typical(seqs: &[&[u8]], joint: &JointPmf<f64>, eps: f64) -> Result<bool> {
    if seqs.len() != joint.ndim() {
        return Err(Error::Validation(format!(
            "{} sequences given for a {}-variable pmf",
            seqs.len(),
            joint.ndim()
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::Validation(format!("typicality slack must be positive, got {eps}")));
    }
    let n = seqs.first().map_or(0, |s| s.len());
    if seqs.iter().any(|s| s.len() != n) {
        return Err(Error::Validation("sequences differ in length".into()));
    }
    if n == 0 {
        return Err(Error::Validation("sequences are empty".into()));
    }
    let shape = joint.shape();
    let mut base = vec![0usize; n];
    for (seq, &size) in seqs[..seqs.len() - 1].iter().zip(shape) {
        for (b, &s) in base.iter_mut().zip(seq.iter()) {
            if s as usize >= size {
                return Err(Error::Validation(format!("symbol {s} outside alphabet of size {size}")));
            }
            *b = *b * size + s as usize;
        }
    }
    let last = *shape.last().expect("pmf has at least one axis");
    let cand = seqs[seqs.len() - 1];
    if let Some(&s) = cand.iter().find(|&&s| s as usize >= last) {
        return Err(Error::Validation(format!("symbol {s} outside alphabet of size {last}")));
    }
    let test = TypicalityTest::new(joint, n, eps);
    Ok(test.check(&base, cand, &mut Vec::new()))
}

/// Precomputed count bounds for one joint pmf and block length.
///
/// Sequences are checked as a fixed prefix, already folded into flat indices
/// over all axes but the last, plus a candidate sequence on the last axis.
#[derive(Debug, Clone)]
pub(crate) struct TypicalityTest {
    last: usize,
    lo: Vec<u32>,
    hi: Vec<u32>,
}

impl TypicalityTest {
    pub(crate) fn new(joint: &JointPmf<f64>, n: usize, eps: f64) -> Self {
        let nf = n as f64;
        let slack = 1e-9;
        let mut lo = Vec::with_capacity(joint.probs().len());
        let mut hi = Vec::with_capacity(joint.probs().len());
        for &p in joint.probs() {
            if p <= f64::zero_threshold() {
                lo.push(0);
                hi.push(0);
            } else {
                let l = (nf * p * (1.0 - eps) - slack).ceil().max(0.0);
                let h = (nf * p * (1.0 + eps) + slack).floor().min(nf);
                lo.push(l as u32);
                hi.push(h as u32);
            }
        }
        Self { last: *joint.shape().last().expect("pmf has at least one axis"), lo, hi }
    }

    pub(crate) fn check(&self, base: &[usize], cand: &[u8], counts: &mut Vec<u32>) -> bool {
        counts.clear();
        counts.resize(self.lo.len(), 0);
        for (&b, &c) in base.iter().zip(cand) {
            let k = b * self.last + c as usize;
            counts[k] += 1;
            if counts[k] > self.hi[k] {
                return false;
            }
        }
        counts.iter().zip(&self.lo).all(|(c, l)| c >= l)
    }
}
