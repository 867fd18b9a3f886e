//! Entropy and mutual information on finite distributions, in bits.

use super::pmf::{entropy_unchecked, validate_probs, JointPmf};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shannon entropy `-sum p log2 p` of a probability vector.
pub fn entropy<T: Real>(pmf: &[T]) -> Result<T> {
    validate_probs(pmf)?;
    Ok(entropy_unchecked(pmf))
}

/// Binary entropy function `h(p)`.
pub fn binary_entropy<T: Real>(p: T) -> Result<T> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::Validation(format!("binary entropy needs p in [0, 1], got {p:?}")));
    }
    Ok(entropy_unchecked(&[p, T::one() - p]))
}

/// `I(A;B)` for a two-variable joint pmf.
pub fn mutual_information<T: Real>(joint: &JointPmf<T>) -> Result<T> {
    if joint.ndim() != 2 {
        return Err(Error::Validation(format!(
            "mutual_information expects a 2-variable pmf, got {} variables",
            joint.ndim()
        )));
    }
    conditional_mutual_information(joint, &[0], &[1], &[])
}

/// `I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C)` for disjoint index sets.
pub fn conditional_mutual_information<T: Real>(
    joint: &JointPmf<T>,
    set_a: &[usize],
    set_b: &[usize],
    set_c: &[usize],
) -> Result<T> {
    if set_a.is_empty() || set_b.is_empty() {
        return Err(Error::Validation("I(A;B|C) needs non-empty A and B".into()));
    }
    let all: Vec<usize> = set_a.iter().chain(set_b).chain(set_c).copied().collect();
    for (k, a) in all.iter().enumerate() {
        if all[..k].contains(a) {
            return Err(Error::Validation(format!(
                "variable {a} appears in more than one index set"
            )));
        }
        if *a >= joint.ndim() {
            return Err(Error::Validation(format!(
                "variable {a} out of range for a {}-variable pmf",
                joint.ndim()
            )));
        }
    }
    Ok(cmi_unchecked(joint, set_a, set_b, set_c))
}

pub(crate) fn cmi_unchecked<T: Real>(
    joint: &JointPmf<T>,
    set_a: &[usize],
    set_b: &[usize],
    set_c: &[usize],
) -> T {
    let with = |xs: &[&[usize]]| -> Vec<usize> {
        let mut v: Vec<usize> = xs.iter().flat_map(|s| s.iter().copied()).collect();
        v.sort_unstable();
        v
    };
    let h_ac = joint.entropy_of_unchecked(&with(&[set_a, set_c]));
    let h_bc = joint.entropy_of_unchecked(&with(&[set_b, set_c]));
    let h_abc = joint.entropy_of_unchecked(&with(&[set_a, set_b, set_c]));
    let h_c = joint.entropy_of_unchecked(&with(&[set_c]));
    (h_ac + h_bc - h_abc - h_c).max(T::zero())
}
