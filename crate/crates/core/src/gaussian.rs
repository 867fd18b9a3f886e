//! Closed-form distortion and sum-rate bounds for estimating `X + Y` from a
//! jointly Gaussian pair over the cascade network, under squared error.
//!
//! The inner-bound values are restricted to jointly Gaussian auxiliaries, in
//! which case the optimum either forwards Encoder 1's description untouched or
//! recompresses an estimate of `X` together with `Y`, never a mixture.
//! Rates are in bits per symbol. Rates above [`MAX_RATE`] are accepted but
//! `2^(-2R)` is taken to be exactly zero there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GaussianPair;
use crate::scalar::Real;

pub const MAX_RATE: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Decode Encoder 1's message and re-encode the estimated sum with `Y`.
    Recompress,
    /// Relay Encoder 1's message unchanged to the decoder.
    Forward,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Recompress => "recompress",
            Strategy::Forward => "forward",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyChoice<T> {
    pub choice: Strategy,
    /// `0.5 * log2(px / py)`.
    pub threshold: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    LowDistortion,
    HighDistortion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumRateBound<T> {
    pub rate: T,
    pub regime: Regime,
}

/// Both strategies evaluated at one rate pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerBoundBranches<T> {
    pub recompress: T,
    /// `None` when `|rho| = 1`.
    pub forward: Option<T>,
    pub chosen: StrategyChoice<T>,
}

fn check_rate<T: Real>(name: &str, r: T) -> Result<()> {
    if r >= T::zero() && !r.is_nan() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} must be a non-negative rate, got {r:?}")))
    }
}

/// `2^(-2r)`, zero past [`MAX_RATE`].
fn decay<T: Real>(r: T) -> T {
    if r > T::lit(MAX_RATE) {
        T::zero()
    } else {
        (-(r + r)).exp2()
    }
}

fn half_log2<T: Real>(v: T) -> T {
    v.log2() / T::lit(2.0)
}

/// Variance of `X + Y`.
pub fn sum_variance<T: Real>(pair: &GaussianPair<T>) -> T {
    let cross = T::lit(2.0) * pair.rho * (pair.px * pair.py).sqrt();
    (pair.px + pair.py + cross).max(T::zero())
}

/// Recompress when `r1 >= 0.5 log2(px/py)`, forward otherwise. The boundary
/// belongs to recompress.
pub fn strategy_threshold<T: Real>(pair: &GaussianPair<T>, r1: T) -> Result<StrategyChoice<T>> {
    check_rate("r1", r1)?;
    let threshold = half_log2(pair.px / pair.py);
    let choice = if r1 >= threshold { Strategy::Recompress } else { Strategy::Forward };
    Ok(StrategyChoice { choice, threshold })
}

/// Distortion when Encoder 2 recompresses:
/// `(1 - rho^2)(1 - 2^-2R2) 2^-2R1 px + 2^-2R2 P_sum`.
pub fn recompress_distortion<T: Real>(pair: &GaussianPair<T>, r1: T, r2: T) -> Result<T> {
    check_rate("r1", r1)?;
    check_rate("r2", r2)?;
    let a = decay(r1);
    let b = decay(r2);
    Ok(pair.decorrelation() * (T::one() - b) * a * pair.px + b * sum_variance(pair))
}

/// `R2` value separating the two forward sub-cases,
/// `0.5 log2((2^2R1 - rho^2) / (1 - rho^2))`, evaluated as
/// `R1 + 0.5 log2((1 - rho^2 2^-2R1) / (1 - rho^2))` so large `R1` cannot overflow.
pub fn forward_subcase_threshold<T: Real>(pair: &GaussianPair<T>, r1: T) -> Result<T> {
    check_rate("r1", r1)?;
    let c = pair.decorrelation();
    if c == T::zero() {
        return Err(Error::DegenerateCorrelation);
    }
    let rho2 = pair.rho * pair.rho;
    Ok(r1 + half_log2((T::one() - rho2 * decay(r1)) / c))
}

/// The two forward expressions at one rate pair: `(limited by R2, limited by R1)`.
///
/// The first applies when `R2` is at or below [`forward_subcase_threshold`],
/// the second above it. Both are returned so callers can compare them at the
/// boundary.
pub fn forward_subcase_values<T: Real>(pair: &GaussianPair<T>, r1: T, r2: T) -> Result<(T, T)> {
    check_rate("r1", r1)?;
    check_rate("r2", r2)?;
    let c = pair.decorrelation();
    if c == T::zero() {
        return Err(Error::DegenerateCorrelation);
    }
    let rho2 = pair.rho * pair.rho;
    let a = decay(r1);
    let b = decay(r2);
    let p_sum = sum_variance(pair);

    // 2^-2R2 (P_sum + (1 - rho^2)(2^2R2 - 1) py)
    let limited_by_r2 = b * p_sum + c * (T::one() - b) * pair.py;

    // ((1-rho^2) 2^-2R1 - (1 - rho^2 2^-2R1) 2^-2R2) px + 2^-2R2 (P_sum + (2^2R1 - 1) py)
    // with 2^-2R2 (2^2R1 - 1) = 2^(2(R1 - R2)) (1 - 2^-2R1)
    let relay_excess = if r1 > T::lit(MAX_RATE) || r2 > T::lit(MAX_RATE) {
        // 2^(2(R1 - R2)) stays meaningful even when both decays underflow
        (T::lit(2.0) * (r1 - r2)).exp2() * (T::one() - a)
    } else {
        b / a * (T::one() - a)
    };
    let limited_by_r1 =
        (c * a - (T::one() - rho2 * a) * b) * pair.px + b * p_sum + relay_excess * pair.py;
    Ok((limited_by_r2, limited_by_r1))
}

/// Distortion when Encoder 2 forwards Encoder 1's description. Undefined at `|rho| = 1`.
pub fn forward_distortion<T: Real>(pair: &GaussianPair<T>, r1: T, r2: T) -> Result<T> {
    let (limited_by_r2, limited_by_r1) = forward_subcase_values(pair, r1, r2)?;
    if r2 <= forward_subcase_threshold(pair, r1)? {
        Ok(limited_by_r2)
    } else {
        Ok(limited_by_r1)
    }
}

/// Gaussian-restricted inner-bound distortion: the strategy picked by
/// [`strategy_threshold`], evaluated at `(r1, r2)`.
pub fn inner_bound_distortion<T: Real>(pair: &GaussianPair<T>, r1: T, r2: T) -> Result<T> {
    match strategy_threshold(pair, r1)?.choice {
        Strategy::Recompress => recompress_distortion(pair, r1, r2),
        Strategy::Forward => forward_distortion(pair, r1, r2),
    }
}

pub fn inner_bound_branches<T: Real>(
    pair: &GaussianPair<T>,
    r1: T,
    r2: T,
) -> Result<InnerBoundBranches<T>> {
    let chosen = strategy_threshold(pair, r1)?;
    let recompress = recompress_distortion(pair, r1, r2)?;
    let forward = match forward_distortion(pair, r1, r2) {
        Ok(v) => Some(v),
        Err(Error::DegenerateCorrelation) => None,
        Err(e) => return Err(e),
    };
    Ok(InnerBoundBranches { recompress, forward, chosen })
}

/// Cut-set lower bound on distortion: `max{2^-2R1 (1-rho^2) px, 2^-2R2 P_sum}`.
pub fn outer_bound_distortion<T: Real>(pair: &GaussianPair<T>, r1: T, r2: T) -> Result<T> {
    check_rate("r1", r1)?;
    check_rate("r2", r2)?;
    let link1 = decay(r1) * pair.decorrelation() * pair.px;
    let link2 = decay(r2) * sum_variance(pair);
    Ok(link1.max(link2))
}

fn require_px_le_py<T: Real>(pair: &GaussianPair<T>) -> Result<()> {
    if pair.px > pair.py {
        return Err(Error::Precondition(format!(
            "sum-rate results need px <= py, got px = {:?}, py = {:?}",
            pair.px, pair.py
        )));
    }
    Ok(())
}

/// Split of a total rate minimizing [`recompress_distortion`].
///
/// Above `delta = 0.5 log2(P_sum / ((1-rho^2) px))` the optimum has
/// `r2 - r1 = delta`; below it all of the rate goes to the second link.
pub fn optimal_rate_split<T: Real>(pair: &GaussianPair<T>, total_rate: T) -> Result<(T, T)> {
    require_px_le_py(pair)?;
    check_rate("total_rate", total_rate)?;
    let c = pair.decorrelation();
    if c == T::zero() {
        // distortion no longer depends on r1
        return Ok((T::zero(), total_rate));
    }
    let delta = half_log2(sum_variance(pair) / (c * pair.px));
    if total_rate >= delta {
        let half = T::lit(0.5);
        Ok((half * (total_rate - delta), half * (total_rate + delta)))
    } else {
        Ok((T::zero(), total_rate))
    }
}

fn check_sumrate_domain<T: Real>(pair: &GaussianPair<T>, d: T) -> Result<T> {
    require_px_le_py(pair)?;
    let p_sum = sum_variance(pair);
    if !(d > T::zero() && d <= p_sum) {
        return Err(Error::Domain(format!(
            "sum-rate bounds need 0 < D <= P_sum = {p_sum:?}, got {d:?}"
        )));
    }
    Ok(p_sum)
}

/// Achievable sum rate `R1 + R2` at distortion `d`, from the recompress scheme.
pub fn sumrate_upper<T: Real>(pair: &GaussianPair<T>, d: T) -> Result<SumRateBound<T>> {
    let p_sum = check_sumrate_domain(pair, d)?;
    let a = pair.decorrelation() * pair.px;
    let low_limit = a * (T::lit(2.0) - a / p_sum);
    if d <= low_limit {
        let rate = half_log2(p_sum / d)
            + half_log2(a / d)
            + (T::one() + (T::one() - d / p_sum).max(T::zero()).sqrt()).log2();
        Ok(SumRateBound { rate: rate.max(T::zero()), regime: Regime::LowDistortion })
    } else {
        let denom = d - a;
        if denom <= T::zero() {
            return Err(Error::Domain(format!(
                "high-distortion upper bound needs D > (1-rho^2) px = {a:?}, got {d:?}"
            )));
        }
        let rate = half_log2((p_sum - a) / denom);
        Ok(SumRateBound { rate: rate.max(T::zero()), regime: Regime::HighDistortion })
    }
}

/// Cut-set lower bound on the sum rate at distortion `d`.
pub fn sumrate_lower<T: Real>(pair: &GaussianPair<T>, d: T) -> Result<SumRateBound<T>> {
    let p_sum = check_sumrate_domain(pair, d)?;
    let a = pair.decorrelation() * pair.px;
    if d <= a {
        let rate = half_log2(p_sum / d) + half_log2(a / d);
        Ok(SumRateBound { rate: rate.max(T::zero()), regime: Regime::LowDistortion })
    } else {
        Ok(SumRateBound { rate: half_log2(p_sum / d).max(T::zero()), regime: Regime::HighDistortion })
    }
}

/// Upper minus lower sum-rate bound; lies in `[0, 1]` and shrinks with `d`.
pub fn sumrate_gap<T: Real>(pair: &GaussianPair<T>, d: T) -> Result<T> {
    Ok(sumrate_upper(pair, d)?.rate - sumrate_lower(pair, d)?.rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest};
    use proptest::strategy::Strategy as PropStrategy;

    fn pair(px: f64, py: f64, rho: f64) -> GaussianPair<f64> {
        GaussianPair::new(px, py, rho).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sum_variance_examples() {
        assert_eq!(sum_variance(&pair(1.0, 1.0, 0.0)), 2.0);
        assert_eq!(sum_variance(&pair(1.0, 1.0, -1.0)), 0.0);
        assert!(close(sum_variance(&pair(4.0, 1.0, 0.5)), 7.0, 1e-15));
    }

    #[test]
    fn threshold_examples() {
        let s = strategy_threshold(&pair(1.0, 1.0, 0.3), 0.0).unwrap();
        assert_eq!((s.choice, s.threshold), (Strategy::Recompress, 0.0));
        let s = strategy_threshold(&pair(4.0, 1.0, 0.0), 0.5).unwrap();
        assert_eq!((s.choice, s.threshold), (Strategy::Forward, 1.0));
        let s = strategy_threshold(&pair(4.0, 1.0, 0.0), 1.0).unwrap();
        assert_eq!(s.choice, Strategy::Recompress);
        assert!(strategy_threshold(&pair(4.0, 1.0, 0.0), -0.1).is_err());
    }

    #[test]
    fn recompress_examples() {
        let p = pair(1.0, 1.0, 0.0);
        assert!(close(recompress_distortion(&p, 1.0, 1.0).unwrap(), 11.0 / 16.0, 1e-15));
        let q = pair(3.0, 2.0, -0.4);
        assert!(close(recompress_distortion(&q, 0.7, 0.0).unwrap(), sum_variance(&q), 1e-15));
        // r1 past the clamp behaves like r1 = infinity
        assert!(close(recompress_distortion(&p, 100.0, 1.0).unwrap(), 0.5, 1e-15));
        assert!(recompress_distortion(&p, -1.0, 1.0).is_err());
        assert!(recompress_distortion(&p, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn forward_examples() {
        let p = pair(4.0, 1.0, 0.0);
        assert!(close(forward_distortion(&p, 2.0, 1.0).unwrap(), 2.0, 1e-14));
        assert!(close(forward_distortion(&p, 0.5, 2.0).unwrap(), 2.125, 1e-14));
        let q = pair(2.5, 0.7, 0.6);
        assert!(close(forward_distortion(&q, 1.3, 0.0).unwrap(), sum_variance(&q), 1e-14));
        assert_eq!(
            forward_distortion(&pair(1.0, 1.0, 1.0), 1.0, 1.0),
            Err(Error::DegenerateCorrelation)
        );
    }

    #[test]
    fn forward_large_rates_stay_finite() {
        let p = pair(4.0, 1.0, 0.5);
        let d = forward_distortion(&p, 80.0, 90.0).unwrap();
        assert!(d.is_finite() && d >= 0.0);
        let t = forward_subcase_threshold(&p, 200.0).unwrap();
        assert!(t.is_finite());
        let p32 = GaussianPair::<f32>::new(4.0, 1.0, 0.5).unwrap();
        assert!(forward_subcase_threshold(&p32, 63.0).unwrap().is_finite());
    }

    #[test]
    fn inner_dispatch_examples() {
        assert!(close(inner_bound_distortion(&pair(1.0, 1.0, 0.0), 1.0, 1.0).unwrap(), 0.6875, 1e-15));
        assert!(close(inner_bound_distortion(&pair(4.0, 1.0, 0.0), 0.5, 2.0).unwrap(), 2.125, 1e-14));
        for p in [pair(1.0, 1.0, 0.0), pair(4.0, 1.0, 0.3), pair(0.5, 3.0, -0.8)] {
            assert!(close(inner_bound_distortion(&p, 0.0, 0.0).unwrap(), sum_variance(&p), 1e-14));
        }
        let b = inner_bound_branches(&pair(4.0, 1.0, 1.0), 2.0, 1.0).unwrap();
        assert!(b.forward.is_none());
        assert_eq!(b.chosen.choice, Strategy::Recompress);
    }

    #[test]
    fn outer_examples() {
        let p = pair(1.0, 1.0, 0.0);
        assert_eq!(outer_bound_distortion(&p, 1.0, 1.0).unwrap(), 0.5);
        assert_eq!(outer_bound_distortion(&p, 0.0, 0.0).unwrap(), 2.0);
    }

    #[test]
    fn split_examples() {
        let p = pair(1.0, 1.0, 0.0);
        let (a, b) = optimal_rate_split(&p, 2.0).unwrap();
        assert!(close(a, 0.75, 1e-15) && close(b, 1.25, 1e-15));
        assert_eq!(optimal_rate_split(&p, 0.25).unwrap(), (0.0, 0.25));
        assert!(matches!(optimal_rate_split(&pair(2.0, 1.0, 0.0), 1.0), Err(Error::Precondition(_))));
    }

    // golden-section minimization of recompress distortion along r1 + r2 = total
    fn golden_split(p: &GaussianPair<f64>, total: f64) -> f64 {
        let f = |r1: f64| recompress_distortion(p, r1, total - r1).unwrap();
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (0.0, total);
        for _ in 0..200 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if f(a) <= f(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn split_matches_numeric_minimizer() {
        for (px, py, rho, total) in [(1.0, 1.0, 0.0, 2.0), (0.5, 2.0, 0.4, 3.0), (1.0, 4.0, -0.7, 5.0)] {
            let p = pair(px, py, rho);
            let (r1, _) = optimal_rate_split(&p, total).unwrap();
            assert!(close(r1, golden_split(&p, total), 1e-6), "{px} {py} {rho}");
        }
        // below the threshold the minimizer sits on the r1 = 0 edge
        let p = pair(1.0, 1.0, 0.0);
        assert!(golden_split(&p, 0.25) < 1e-6);
    }

    #[test]
    fn sumrate_examples() {
        let p = pair(1.0, 1.0, 0.0);
        let up = sumrate_upper(&p, 2.0).unwrap();
        assert_eq!((up.rate, up.regime), (0.0, Regime::HighDistortion));
        let up = sumrate_upper(&p, 0.5).unwrap();
        let expect = 1.0 + 0.5 + (1.0 + 0.75f64.sqrt()).log2();
        assert_eq!(up.regime, Regime::LowDistortion);
        assert!(close(up.rate, expect, 1e-14));
        assert!(close(up.rate, 2.400, 1e-3));

        assert_eq!(sumrate_lower(&p, 2.0).unwrap().rate, 0.0);
        assert!(close(sumrate_lower(&p, 0.5).unwrap().rate, 1.5, 1e-15));
        let lo = sumrate_lower(&p, 1.5).unwrap();
        assert_eq!(lo.regime, Regime::HighDistortion);
        assert!(close(lo.rate, 0.5 * (4.0f64 / 3.0).log2(), 1e-15));
        assert!(close(lo.rate, 0.2075, 1e-4));

        assert!(close(sumrate_gap(&p, 0.5).unwrap(), (1.0 + 0.75f64.sqrt()).log2(), 1e-14));
        assert_eq!(sumrate_gap(&p, 2.0).unwrap(), 0.0);
        let near_zero = sumrate_gap(&p, 1e-9).unwrap();
        assert!(near_zero < 1.0 && near_zero > 1.0 - 1e-9);

        assert!(matches!(sumrate_upper(&p, 0.0), Err(Error::Domain(_))));
        assert!(matches!(sumrate_lower(&p, 2.5), Err(Error::Domain(_))));
        assert!(matches!(sumrate_gap(&pair(2.0, 1.0, 0.0), 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn generic_over_f32() {
        let p = GaussianPair::<f32>::new(1.0, 1.0, 0.0).unwrap();
        assert!((recompress_distortion(&p, 1.0, 1.0).unwrap() - 0.6875).abs() < 1e-6);
        assert!((sumrate_lower(&p, 0.5).unwrap().rate - 1.5).abs() < 1e-6);
    }

    fn any_pair() -> impl PropStrategy<Value = GaussianPair<f64>> {
        (0.05f64..10.0, 0.05f64..10.0, -0.999f64..0.999)
            .prop_map(|(px, py, rho)| GaussianPair::new(px, py, rho).unwrap())
    }

    proptest! {
        #[test]
        fn outer_never_exceeds_inner(p in any_pair(), r1 in 0.0f64..8.0, r2 in 0.0f64..8.0) {
            let inner = inner_bound_distortion(&p, r1, r2).unwrap();
            let outer = outer_bound_distortion(&p, r1, r2).unwrap();
            prop_assert!(outer <= inner + 1e-12, "outer {} inner {}", outer, inner);
        }

        #[test]
        fn forward_continuous_at_subcase_boundary(p in any_pair(), r1 in 0.0f64..6.0) {
            let r2 = forward_subcase_threshold(&p, r1).unwrap();
            let (a, b) = forward_subcase_values(&p, r1, r2).unwrap();
            prop_assert!((a - b).abs() <= 1e-9);
        }

        #[test]
        fn distortions_non_increasing_in_rates(p in any_pair(), r1 in 0.0f64..6.0, r2 in 0.0f64..6.0, step in 0.001f64..1.0) {
            let tol = 1e-12;
            let rc = recompress_distortion(&p, r1, r2).unwrap();
            prop_assert!(recompress_distortion(&p, r1 + step, r2).unwrap() <= rc + tol);
            prop_assert!(recompress_distortion(&p, r1, r2 + step).unwrap() <= rc + tol);
            // the forward expressions only describe the forward regime R1 < threshold
            let q = GaussianPair::new(p.px.max(p.py), p.px.min(p.py), p.rho).unwrap();
            let top = strategy_threshold(&q, 0.0).unwrap().threshold;
            let r1 = r1.min(top) * 0.999;
            if r1 + step < top {
                let fw = forward_distortion(&q, r1, r2).unwrap();
                prop_assert!(forward_distortion(&q, r1 + step, r2).unwrap() <= fw + tol);
                prop_assert!(forward_distortion(&q, r1, r2 + step).unwrap() <= fw + tol);
            }
        }

        #[test]
        fn sumrate_gap_within_one_bit(p in any_pair(), frac in 1e-6f64..1.0) {
            let p = if p.px > p.py { GaussianPair::new(p.py, p.px, p.rho).unwrap() } else { p };
            let d = frac * sum_variance(&p);
            let gap = sumrate_gap(&p, d).unwrap();
            prop_assert!((-1e-12..=1.0).contains(&gap), "gap {}", gap);
            let up = sumrate_upper(&p, d).unwrap().rate;
            let lo = sumrate_lower(&p, d).unwrap().rate;
            prop_assert!(up >= lo - 1e-12);
        }
    }
}
