//! Instance-difficulty quantities and closed-form regret envelopes.
//!
//! For an instance with means `mu` and optimal mean `mu* = max_i mu_i`:
//!
//! * gap: `Delta_i = mu* - mu_i`;
//! * effective arms: `k_(i,rho) = sum_j min(1, Delta_i^(2 rho) / Delta_j^(2 rho))`,
//!   the number of arms that are hard to distinguish from arm `i` at scale
//!   `Delta_i`; always in [1, K] and nonincreasing in `rho`;
//! * upper envelope: `C * sum_(Delta_i > 0) (Delta_i + log(b_i) / Delta_i)`
//!   with `b_i = max(n Delta_i^2 log(n) / k_(i,rho), log(n), e)`;
//! * lower envelope: `(1/4) * sum_(Delta_i > 0) (1 / Delta_i) *
//!   log(n Delta_i^2 / (k_(i,1/2) log n))`, valid when every argument of the
//!   log is at least 1 (violations are reported, and the log clamps at 0);
//! * asymptotic slope: `sum_(Delta_i > 0) 2 eta / Delta_i`, the long-run
//!   coefficient of `log n` in the regret guarantee.

use crate::error::{Error, Result};
use crate::policies::IndexParams;

/// Per-arm gaps plus the extreme positive/overall gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile {
    gaps: Vec<f64>,
    delta_min: Option<f64>,
    delta_max: f64,
}

impl GapProfile {
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn num_arms(&self) -> usize {
        self.gaps.len()
    }

    /// Smallest strictly positive gap; `None` when every arm is optimal.
    pub fn delta_min(&self) -> Option<f64> {
        self.delta_min
    }

    pub fn delta_max(&self) -> f64 {
        self.delta_max
    }
}

/// Gap profile of a mean vector. Requires at least 2 arms and finite means.
pub fn gaps(means: &[f64]) -> Result<GapProfile> {
    if means.len() < 2 {
        return Err(Error::Config("gap profile needs at least 2 arms".into()));
    }
    if means.iter().any(|m| !m.is_finite()) {
        return Err(Error::Config("gap profile needs finite means".into()));
    }
    let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gaps: Vec<f64> = means.iter().map(|m| best - m).collect();
    let delta_min = gaps
        .iter()
        .copied()
        .filter(|&g| g > 0.0)
        .fold(f64::INFINITY, f64::min);
    let delta_max = gaps.iter().copied().fold(0.0, f64::max);
    Ok(GapProfile {
        delta_min: (delta_min.is_finite()).then_some(delta_min),
        delta_max,
        gaps,
    })
}

/// `k_(i,rho) = sum_j min(1, (Delta_i / Delta_j)^(2 rho))`.
///
/// Terms with `Delta_j = 0` contribute 1 (the ratio is +inf, capped by the
/// min); `rho = 0` makes every term 1, so the result is K. Defined only for
/// suboptimal arms (`Delta_i > 0`).
pub fn effective_arms(profile: &GapProfile, arm: usize, rho: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Config(format!("rho must lie in [0, 1] (got {rho})")));
    }
    let di = profile.gaps[arm];
    if di <= 0.0 {
        return Err(Error::Config(format!(
            "effective arm count is defined only for suboptimal arms (arm {arm} has zero gap)"
        )));
    }
    let two_rho = 2.0 * rho;
    Ok(profile
        .gaps
        .iter()
        .map(|&dj| 1f64.min((di / dj).powf(two_rho)))
        .sum())
}

/// One evaluated envelope: per-arm contributions (zero at optimal arms),
/// their sum, the constant multiplier used, and the arms (if any) violating
/// the envelope's hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub per_arm: Vec<f64>,
    pub total: f64,
    pub constant: f64,
    pub hypothesis_violations: Vec<usize>,
}

/// Upper regret envelope at horizon `n`:
/// `C * (Delta_i + log(b_i) / Delta_i)` summed over suboptimal arms, with
/// `b_i = max(n Delta_i^2 log(n) / k_(i,rho), log(n), e)`.
///
/// `C` is caller-supplied; the guarantee's constant depends only on `eta`
/// and is not pinned to a number, so comparisons fit it once on a reference
/// instance and freeze it.
pub fn upper_envelope(means: &[f64], n: u64, params: &IndexParams, c: f64) -> Result<BoundReport> {
    params.validate()?;
    if n < 2 {
        return Err(Error::Config("envelope needs horizon n >= 2".into()));
    }
    if !(c > 0.0) {
        return Err(Error::Config(format!("envelope constant must be positive (got {c})")));
    }
    let profile = gaps(means)?;
    let n_f = n as f64;
    let ln_n = n_f.ln();
    let mut per_arm = Vec::with_capacity(profile.num_arms());
    for (i, &delta) in profile.gaps().iter().enumerate() {
        if delta <= 0.0 {
            per_arm.push(0.0);
            continue;
        }
        let k = effective_arms(&profile, i, params.rho)?;
        let b = (n_f * delta * delta * ln_n / k)
            .max(ln_n)
            .max(std::f64::consts::E);
        per_arm.push(c * (delta + b.ln() / delta));
    }
    let total = per_arm.iter().sum();
    Ok(BoundReport {
        per_arm,
        total,
        constant: c,
        hypothesis_violations: Vec::new(),
    })
}

/// Lower regret envelope at horizon `n`:
/// `(1/4) * (1 / Delta_i) * log(n Delta_i^2 / (k_(i,1/2) log n))` summed
/// over suboptimal arms.
///
/// Its hypothesis asks `n Delta_i^2 / (k_(i,1/2) log n) >= 1` for every
/// suboptimal arm; arms falling short are listed in
/// `hypothesis_violations` and their log is clamped at zero.
pub fn lower_envelope(means: &[f64], n: u64) -> Result<BoundReport> {
    if n < 2 {
        return Err(Error::Config("envelope needs horizon n >= 2".into()));
    }
    let profile = gaps(means)?;
    let n_f = n as f64;
    let ln_n = n_f.ln();
    let mut per_arm = Vec::with_capacity(profile.num_arms());
    let mut violations = Vec::new();
    for (i, &delta) in profile.gaps().iter().enumerate() {
        if delta <= 0.0 {
            per_arm.push(0.0);
            continue;
        }
        let k = effective_arms(&profile, i, 0.5)?;
        let arg = n_f * delta * delta / (k * ln_n);
        if arg < 1.0 {
            violations.push(i);
        }
        per_arm.push(0.25 * arg.ln().max(0.0) / delta);
    }
    let total = per_arm.iter().sum();
    Ok(BoundReport {
        per_arm,
        total,
        constant: 0.25,
        hypothesis_violations: violations,
    })
}

/// `sum_(Delta_i > 0) 2 eta / Delta_i`. Errors when every gap is zero
/// (the slope is then vacuous).
pub fn asymptotic_slope(means: &[f64], eta: f64) -> Result<f64> {
    let profile = gaps(means)?;
    if profile.delta_min().is_none() {
        return Err(Error::Config(
            "asymptotic slope needs at least one positive gap".into(),
        ));
    }
    Ok(profile
        .gaps()
        .iter()
        .filter(|&&d| d > 0.0)
        .map(|&d| 2.0 * eta / d)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gap_hand_values() {
        let p = gaps(&[0.0, -0.3, -0.3]).unwrap();
        assert_eq!(p.gaps(), &[0.0, 0.3, 0.3]);
        assert_eq!(p.delta_min(), Some(0.3));
        assert_eq!(p.delta_max(), 0.3);

        let p = gaps(&[1.0, 1.0]).unwrap();
        assert_eq!(p.gaps(), &[0.0, 0.0]);
        assert_eq!(p.delta_min(), None);
        assert_eq!(p.delta_max(), 0.0);

        let p = gaps(&[0.0, -0.1, -0.4]).unwrap();
        assert_eq!(p.gaps(), &[0.0, 0.1, 0.4]);
        assert_eq!(p.delta_min(), Some(0.1));
        assert_eq!(p.delta_max(), 0.4);

        assert!(gaps(&[1.0]).is_err());
        assert!(gaps(&[0.0, f64::NAN]).is_err());
    }

    #[test]
    fn effective_arms_hand_values() {
        let p = gaps(&[0.0, -0.1, -0.4]).unwrap();
        assert_relative_eq!(effective_arms(&p, 1, 0.5).unwrap(), 2.25, max_relative = 1e-15);
        assert_relative_eq!(effective_arms(&p, 1, 1.0).unwrap(), 2.0625, max_relative = 1e-15);
        assert_relative_eq!(effective_arms(&p, 2, 0.5).unwrap(), 3.0, max_relative = 1e-15);

        // Equal suboptimal gaps: k = K at every rho.
        let means: Vec<f64> = std::iter::once(0.0).chain(vec![-0.3; 9]).collect();
        let p = gaps(&means).unwrap();
        for rho in [0.0, 0.25, 0.5, 0.75, 1.0] {
            assert_relative_eq!(effective_arms(&p, 3, rho).unwrap(), 10.0, max_relative = 1e-15);
        }

        assert!(effective_arms(&p, 0, 0.5).is_err()); // optimal arm
        assert!(effective_arms(&p, 1, 1.5).is_err()); // rho out of range
    }

    #[test]
    fn effective_arms_rho_zero_is_k() {
        let p = gaps(&[0.0, -0.2, -0.9, -0.05]).unwrap();
        for arm in 1..4 {
            assert_eq!(effective_arms(&p, arm, 0.0).unwrap(), 4.0);
        }
    }

    #[test]
    fn upper_envelope_frozen_value() {
        let means: Vec<f64> = std::iter::once(0.0).chain(vec![-0.3; 9]).collect();
        let params = IndexParams::new(2.0, 0.5).unwrap();
        let report = upper_envelope(&means, 10_000, &params, 1.0).unwrap();
        assert_eq!(report.per_arm[0], 0.0);
        assert_relative_eq!(report.per_arm[1], 22.70045492232704, max_relative = 1e-12);
        assert_relative_eq!(report.total, 204.30409430094335, max_relative = 1e-12);
        assert!(report.hypothesis_violations.is_empty());
        assert_relative_eq!(
            report.total,
            report.per_arm.iter().sum::<f64>(),
            max_relative = 1e-15
        );

        let doubled = upper_envelope(&means, 10_000, &params, 2.0).unwrap();
        assert_relative_eq!(doubled.total, 2.0 * report.total, max_relative = 1e-15);
    }

    #[test]
    fn upper_envelope_max_branch_continuity() {
        // Pick Delta so n Delta^2 log(n)/k = log(n): both branches coincide.
        let n = 1000u64;
        let k = 2.0;
        let delta = (k / n as f64).sqrt();
        let means = [0.0, -delta];
        let params = IndexParams::new(2.0, 0.5).unwrap();
        let report = upper_envelope(&means, n, &params, 1.0).unwrap();
        let ln_n = (n as f64).ln();
        let expect = delta + ln_n.ln() / delta;
        assert_relative_eq!(report.per_arm[1], expect, max_relative = 1e-12);
    }

    #[test]
    fn lower_envelope_frozen_value() {
        let means: Vec<f64> = std::iter::once(0.0).chain(vec![-0.3; 9]).collect();
        let report = lower_envelope(&means, 10_000).unwrap();
        assert_relative_eq!(report.per_arm[1], 1.8995690533020153, max_relative = 1e-12);
        assert_relative_eq!(report.total, 17.09612147971814, max_relative = 1e-12);
        assert!(report.hypothesis_violations.is_empty());
        assert_eq!(report.constant, 0.25);
    }

    #[test]
    fn lower_envelope_zero_at_hypothesis_boundary() {
        // n Delta^2 = k log n: the log term vanishes continuously. A hair
        // above the boundary nothing is flagged; a hair below is flagged
        // but still contributes zero (clamped log).
        let n = 1000u64;
        let ln_n = (n as f64).ln();
        let delta = (2.0 * ln_n / n as f64).sqrt();
        let above = lower_envelope(&[0.0, -delta * (1.0 + 1e-9)], n).unwrap();
        assert!(above.per_arm[1].abs() < 1e-8);
        assert!(above.hypothesis_violations.is_empty());
        let below = lower_envelope(&[0.0, -delta * (1.0 - 1e-9)], n).unwrap();
        assert_eq!(below.per_arm[1], 0.0);
        assert_eq!(below.hypothesis_violations, vec![1]);
    }

    #[test]
    fn lower_envelope_flags_violations() {
        // Tiny gap at short horizon: argument < 1.
        let means = [0.0, -0.01];
        let report = lower_envelope(&means, 100).unwrap();
        assert_eq!(report.hypothesis_violations, vec![1]);
        assert_eq!(report.per_arm[1], 0.0); // clamped log
    }

    #[test]
    fn envelopes_monotone_in_n() {
        let means: Vec<f64> = std::iter::once(0.0).chain(vec![-0.3; 9]).collect();
        let params = IndexParams::new(2.0, 0.5).unwrap();
        let mut last_upper = 0.0;
        let mut last_lower = 0.0;
        for n in [1_000u64, 10_000, 100_000, 1_000_000] {
            let up = upper_envelope(&means, n, &params, 1.0).unwrap().total;
            let lo = lower_envelope(&means, n).unwrap().total;
            assert!(up > last_upper);
            assert!(lo > last_lower);
            last_upper = up;
            last_lower = lo;
        }
    }

    #[test]
    fn slope_hand_values() {
        assert_relative_eq!(
            asymptotic_slope(&[0.0, -0.5, -0.25], 2.0).unwrap(),
            24.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            asymptotic_slope(&[0.0, -0.4], 1.0001).unwrap(),
            2.0 * 1.0001 / 0.4,
            max_relative = 1e-15
        );
        // Doubling every gap halves the slope.
        let s1 = asymptotic_slope(&[0.0, -0.2, -0.7], 2.0).unwrap();
        let s2 = asymptotic_slope(&[0.0, -0.4, -1.4], 2.0).unwrap();
        assert_relative_eq!(s2, s1 / 2.0, max_relative = 1e-12);
        assert!(asymptotic_slope(&[0.3, 0.3], 2.0).is_err());
    }
}
