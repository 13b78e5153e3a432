//! Monte Carlo verification of the concentration facts behind the index
//! construction.
//!
//! All checks simulate centred random walks `S_n = X_1 + ... + X_n` with
//! unit-variance noise and compare empirical frequencies or moments against
//! closed-form envelopes:
//!
//! * [`check_maximal`]: `P(exists t <= n: S_t >= eps) <= exp(-eps^2 / (2n))`.
//! * [`estimate_lil_survival`]: the probability that the walk stays below
//!   the iterated-logarithm boundary `sqrt(2 eta n log(max(e, log n)))`
//!   forever is positive and grows with `eta`.
//! * [`estimate_tau_moments`]: moments of the last time the upper
//!   confidence envelope `mu_t + sqrt(2 eta log(b) / t)` sits above `Delta`;
//!   `E[tau] <= sqrt(E[tau^2]) = O(1 + log_+(b) / Delta^2)`.
//! * [`estimate_alpha_beta`]: the discounted crossing weight `alpha` (and
//!   its companion `beta` with `beta log beta = alpha`) measuring how badly
//!   a walk dips below `-Delta` against a cross-arm discount profile;
//!   `Delta * E[alpha]` and `Delta * E[beta]` are bounded by
//!   `C * sum_i min(1/Delta, sqrt(lambda_i))`.
//!
//! Infinite-horizon events are truncated at `cfg.truncation` with a drift
//! certificate: the empirical mean at the truncation point must clear the
//! relevant threshold by six standard errors, otherwise the walk is redrawn
//! on a fresh stream (the redraw rate is reported). Estimates are exact
//! Monte Carlo for certified walks.

use rayon::prelude::*;

use crate::env::{NoiseKind, RngState};
use crate::error::{Error, Result};

/// Redraw budget per replication before declaring the truncation hopeless.
const MAX_REDRAWS: u64 = 64;

/// Shared shape of every Monte Carlo walk experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    /// Walk length N (truncation of the infinite horizon).
    pub truncation: u64,
    /// Number of replications M.
    pub replications: usize,
    pub noise: NoiseKind,
    pub seed: u64,
}

impl WalkConfig {
    fn validate(&self) -> Result<()> {
        if self.truncation < 1 {
            return Err(Error::Config("walk truncation must be at least 1".into()));
        }
        if self.replications < 1 {
            return Err(Error::Config("walk replications must be at least 1".into()));
        }
        Ok(())
    }
}

/// One empirical-vs-analytic comparison with a 4-standard-error tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: String,
    pub estimate: f64,
    pub bound: f64,
    pub stderr: f64,
    pub pass: bool,
}

impl BoundCheck {
    /// Upper-bound direction: pass when `estimate <= bound + 4 stderr`.
    pub fn upper(name: impl Into<String>, estimate: f64, bound: f64, stderr: f64) -> Self {
        BoundCheck {
            name: name.into(),
            estimate,
            bound,
            stderr,
            pass: estimate <= bound + 4.0 * stderr,
        }
    }

    /// Lower-bound direction (used by the survival floor): pass when
    /// `estimate + 4 stderr >= bound`.
    pub fn lower(name: impl Into<String>, estimate: f64, bound: f64, stderr: f64) -> Self {
        BoundCheck {
            name: name.into(),
            estimate,
            bound,
            stderr,
            pass: estimate + 4.0 * stderr >= bound,
        }
    }
}

/// `max(1, log x)`.
pub fn log_plus(x: f64) -> f64 {
    x.ln().max(1.0)
}

fn binomial_stderr(p: f64, m: usize) -> f64 {
    (p * (1.0 - p) / m as f64).sqrt()
}

/// Frequency of `exists t <= n: S_t >= epsilon` over M walks, against the
/// subgaussian maximal bound `exp(-epsilon^2 / (2n))`.
pub fn check_maximal(n: u64, epsilon: f64, cfg: &WalkConfig) -> Result<BoundCheck> {
    cfg.validate()?;
    if !(epsilon > 0.0) {
        return Err(Error::Config(format!("epsilon must be positive (got {epsilon})")));
    }
    let label = format!("conc/maximal/n={n}/eps={epsilon}/noise={:?}", cfg.noise);
    let noise = cfg.noise;
    let crossed: u64 = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngState::derived(cfg.seed, &label, rep, 0).rng();
            let mut sum = 0.0;
            for _ in 0..n {
                sum += noise.sample(&mut rng);
                if sum >= epsilon {
                    return 1u64;
                }
            }
            0u64
        })
        .sum();
    let estimate = crossed as f64 / cfg.replications as f64;
    let bound = (-epsilon * epsilon / (2.0 * n as f64)).exp();
    Ok(BoundCheck::upper(
        label,
        estimate,
        bound,
        binomial_stderr(estimate, cfg.replications),
    ))
}

/// The iterated-logarithm boundary `sqrt(2 eta n log(max(e, log n)))`.
/// At `n = 1` this is `sqrt(2 eta)`.
pub fn lil_boundary(eta: f64, n: u64) -> f64 {
    let n_f = n as f64;
    (2.0 * eta * n_f * n_f.ln().max(std::f64::consts::E).ln()).sqrt()
}

/// Frequency that the walk never exceeds the iterated-logarithm boundary up
/// to the truncation, checked against a configured floor (lower-direction
/// check).
///
/// Truncation makes this an overestimate of the infinite-horizon survival;
/// the boundary grows fast enough that crossings beyond a truncation of
/// 10^4 are negligible for `eta > 1`.
pub fn estimate_lil_survival(eta: f64, floor: f64, cfg: &WalkConfig) -> Result<BoundCheck> {
    cfg.validate()?;
    if !(eta > 1.0) {
        return Err(Error::Config(format!("eta must exceed 1 (got {eta})")));
    }
    if !(0.0..=1.0).contains(&floor) {
        return Err(Error::Config(format!("survival floor must lie in [0, 1] (got {floor})")));
    }
    let n = cfg.truncation;
    let boundary: Vec<f64> = (0..=n).map(|t| lil_boundary(eta, t)).collect();
    let label = format!("conc/lil/eta={eta}/noise={:?}", cfg.noise);
    let noise = cfg.noise;
    let survived: u64 = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngState::derived(cfg.seed, &label, rep, 0).rng();
            let mut sum = 0.0;
            for &bound in &boundary[1..] {
                sum += noise.sample(&mut rng);
                if sum > bound {
                    return 0u64;
                }
            }
            1u64
        })
        .sum();
    let estimate = survived as f64 / cfg.replications as f64;
    Ok(BoundCheck::lower(
        label,
        estimate,
        floor,
        binomial_stderr(estimate, cfg.replications),
    ))
}

/// Monte Carlo moments with their standard errors and the redraw rate of
/// the truncation certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    /// Sample mean of tau.
    pub mean: f64,
    /// sqrt(sample mean of tau^2).
    pub rms: f64,
    pub mean_stderr: f64,
    /// Delta-method standard error of the rms.
    pub rms_stderr: f64,
    /// Redraws per accepted walk.
    pub redraw_rate: f64,
}

/// Envelope shape for the crossing time: `1 + log_+(b) / Delta^2`.
/// Scaled by a fitted constant when used as a bound.
pub fn tau_envelope(delta: f64, b: f64) -> f64 {
    1.0 + log_plus(b) / (delta * delta)
}

/// Moments of `tau = min(n: sup_(t >= n) mu_t + sqrt(2 eta log(b) / t) < Delta)`
/// where `mu_t = S_t / t`.
///
/// Each walk is truncated at `cfg.truncation = N` and certified by
/// `mu_N + 6/sqrt(N) + sqrt(2 eta log(b) / N) < Delta`; uncertified walks
/// are redrawn on fresh streams. Errors when a walk exhausts its redraw
/// budget, which means the truncation is too small for this `(Delta, b)`.
pub fn estimate_tau_moments(
    delta: f64,
    b: f64,
    eta: f64,
    cfg: &WalkConfig,
) -> Result<MomentEstimate> {
    cfg.validate()?;
    if !(delta > 0.0) {
        return Err(Error::Config(format!("delta must be positive (got {delta})")));
    }
    if !(b > 1.0) {
        return Err(Error::Config(format!("b must exceed 1 (got {b})")));
    }
    if !(eta > 1.0) {
        return Err(Error::Config(format!("eta must exceed 1 (got {eta})")));
    }
    let n = cfg.truncation;
    let n_f = n as f64;
    let two_eta_log_b = 2.0 * eta * b.ln();
    // Violation at t iff S_t >= t (Delta - bonus_t); precomputed thresholds.
    let thresholds: Vec<f64> = (0..=n)
        .map(|t| {
            let t_f = t as f64;
            t_f * (delta - (two_eta_log_b / t_f).sqrt())
        })
        .collect();
    let cert_threshold = n_f * (delta - (two_eta_log_b / n_f).sqrt() - 6.0 / n_f.sqrt());
    let label = format!("conc/tau/delta={delta}/b={b}/eta={eta}/noise={:?}", cfg.noise);
    let noise = cfg.noise;
    let walks: Result<Vec<(u64, u64)>> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| {
            for attempt in 0..MAX_REDRAWS {
                let mut rng = RngState::derived(cfg.seed, &label, rep, attempt).rng();
                let mut sum = 0.0;
                let mut last_violation = 0u64;
                for (t, &threshold) in thresholds.iter().enumerate().skip(1) {
                    sum += noise.sample(&mut rng);
                    if sum >= threshold {
                        last_violation = t as u64;
                    }
                }
                if sum < cert_threshold {
                    return Ok((last_violation + 1, attempt));
                }
            }
            Err(Error::Config(format!(
                "truncation {n} never certifies for delta={delta}, b={b}, eta={eta} \
                 after {MAX_REDRAWS} redraws; increase truncation"
            )))
        })
        .collect();
    let walks = walks?;

    let m = walks.len() as f64;
    let mut sum_tau = 0.0;
    let mut sum_sq = 0.0;
    let mut redraws = 0u64;
    for &(tau, attempts) in &walks {
        let tau_f = tau as f64;
        sum_tau += tau_f;
        sum_sq += tau_f * tau_f;
        redraws += attempts;
    }
    let mean = sum_tau / m;
    let mean_sq = sum_sq / m;
    let rms = mean_sq.sqrt();
    let mut var = 0.0;
    let mut var_sq = 0.0;
    for &(tau, _) in &walks {
        let tau_f = tau as f64;
        let d = tau_f - mean;
        var += d * d;
        let dq = tau_f * tau_f - mean_sq;
        var_sq += dq * dq;
    }
    let (mean_stderr, rms_stderr) = if walks.len() >= 2 {
        let denom = m - 1.0;
        let std = (var / denom).sqrt();
        let std_sq = (var_sq / denom).sqrt();
        (std / m.sqrt(), std_sq / (2.0 * rms * m.sqrt()))
    } else {
        (0.0, 0.0)
    };
    Ok(MomentEstimate {
        mean,
        rms,
        mean_stderr,
        rms_stderr,
        redraw_rate: redraws as f64 / m,
    })
}

/// Bound checks built from one tau-moment run: Jensen
/// (`mean <= rms`, exact) plus both moments against the fitted envelope
/// `c_fit * (1 + log_+(b) / Delta^2)`.
pub fn tau_checks(
    delta: f64,
    b: f64,
    eta: f64,
    c_fit: f64,
    cfg: &WalkConfig,
) -> Result<Vec<BoundCheck>> {
    if !(c_fit > 0.0) {
        return Err(Error::Config(format!("c_fit must be positive (got {c_fit})")));
    }
    let est = estimate_tau_moments(delta, b, eta, cfg)?;
    let envelope = c_fit * tau_envelope(delta, b);
    let tag = format!("delta={delta}/b={b}/eta={eta}");
    Ok(vec![
        BoundCheck::upper(format!("tau-jensen/{tag}"), est.mean, est.rms, 0.0),
        BoundCheck::upper(format!("tau-mean-envelope/{tag}"), est.mean, envelope, est.mean_stderr),
        BoundCheck::upper(format!("tau-rms-envelope/{tag}"), est.rms, envelope, est.rms_stderr),
    ])
}

/// Envelope shape for the discounted crossing weights:
/// `sum_i min(1 / Delta, sqrt(lambda_i))`. Applies to `Delta * E[alpha]`
/// for `rho` in (1/2, 1] and to `Delta * E[beta]` for `rho` in [1/2, 1].
pub fn alpha_beta_envelope(delta: f64, lambdas: &[f64]) -> f64 {
    lambdas.iter().map(|&l| (1.0 / delta).min(l.sqrt())).sum()
}

/// Discount profile `D(s) = sum_i min(s, lambda_i^rho * s^(1 - rho))`.
///
/// `lambda_i = +inf` contributes `s` for every rho (for `rho > 0` the
/// product is infinite, for `rho = 0` it is `1 * s^1 = s`; both give `s`
/// after the min).
fn discount_sum(s: f64, lambda_pow: &[f64], comp_exp: f64) -> f64 {
    let s_comp = s.powf(comp_exp);
    lambda_pow.iter().map(|&lp| s.min(lp * s_comp)).sum()
}

/// Closed-form `alpha` of one fixed sequence of running means: the max over
/// violating times `s` (those with `mu_s < -Delta`) of
/// `D(s) * exp(s (-Delta - mu_s)^2 / (2 eta))`, or 0 when nothing violates.
///
/// This is the smallest weight `alpha` for which the discounted confidence
/// floor `mu_s + sqrt((2 eta / s) log(max(1, alpha / D(s)))) >= -Delta`
/// holds at every `s`.
pub fn alpha_exact(
    running_means: &[f64],
    delta: f64,
    rho: f64,
    lambdas: &[f64],
    eta: f64,
) -> f64 {
    let lambda_pow: Vec<f64> = lambdas.iter().map(|&l| l.powf(rho)).collect();
    let comp_exp = 1.0 - rho;
    let mut alpha = 0.0f64;
    for (idx, &mu) in running_means.iter().enumerate() {
        if mu < -delta {
            let s = (idx + 1) as f64;
            let depth = -delta - mu;
            let d = discount_sum(s, &lambda_pow, comp_exp);
            alpha = alpha.max(d * (s * depth * depth / (2.0 * eta)).exp());
        }
    }
    alpha
}

/// The root `beta >= 1` of `beta log(beta) = alpha` (bisection), with
/// `beta = 0` for `alpha = 0`.
///
/// `x log x` is 0 at both x = 0 and x = 1; taking 0 at `alpha = 0` matches
/// the infimum over x >= 0, and the x >= 1 branch is the one on which
/// `x log x` is increasing, so the root is unique there. Bisection stops at
/// floating-point convergence (midpoint equal to an endpoint), which is
/// finer than 1e-12 relative wherever f64 can express it.
pub fn beta_from_alpha(alpha: f64) -> f64 {
    assert!(alpha >= 0.0 && alpha.is_finite(), "alpha must be finite and nonnegative");
    if alpha == 0.0 {
        return 0.0;
    }
    let mut lo = 1.0f64;
    let mut hi = alpha.max(std::f64::consts::E);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mid * mid.ln() < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Monte Carlo estimates of the discounted crossing weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaBetaEstimate {
    pub alpha_mean: f64,
    pub alpha_stderr: f64,
    pub beta_mean: f64,
    pub beta_stderr: f64,
    /// Fraction of walks that dipped below `-Delta` at least once.
    pub violation_rate: f64,
    /// Redraws per accepted walk.
    pub redraw_rate: f64,
}

/// Per-walk `alpha` (closed form over the truncated horizon) and
/// `beta = beta_from_alpha(alpha)`, averaged over M certified walks.
///
/// Certification: `mu_N >= -Delta + 6/sqrt(N)`, i.e. the mean has drifted
/// safely above the crossing level by the truncation point; uncertified
/// walks are redrawn. `lambdas` entries live in [1, +inf]; +inf is allowed
/// and contributes `min(s, inf) = s` to the discount profile.
///
/// Note the alpha tail is heavy (tail index `2 eta / (1 + eta)` < 2), so
/// means converge but sample standard errors understate the fluctuation of
/// extreme draws; bound constants fitted against these estimates need slack.
pub fn estimate_alpha_beta(
    delta: f64,
    rho: f64,
    lambdas: &[f64],
    eta: f64,
    cfg: &WalkConfig,
) -> Result<AlphaBetaEstimate> {
    cfg.validate()?;
    if !(delta > 0.0) {
        return Err(Error::Config(format!("delta must be positive (got {delta})")));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Config(format!("rho must lie in [0, 1] (got {rho})")));
    }
    if !(eta > 1.0) {
        return Err(Error::Config(format!("eta must exceed 1 (got {eta})")));
    }
    if lambdas.is_empty() {
        return Err(Error::Config("lambdas must be nonempty".into()));
    }
    if lambdas.iter().any(|&l| !(l >= 1.0)) {
        return Err(Error::Config(format!(
            "lambda entries must lie in [1, +inf] (got {lambdas:?})"
        )));
    }
    let n = cfg.truncation;
    let n_f = n as f64;
    let lambda_pow: Vec<f64> = lambdas.iter().map(|&l| l.powf(rho)).collect();
    let comp_exp = 1.0 - rho;
    let two_eta = 2.0 * eta;
    let cert_threshold = n_f * (-delta + 6.0 / n_f.sqrt());
    let label = format!(
        "conc/alpha-beta/delta={delta}/rho={rho}/eta={eta}/lambdas={lambdas:?}/noise={:?}",
        cfg.noise
    );
    let noise = cfg.noise;
    let walks: Result<Vec<(f64, f64, u64)>> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| {
            for attempt in 0..MAX_REDRAWS {
                let mut rng = RngState::derived(cfg.seed, &label, rep, attempt).rng();
                let mut sum = 0.0;
                let mut alpha = 0.0f64;
                for t in 1..=n {
                    let t_f = t as f64;
                    sum += noise.sample(&mut rng);
                    if sum < -delta * t_f {
                        let depth = -delta - sum / t_f;
                        let d = discount_sum(t_f, &lambda_pow, comp_exp);
                        alpha = alpha.max(d * (t_f * depth * depth / two_eta).exp());
                    }
                }
                if sum >= cert_threshold {
                    return Ok((alpha, beta_from_alpha(alpha), attempt));
                }
            }
            Err(Error::Config(format!(
                "truncation {n} never certifies for delta={delta} after {MAX_REDRAWS} \
                 redraws; increase truncation"
            )))
        })
        .collect();
    let walks = walks?;

    let m = walks.len() as f64;
    let mut sum_alpha = 0.0;
    let mut sum_beta = 0.0;
    let mut violations = 0u64;
    let mut redraws = 0u64;
    for &(alpha, beta, attempts) in &walks {
        sum_alpha += alpha;
        sum_beta += beta;
        if alpha > 0.0 {
            violations += 1;
        }
        redraws += attempts;
    }
    let alpha_mean = sum_alpha / m;
    let beta_mean = sum_beta / m;
    let mut var_alpha = 0.0;
    let mut var_beta = 0.0;
    for &(alpha, beta, _) in &walks {
        let da = alpha - alpha_mean;
        let db = beta - beta_mean;
        var_alpha += da * da;
        var_beta += db * db;
    }
    let (alpha_stderr, beta_stderr) = if walks.len() >= 2 {
        let denom = (m - 1.0) * m;
        ((var_alpha / denom).sqrt(), (var_beta / denom).sqrt())
    } else {
        (0.0, 0.0)
    };
    Ok(AlphaBetaEstimate {
        alpha_mean,
        alpha_stderr,
        beta_mean,
        beta_stderr,
        violation_rate: violations as f64 / m,
        redraw_rate: redraws as f64 / m,
    })
}

/// Bound checks built from one alpha-beta run: `Delta * mean(alpha)` (for
/// `rho > 1/2`) and `Delta * mean(beta)` (for `rho >= 1/2`) against their
/// fitted envelopes. At `rho = 1/2` only the beta check applies.
pub fn alpha_beta_checks(
    delta: f64,
    rho: f64,
    lambdas: &[f64],
    eta: f64,
    c_fit_alpha: f64,
    c_fit_beta: f64,
    cfg: &WalkConfig,
) -> Result<Vec<BoundCheck>> {
    if !(rho >= 0.5) {
        return Err(Error::Config(format!(
            "alpha-beta envelope requires rho in [1/2, 1] (got {rho})"
        )));
    }
    if !(c_fit_alpha > 0.0) || !(c_fit_beta > 0.0) {
        return Err(Error::Config("fitted constants must be positive".into()));
    }
    let est = estimate_alpha_beta(delta, rho, lambdas, eta, cfg)?;
    let envelope = alpha_beta_envelope(delta, lambdas);
    let tag = format!("delta={delta}/rho={rho}/eta={eta}");
    let mut checks = Vec::new();
    if rho > 0.5 {
        checks.push(BoundCheck::upper(
            format!("alpha-envelope/{tag}"),
            delta * est.alpha_mean,
            c_fit_alpha * envelope,
            delta * est.alpha_stderr,
        ));
    }
    checks.push(BoundCheck::upper(
        format!("beta-envelope/{tag}"),
        delta * est.beta_mean,
        c_fit_beta * envelope,
        delta * est.beta_stderr,
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn cfg(truncation: u64, replications: usize, seed: u64) -> WalkConfig {
        WalkConfig {
            truncation,
            replications,
            noise: NoiseKind::Gaussian,
            seed,
        }
    }

    #[test]
    fn bound_check_directions() {
        assert!(BoundCheck::upper("x", 0.5, 0.6, 0.0).pass);
        assert!(BoundCheck::upper("x", 0.7, 0.6, 0.03).pass); // within 4 stderr
        assert!(!BoundCheck::upper("x", 0.8, 0.6, 0.03).pass);
        assert!(BoundCheck::lower("x", 0.5, 0.4, 0.0).pass);
        assert!(BoundCheck::lower("x", 0.3, 0.4, 0.03).pass);
        assert!(!BoundCheck::lower("x", 0.2, 0.4, 0.03).pass);
    }

    #[test]
    fn maximal_bound_values_and_verdicts() {
        let c = cfg(50, 20_000, 101);
        let check = check_maximal(50, 10.0, &c).unwrap();
        assert_relative_eq!(check.bound, 0.36787944117144233, max_relative = 1e-15);
        assert!(check.pass, "{check:?}");
        // True crossing probability is about 2 Phi(-10 / sqrt(50)) = 0.157.
        assert!(check.estimate > 0.1 && check.estimate < 0.25, "{check:?}");

        let c = cfg(100, 20_000, 102);
        let check = check_maximal(100, 30.0, &c).unwrap();
        assert_relative_eq!(check.bound, 0.011108996538242306, max_relative = 1e-15);
        assert!(check.pass, "{check:?}");
        assert!(check.estimate < 0.01, "{check:?}");
    }

    #[test]
    fn maximal_is_deterministic() {
        let c = cfg(200, 5_000, 7);
        let a = check_maximal(200, 15.0, &c).unwrap();
        let b = check_maximal(200, 15.0, &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn maximal_rejects_bad_epsilon() {
        assert!(check_maximal(10, 0.0, &cfg(10, 10, 0)).is_err());
    }

    #[test]
    fn maximal_vacuous_at_tiny_epsilon() {
        let check = check_maximal(10, 1e-9, &cfg(10, 2_000, 4)).unwrap();
        assert!(check.bound > 0.999_999);
        assert!(check.pass, "{check:?}");
    }

    #[test]
    fn lil_boundary_at_one_is_sqrt_2eta() {
        assert_relative_eq!(lil_boundary(2.0, 1), 2.0, max_relative = 1e-15);
        assert_relative_eq!(lil_boundary(1.5, 1), 3.0f64.sqrt(), max_relative = 1e-15);
        // Once log n exceeds e the inner max switches branch.
        let n = 20u64; // ln 20 = 3.0 > e
        let expect = (2.0 * 2.0 * 20.0 * (20f64).ln().ln()).sqrt();
        assert_relative_eq!(lil_boundary(2.0, n), expect, max_relative = 1e-15);
    }

    #[test]
    fn lil_survival_sane_at_large_eta() {
        let check = estimate_lil_survival(10.0, 0.5, &cfg(10_000, 2_000, 5)).unwrap();
        assert!(check.estimate >= 0.5, "{check:?}");
        assert!(check.pass);
    }

    #[test]
    fn tau_envelope_values() {
        assert_relative_eq!(tau_envelope(1.0, E * E), 3.0, max_relative = 1e-15);
        // log_+ clamps at 1 below b = e.
        assert_relative_eq!(tau_envelope(1.0, E.sqrt()), 2.0, max_relative = 1e-15);
        assert_relative_eq!(tau_envelope(0.5, E * E), 9.0, max_relative = 1e-15);
    }

    #[test]
    fn tau_moments_jensen_and_scale() {
        let est = estimate_tau_moments(1.0, E * E, 2.0, &cfg(2_000, 500, 21)).unwrap();
        assert!(est.mean <= est.rms, "{est:?}");
        assert!(est.mean >= 1.0);
        assert!(est.redraw_rate < 0.01, "{est:?}");
        // Crude sanity: within a generous constant of the envelope shape.
        assert!(est.rms <= 30.0 * tau_envelope(1.0, E * E), "{est:?}");
    }

    #[test]
    fn tau_quarter_delta_quadruples_moments() {
        // The 1/Delta^2 scaling: halving Delta at b = e roughly quadruples
        // the moments (within 25%).
        let coarse = estimate_tau_moments(1.0, E, 2.0, &cfg(1_000, 2_000, 77)).unwrap();
        let fine = estimate_tau_moments(0.5, E, 2.0, &cfg(1_000, 2_000, 77)).unwrap();
        let ratio = fine.mean / coarse.mean;
        assert!(
            (3.0..=5.0).contains(&ratio),
            "mean ratio {ratio} outside 4x +/- 25% ({coarse:?} vs {fine:?})"
        );
    }

    #[test]
    fn tau_checks_compose_estimates() {
        let c = cfg(1_000, 400, 13);
        let checks = tau_checks(1.0, E * E, 2.0, 50.0, &c).unwrap();
        assert_eq!(checks.len(), 3);
        assert!(checks[0].name.starts_with("tau-jensen/"));
        assert!(checks.iter().all(|ch| ch.pass), "{checks:?}");
        assert!(tau_checks(1.0, E, 2.0, 0.0, &c).is_err());
    }

    #[test]
    fn alpha_beta_checks_respect_rho_ranges() {
        let c = cfg(500, 200, 19);
        let lambdas = [1.0, f64::INFINITY];
        let at_half = alpha_beta_checks(0.5, 0.5, &lambdas, 2.0, 100.0, 100.0, &c).unwrap();
        assert_eq!(at_half.len(), 1);
        assert!(at_half[0].name.starts_with("beta-envelope/"));
        let above = alpha_beta_checks(0.5, 0.75, &lambdas, 2.0, 100.0, 100.0, &c).unwrap();
        assert_eq!(above.len(), 2);
        assert!(above[0].name.starts_with("alpha-envelope/"));
        assert!(alpha_beta_checks(0.5, 0.4, &lambdas, 2.0, 1.0, 1.0, &c).is_err());
    }

    #[test]
    fn tau_truncation_too_small_errors() {
        // bonus at N=100 is sqrt(2*2*4/100) = 0.4 >> delta, certification
        // would need a -9.5 sigma sample mean.
        let err = estimate_tau_moments(0.05, E.powi(4), 2.0, &cfg(100, 50, 3)).unwrap_err();
        assert!(err.to_string().contains("increase truncation"), "{err}");
    }

    #[test]
    fn alpha_beta_envelope_values() {
        assert_relative_eq!(
            alpha_beta_envelope(0.5, &[1.0, 4.0, f64::INFINITY]),
            5.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(alpha_beta_envelope(2.0, &[9.0]), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn beta_inverts_alpha() {
        assert_eq!(beta_from_alpha(0.0), 0.0);
        assert_relative_eq!(beta_from_alpha(E), E, max_relative = 1e-12);
        for alpha in [0.2, 0.9, 1.0, 2.0, E, 10.0, 123.0, 1e5, 1e18, 1e300] {
            let beta = beta_from_alpha(alpha);
            assert!(beta >= 1.0);
            assert_relative_eq!(beta * beta.ln(), alpha, max_relative = 1e-9);
        }
    }

    #[test]
    fn alpha_exact_hand_cases() {
        // No violation: alpha = 0.
        assert_eq!(alpha_exact(&[0.3, -0.1, 0.0], 0.5, 0.75, &[1.0], 2.0), 0.0);
        // Single violation at s = 1 with depth 0.5: D(1) = 1,
        // exp(1 * 0.25 / 4) = exp(0.0625).
        let a = alpha_exact(&[-1.0, 0.0], 0.5, 1.0, &[1.0], 2.0);
        assert_relative_eq!(a, 0.0625f64.exp(), max_relative = 1e-14);
        // Infinite lambda contributes s to the discount profile.
        let a = alpha_exact(&[-1.0], 0.5, 0.75, &[f64::INFINITY, f64::INFINITY], 2.0);
        assert_relative_eq!(a, 2.0 * 0.0625f64.exp(), max_relative = 1e-14);
    }

    /// Independent route: find the smallest `a` satisfying the discounted
    /// confidence floor by scanning a dense geometric-then-linear grid.
    fn brute_alpha(means: &[f64], delta: f64, rho: f64, lambdas: &[f64], eta: f64) -> f64 {
        let lambda_pow: Vec<f64> = lambdas.iter().map(|&l| l.powf(rho)).collect();
        let condition = |a: f64| -> bool {
            means.iter().enumerate().all(|(idx, &mu)| {
                if mu >= -delta {
                    return true;
                }
                let s = (idx + 1) as f64;
                let d = discount_sum(s, &lambda_pow, 1.0 - rho);
                let radical = (2.0 * eta / s) * (a / d).max(1.0).ln();
                mu + radical.sqrt() >= -delta
            })
        };
        if condition(0.0) {
            return 0.0;
        }
        let mut hi = 1e-6;
        while !condition(hi) {
            hi *= 1.05;
            assert!(hi < 1e200, "brute-force scan diverged");
        }
        // Refine the last 5% bracket with a fine linear grid.
        let mut a = hi / 1.05;
        let step = a * 1e-7;
        while !condition(a) {
            a += step;
        }
        a
    }

    #[test]
    fn alpha_matches_brute_force_scan() {
        let walks: &[&[f64]] = &[
            &[-1.0, -0.6, 0.2],
            &[-0.4, -0.9, -0.35, 0.0, -0.5],
            &[0.1, -0.45, -0.31, -0.6],
            &[-2.0],
            &[-0.301, -0.6, -0.2, -0.9, 0.4, -0.5, -0.45],
        ];
        let lambda_sets: &[&[f64]] = &[&[1.0], &[1.0, 4.0, f64::INFINITY], &[2.5, 2.5]];
        for &means in walks {
            for &lambdas in lambda_sets {
                for rho in [0.6, 0.75, 1.0] {
                    for delta in [0.3, 1.0] {
                        let exact = alpha_exact(means, delta, rho, lambdas, 2.0);
                        let brute = brute_alpha(means, delta, rho, lambdas, 2.0);
                        if exact == 0.0 {
                            assert_eq!(brute, 0.0);
                        } else {
                            assert_relative_eq!(exact, brute, max_relative = 1e-6);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_beta_walks_deterministic_and_consistent() {
        let c = cfg(2_000, 300, 33);
        let a = estimate_alpha_beta(0.5, 0.75, &[1.0, f64::INFINITY], 2.0, &c).unwrap();
        let b = estimate_alpha_beta(0.5, 0.75, &[1.0, f64::INFINITY], 2.0, &c).unwrap();
        assert_eq!(a, b);
        assert!(a.alpha_mean >= 0.0);
        assert!(a.beta_mean >= 0.0);
        assert!(a.violation_rate > 0.0 && a.violation_rate < 1.0, "{a:?}");
        assert!(a.redraw_rate < 0.05);
    }

    #[test]
    fn alpha_beta_rejects_bad_lambdas() {
        let c = cfg(100, 10, 0);
        assert!(estimate_alpha_beta(0.5, 0.75, &[0.5], 2.0, &c).is_err());
        assert!(estimate_alpha_beta(0.5, 0.75, &[], 2.0, &c).is_err());
        assert!(estimate_alpha_beta(0.5, 1.5, &[1.0], 2.0, &c).is_err());
    }

    #[test]
    fn walks_without_violation_have_zero_weights() {
        // Enormous delta: no walk of length 50 dips below -40.
        let est = estimate_alpha_beta(40.0, 0.75, &[1.0], 2.0, &cfg(50, 100, 9)).unwrap();
        assert_eq!(est.alpha_mean, 0.0);
        assert_eq!(est.beta_mean, 0.0);
        assert_eq!(est.violation_rate, 0.0);
    }
}
