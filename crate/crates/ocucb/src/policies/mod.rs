//! Index policies behind one select/observe interface.
//!
//! Four policies share the loop "play each arm once, then play the argmax
//! of a per-arm index":
//!
//! * OCUCB-n: `mu_i + sqrt(2 eta log(B_i) / T_i)` with the data-dependent
//!   confidence level `B_i = max(e, log t, t log t / D_i)`, where `D_i`
//!   compares this arm's pull count against every other arm's
//!   ([`DenominatorAccumulator`]).
//! * KL-UCB+: `mu_i + sqrt((2 eta / T_i) max(0, log(t / T_i)))`.
//! * UCB1: `mu_i + sqrt(2 eta log(t) / T_i)`.
//! * MOSS: OCUCB-n with `rho = 0`, where `D_i` collapses to `K T_i`.
//!
//! The pure index formulas are exposed as free functions on plain numbers;
//! [`PolicyState`] wires them to incrementally-maintained statistics.

mod accumulator;

pub use accumulator::DenominatorAccumulator;

use serde::{Deserialize, Serialize};
use std::f64::consts::E;
use std::fmt;

use crate::error::{Error, Result};

/// Which index rule a [`PolicyState`] plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Ocucb,
    KlUcbPlus,
    Ucb1,
    Moss,
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PolicyKind::Ocucb => "ocucb",
            PolicyKind::KlUcbPlus => "klucb-plus",
            PolicyKind::Ucb1 => "ucb1",
            PolicyKind::Moss => "moss",
        };
        f.write_str(s)
    }
}

/// The two tunables of the OCUCB-n index (`eta` is shared by all four
/// policies; `rho` and `drop_log_factors` only affect OCUCB-n/MOSS).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexParams {
    /// Confidence scale; strictly greater than 1.
    pub eta: f64,
    /// Cross-arm comparison exponent in [0, 1]. The regret guarantee covers
    /// [1/2, 1]; smaller values are allowed (rho = 0 recovers MOSS) but are
    /// outside the analyzed regime, see [`IndexParams::rho_outside_analyzed_range`].
    pub rho: f64,
    /// Replaces `B_i = max(e, log t, t log t / D_i)` with the leaner
    /// `max(e, t / D_i)`. Off by default.
    #[serde(default)]
    pub drop_log_factors: bool,
}

impl IndexParams {
    pub fn new(eta: f64, rho: f64) -> Result<Self> {
        let params = IndexParams { eta, rho, drop_log_factors: false };
        params.validate()?;
        Ok(params)
    }

    pub fn with_drop_log_factors(mut self, drop: bool) -> Self {
        self.drop_log_factors = drop;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 1.0) {
            return Err(Error::Config(format!(
                "eta must exceed 1 (got {})",
                self.eta
            )));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::Config(format!(
                "rho must lie in [0, 1] (got {})",
                self.rho
            )));
        }
        Ok(())
    }

    /// True when `rho < 1/2`, i.e. outside the range the finite-time regret
    /// envelope covers. Such runs are legal but the envelope comparisons do
    /// not apply to them.
    pub fn rho_outside_analyzed_range(&self) -> bool {
        self.rho < 0.5
    }
}

/// Direct O(K) evaluation of `sum_j min(T_i, T_j^rho * T_i^(1-rho))`.
///
/// Reference semantics for the incremental [`DenominatorAccumulator`]; also
/// handy for one-off index computations outside an episode loop.
pub fn ocucb_denominator(counts: &[u64], i: usize, rho: f64) -> f64 {
    let ti = counts[i] as f64;
    let comp = ti.powf(1.0 - rho);
    counts
        .iter()
        .map(|&tj| ti.min((tj as f64).powf(rho) * comp))
        .sum()
}

#[inline]
fn ocucb_b_with_ln(t: f64, ln_t: f64, denominator: f64, drop_log_factors: bool) -> f64 {
    if drop_log_factors {
        E.max(t / denominator)
    } else {
        E.max(ln_t).max(t * ln_t / denominator)
    }
}

/// Confidence level `B = max(e, log t, t log t / denominator)`, or
/// `max(e, t / denominator)` when `drop_log_factors` is set. Always >= e in
/// the default form, >= e in the lean form too, so `log B >= 1`.
pub fn ocucb_b(t: f64, denominator: f64, drop_log_factors: bool) -> f64 {
    ocucb_b_with_ln(t, t.ln(), denominator, drop_log_factors)
}

/// `mean + sqrt(2 eta log(b) / pulls)`.
#[inline]
pub fn ocucb_index(mean: f64, pulls: u64, b: f64, eta: f64) -> f64 {
    mean + (2.0 * eta * b.ln() / pulls as f64).sqrt()
}

/// `mean + sqrt((2 eta / pulls) * max(0, log(t / pulls)))`.
///
/// The log is clamped at zero so the index is defined when `pulls = t`
/// (where it degenerates to the empirical mean).
#[inline]
pub fn klucb_plus_index(mean: f64, pulls: u64, t: f64, eta: f64) -> f64 {
    let pulls = pulls as f64;
    mean + ((2.0 * eta / pulls) * (t / pulls).ln().max(0.0)).sqrt()
}

/// `mean + sqrt(2 eta log(t) / pulls)`.
#[inline]
pub fn ucb1_index(mean: f64, pulls: u64, t: f64, eta: f64) -> f64 {
    mean + ((2.0 * eta / pulls as f64) * t.ln()).sqrt()
}

/// OCUCB-n index at `rho = 0`, where the denominator is exactly
/// `num_arms * pulls`.
#[inline]
pub fn moss_index(mean: f64, pulls: u64, t: f64, num_arms: usize, eta: f64) -> f64 {
    let denominator = pulls as f64 * num_arms as f64;
    ocucb_index(mean, pulls, ocucb_b(t, denominator, false), eta)
}

/// Sufficient statistics of one episode: round counter, per-arm pull counts
/// and reward sums, plus the incremental denominator structure.
///
/// The round counter `t` is 1-based and names the round about to be played:
/// after `t - 1` observations, `sum_i T_i = t - 1`.
#[derive(Debug, Clone)]
pub struct PolicyState {
    policy: PolicyKind,
    params: IndexParams,
    t: u64,
    pulls: Vec<u64>,
    reward_sums: Vec<f64>,
    accumulator: DenominatorAccumulator,
}

impl PolicyState {
    /// MOSS stores `rho = 0` regardless of the configured value, which makes
    /// it the exact same computation as OCUCB-n at `rho = 0`.
    pub fn new(policy: PolicyKind, params: IndexParams, num_arms: usize) -> Result<Self> {
        params.validate()?;
        if num_arms == 0 {
            return Err(Error::Config("policy needs at least one arm".into()));
        }
        let effective = match policy {
            PolicyKind::Moss => IndexParams { rho: 0.0, ..params },
            _ => params,
        };
        Ok(PolicyState {
            policy,
            params: effective,
            t: 1,
            pulls: vec![0; num_arms],
            reward_sums: vec![0.0; num_arms],
            accumulator: DenominatorAccumulator::new(num_arms, effective.rho),
        })
    }

    pub fn policy(&self) -> PolicyKind {
        self.policy
    }

    pub fn params(&self) -> &IndexParams {
        &self.params
    }

    /// The round about to be played (1-based).
    pub fn round(&self) -> u64 {
        self.t
    }

    pub fn num_arms(&self) -> usize {
        self.pulls.len()
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn reward_sums(&self) -> &[f64] {
        &self.reward_sums
    }

    /// Defined only after the arm has been pulled at least once.
    pub fn empirical_mean(&self, arm: usize) -> f64 {
        debug_assert!(self.pulls[arm] > 0, "empirical mean of an unpulled arm");
        self.reward_sums[arm] / self.pulls[arm] as f64
    }

    /// `sum_j min(T_arm, T_j^rho * T_arm^(1-rho))` from the accumulator.
    pub fn ocucb_denominator(&self, arm: usize) -> f64 {
        self.accumulator.query(arm)
    }

    pub fn ocucb_b(&self, arm: usize) -> f64 {
        ocucb_b(
            self.t as f64,
            self.ocucb_denominator(arm),
            self.params.drop_log_factors,
        )
    }

    pub fn ocucb_index(&self, arm: usize) -> f64 {
        ocucb_index(
            self.empirical_mean(arm),
            self.pulls[arm],
            self.ocucb_b(arm),
            self.params.eta,
        )
    }

    pub fn klucb_plus_index(&self, arm: usize) -> f64 {
        klucb_plus_index(
            self.empirical_mean(arm),
            self.pulls[arm],
            self.t as f64,
            self.params.eta,
        )
    }

    pub fn ucb1_index(&self, arm: usize) -> f64 {
        ucb1_index(
            self.empirical_mean(arm),
            self.pulls[arm],
            self.t as f64,
            self.params.eta,
        )
    }

    pub fn moss_index(&self, arm: usize) -> f64 {
        moss_index(
            self.empirical_mean(arm),
            self.pulls[arm],
            self.t as f64,
            self.pulls.len(),
            self.params.eta,
        )
    }

    /// The configured policy's index for one arm. Requires `T_arm >= 1`.
    pub fn index(&self, arm: usize) -> f64 {
        match self.policy {
            PolicyKind::Ocucb | PolicyKind::Moss => self.ocucb_index(arm),
            PolicyKind::KlUcbPlus => self.klucb_plus_index(arm),
            PolicyKind::Ucb1 => self.ucb1_index(arm),
        }
    }

    /// Forced round-robin while `t <= K` (arm `t - 1`), then the index
    /// argmax with ties broken toward the lowest arm index.
    pub fn select_arm(&self) -> usize {
        let k = self.pulls.len();
        if self.t <= k as u64 {
            return (self.t - 1) as usize;
        }
        let t_f = self.t as f64;
        let ln_t = t_f.ln();
        let eta = self.params.eta;
        let mut best = 0usize;
        let mut best_value = f64::NEG_INFINITY;
        match self.policy {
            PolicyKind::Ocucb | PolicyKind::Moss => {
                let drop = self.params.drop_log_factors;
                for arm in 0..k {
                    let b = ocucb_b_with_ln(t_f, ln_t, self.accumulator.query(arm), drop);
                    let value = ocucb_index(self.empirical_mean(arm), self.pulls[arm], b, eta);
                    if value > best_value {
                        best_value = value;
                        best = arm;
                    }
                }
            }
            PolicyKind::KlUcbPlus => {
                for arm in 0..k {
                    let value =
                        klucb_plus_index(self.empirical_mean(arm), self.pulls[arm], t_f, eta);
                    if value > best_value {
                        best_value = value;
                        best = arm;
                    }
                }
            }
            PolicyKind::Ucb1 => {
                for arm in 0..k {
                    let value = ucb1_index(self.empirical_mean(arm), self.pulls[arm], t_f, eta);
                    if value > best_value {
                        best_value = value;
                        best = arm;
                    }
                }
            }
        }
        best
    }

    /// Record one (arm, reward) observation and advance the round counter.
    ///
    /// Panics if `arm` is out of range.
    pub fn observe(&mut self, arm: usize, reward: f64) {
        assert!(arm < self.pulls.len(), "arm {arm} out of range");
        self.pulls[arm] += 1;
        self.reward_sums[arm] += reward;
        self.accumulator.increment(arm);
        self.t += 1;
    }
}
