//! Seeded episode and experiment runners.
//!
//! Regret is pseudo-regret: each round adds `mu* - mu_chosen` using the true
//! means, never the sampled rewards, which matches the quantity the bounds
//! speak about and removes most Monte Carlo variance.
//!
//! Determinism: replication `r` of policy `id` draws from the stream hashed
//! from `(master_seed, id, r)`, so results do not depend on scheduling, on
//! the number of worker threads, or on which other policies are present.
//! Aggregation reduces the collected trajectories sequentially in
//! replication order, so parallel and serial runs are bit-identical.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{BanditInstance, RngState};
use crate::error::{Error, Result};
use crate::policies::{IndexParams, PolicyKind, PolicyState};

/// Cumulative pseudo-regret of one episode, sampled at checkpoint rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrajectory {
    /// Strictly increasing round indices in `[1, n]`.
    pub checkpoints: Vec<u64>,
    /// Cumulative pseudo-regret after each checkpoint round; nondecreasing.
    pub regret: Vec<f64>,
    /// The stream the episode consumed.
    pub rng_state: RngState,
}

/// Mean and standard error of regret across replications, per checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub checkpoints: Vec<u64>,
    pub mean: Vec<f64>,
    /// Sample standard deviation / sqrt(replications); zero when there is a
    /// single replication.
    pub stderr: Vec<f64>,
    pub replications: usize,
}

/// One policy entry of an experiment: a unique id (used for output files and
/// stream derivation) plus the index rule and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub id: String,
    pub kind: PolicyKind,
    pub params: IndexParams,
}

/// A full Monte Carlo comparison: instance, horizon, checkpoint schedule,
/// policies, replication count, and master seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instance: BanditInstance,
    pub horizon: u64,
    pub checkpoints: Vec<u64>,
    pub policies: Vec<PolicySpec>,
    pub replications: usize,
    pub master_seed: u64,
}

/// Geometric checkpoint schedule `ceil(n^(k/20))` for `k = 1..=20`,
/// deduplicated; always ends at `n`.
pub fn default_checkpoints(n: u64) -> Vec<u64> {
    let mut points: Vec<u64> = (1..=20)
        .map(|k| (n as f64).powf(k as f64 / 20.0).ceil() as u64)
        .map(|t| t.clamp(1, n))
        .collect();
    points.push(n);
    points.sort_unstable();
    points.dedup();
    points
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let k = self.instance.num_arms();
        if k < 2 {
            return Err(Error::Config("experiment instance needs at least 2 arms".into()));
        }
        if self.horizon < k as u64 {
            return Err(Error::Config(format!(
                "horizon {} is below the number of arms {k}",
                self.horizon
            )));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.checkpoints.is_empty() {
            return Err(Error::Config("checkpoint schedule is empty".into()));
        }
        for pair in self.checkpoints.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::Config(format!(
                    "checkpoints must be strictly increasing ({} then {})",
                    pair[0], pair[1]
                )));
            }
        }
        let last = *self.checkpoints.last().unwrap();
        if self.checkpoints[0] < 1 || last > self.horizon {
            return Err(Error::Config(format!(
                "checkpoints must lie in [1, {}] (got last {last})",
                self.horizon
            )));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("experiment needs at least one policy".into()));
        }
        for spec in &self.policies {
            if spec.id.is_empty()
                || !spec
                    .id
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
            {
                return Err(Error::Config(format!(
                    "policy id '{}' must be nonempty and use only [A-Za-z0-9._-]",
                    spec.id
                )));
            }
            spec.params
                .validate()
                .map_err(|e| Error::Config(format!("policy '{}': {e}", spec.id)))?;
        }
        for (i, a) in self.policies.iter().enumerate() {
            for b in &self.policies[i + 1..] {
                if a.id == b.id {
                    return Err(Error::Config(format!("duplicate policy id '{}'", a.id)));
                }
            }
        }
        Ok(())
    }
}

fn episode_core(
    policy: PolicyKind,
    params: &IndexParams,
    instance: &BanditInstance,
    n: u64,
    checkpoints: &[u64],
    rng_state: RngState,
    mut on_action: impl FnMut(usize),
) -> Result<RegretTrajectory> {
    let k = instance.num_arms();
    if n < k as u64 {
        return Err(Error::Config(format!("episode horizon {n} is below the number of arms {k}")));
    }
    let mut state = PolicyState::new(policy, *params, k)?;
    let mut rng = rng_state.rng();
    let optimal = instance.optimal_mean();
    let means = instance.means();
    let mut regret = 0.0;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0usize;
    for t in 1..=n {
        let arm = state.select_arm();
        on_action(arm);
        let reward = instance.sample_reward(arm, &mut rng);
        state.observe(arm, reward);
        regret += optimal - means[arm];
        if next < checkpoints.len() && checkpoints[next] == t {
            out.push(regret);
            next += 1;
        }
    }
    Ok(RegretTrajectory {
        checkpoints: checkpoints.to_vec(),
        regret: out,
        rng_state,
    })
}

/// Run one episode: `t = 1..=n` of select, sample, observe.
pub fn run_episode(
    policy: PolicyKind,
    params: &IndexParams,
    instance: &BanditInstance,
    n: u64,
    checkpoints: &[u64],
    rng_state: RngState,
) -> Result<RegretTrajectory> {
    episode_core(policy, params, instance, n, checkpoints, rng_state, |_| {})
}

/// As [`run_episode`], additionally returning the full action sequence.
pub fn run_episode_with_actions(
    policy: PolicyKind,
    params: &IndexParams,
    instance: &BanditInstance,
    n: u64,
    checkpoints: &[u64],
    rng_state: RngState,
) -> Result<(RegretTrajectory, Vec<u32>)> {
    let mut actions = Vec::with_capacity(n as usize);
    let trajectory = episode_core(policy, params, instance, n, checkpoints, rng_state, |arm| {
        actions.push(arm as u32)
    })?;
    Ok((trajectory, actions))
}

/// Results for one policy of an experiment: every per-replication trajectory
/// plus the cross-replication summary.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyResult {
    pub id: String,
    pub trajectories: Vec<RegretTrajectory>,
    pub summary: SummaryStats,
}

/// Mean/stderr per checkpoint, reduced sequentially in replication order.
fn summarize(trajectories: &[RegretTrajectory], checkpoints: &[u64]) -> SummaryStats {
    let n = trajectories.len();
    let points = checkpoints.len();
    let mut mean = vec![0.0; points];
    for trajectory in trajectories {
        for (m, &r) in mean.iter_mut().zip(&trajectory.regret) {
            *m += r;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut stderr = vec![0.0; points];
    if n >= 2 {
        for trajectory in trajectories {
            for (s, (&r, &m)) in stderr.iter_mut().zip(trajectory.regret.iter().zip(&mean)) {
                let d = r - m;
                *s += d * d;
            }
        }
        for s in &mut stderr {
            *s = (*s / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt();
        }
    }
    SummaryStats {
        checkpoints: checkpoints.to_vec(),
        mean,
        stderr,
        replications: n,
    }
}

/// Run every policy for `replications` episodes. Replications execute in
/// parallel; output is identical to sequential execution.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<PolicyResult>> {
    config.validate()?;
    config
        .policies
        .iter()
        .map(|spec| {
            let trajectories: Result<Vec<RegretTrajectory>> = (0..config.replications)
                .into_par_iter()
                .map(|rep| {
                    let rng_state = RngState::derived(config.master_seed, &spec.id, rep as u64, 0);
                    run_episode(
                        spec.kind,
                        &spec.params,
                        &config.instance,
                        config.horizon,
                        &config.checkpoints,
                        rng_state,
                    )
                })
                .collect();
            let trajectories = trajectories?;
            let summary = summarize(&trajectories, &config.checkpoints);
            Ok(PolicyResult {
                id: spec.id.clone(),
                trajectories,
                summary,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::NoiseKind;

    fn ocucb_spec(id: &str, eta: f64, rho: f64) -> PolicySpec {
        PolicySpec {
            id: id.into(),
            kind: PolicyKind::Ocucb,
            params: IndexParams::new(eta, rho).unwrap(),
        }
    }

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            instance: BanditInstance::new(vec![0.0, -0.3, -0.6], NoiseKind::Gaussian).unwrap(),
            horizon: 200,
            checkpoints: vec![10, 50, 200],
            policies: vec![ocucb_spec("ocucb", 2.0, 0.5)],
            replications: 8,
            master_seed: 42,
        }
    }

    #[test]
    fn default_checkpoints_shape() {
        let cp = default_checkpoints(10_000);
        assert_eq!(*cp.last().unwrap(), 10_000);
        assert!(cp[0] >= 1);
        assert!(cp.windows(2).all(|w| w[0] < w[1]));
        assert!(cp.len() >= 15 && cp.len() <= 21);
        assert_eq!(default_checkpoints(2), vec![2]);
    }

    #[test]
    fn equal_means_give_zero_regret() {
        let instance = BanditInstance::new(vec![0.4, 0.4, 0.4], NoiseKind::Gaussian).unwrap();
        for kind in [PolicyKind::Ocucb, PolicyKind::KlUcbPlus, PolicyKind::Ucb1, PolicyKind::Moss]
        {
            let params = IndexParams::new(2.0, 0.5).unwrap();
            let tr = run_episode(kind, &params, &instance, 100, &[1, 50, 100], RngState::new(7, 0))
                .unwrap();
            assert_eq!(tr.regret, vec![0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn forced_rounds_pay_each_gap_once() {
        let instance = BanditInstance::new(vec![0.0, -0.25], NoiseKind::Gaussian).unwrap();
        let params = IndexParams::new(2.0, 0.5).unwrap();
        let tr = run_episode(PolicyKind::Ocucb, &params, &instance, 2, &[2], RngState::new(1, 0))
            .unwrap();
        assert_eq!(tr.regret, vec![0.25]);
    }

    #[test]
    fn episodes_are_reproducible() {
        let instance = BanditInstance::new(vec![0.0, -0.2, -0.4], NoiseKind::Gaussian).unwrap();
        let params = IndexParams::new(2.0, 0.75).unwrap();
        let state = RngState::derived(9, "x", 3, 0);
        let (t1, a1) = run_episode_with_actions(
            PolicyKind::KlUcbPlus,
            &params,
            &instance,
            300,
            &[300],
            state,
        )
        .unwrap();
        let (t2, a2) = run_episode_with_actions(
            PolicyKind::KlUcbPlus,
            &params,
            &instance,
            300,
            &[300],
            state,
        )
        .unwrap();
        assert_eq!(a1, a2);
        assert_eq!(t1.regret[0].to_bits(), t2.regret[0].to_bits());
    }

    #[test]
    fn regret_nondecreasing_and_below_t_delta_max() {
        let instance = BanditInstance::new(vec![0.0, -0.5, -1.0], NoiseKind::Rademacher).unwrap();
        let params = IndexParams::new(1.5, 1.0).unwrap();
        let checkpoints: Vec<u64> = (1..=100).collect();
        let tr = run_episode(
            PolicyKind::Ocucb,
            &params,
            &instance,
            100,
            &checkpoints,
            RngState::new(3, 5),
        )
        .unwrap();
        let mut last = 0.0;
        for (&t, &r) in checkpoints.iter().zip(&tr.regret) {
            assert!(r >= last);
            assert!(r <= t as f64 * 1.0 + 1e-9);
            last = r;
        }
    }

    #[test]
    fn horizon_below_arms_rejected() {
        let instance = BanditInstance::new(vec![0.0, -0.3, -0.6], NoiseKind::Gaussian).unwrap();
        let params = IndexParams::new(2.0, 0.5).unwrap();
        assert!(run_episode(PolicyKind::Ocucb, &params, &instance, 2, &[2], RngState::new(0, 0))
            .is_err());
    }

    #[test]
    fn single_replication_summary() {
        let mut config = small_config();
        config.replications = 1;
        let results = run_experiment(&config).unwrap();
        let policy = &results[0];
        assert_eq!(policy.summary.replications, 1);
        assert_eq!(policy.summary.mean, policy.trajectories[0].regret);
        assert!(policy.summary.stderr.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn experiments_are_reproducible() {
        let config = small_config();
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn adding_a_policy_does_not_perturb_existing_one() {
        let mut config = small_config();
        let base = run_experiment(&config).unwrap();
        config.policies.push(PolicySpec {
            id: "ucb1".into(),
            kind: PolicyKind::Ucb1,
            params: IndexParams::new(2.0, 0.5).unwrap(),
        });
        let extended = run_experiment(&config).unwrap();
        assert_eq!(base[0], extended[0]);
    }

    #[test]
    fn parallel_matches_serial() {
        let config = small_config();
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_experiment(&config).unwrap());
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_experiment(&config).unwrap());
        assert_eq!(serial, parallel);
    }

    #[test]
    fn validation_catches_bad_configs() {
        let mut c = small_config();
        c.horizon = 2;
        assert!(c.validate().is_err());

        let mut c = small_config();
        c.policies.push(ocucb_spec("ocucb", 2.0, 0.75));
        assert!(c.validate().unwrap_err().to_string().contains("duplicate"));

        let mut c = small_config();
        c.policies[0].params.eta = 1.0;
        assert!(c.validate().unwrap_err().to_string().contains("eta must exceed 1"));

        let mut c = small_config();
        c.checkpoints = vec![10, 10];
        assert!(c.validate().is_err());

        let mut c = small_config();
        c.checkpoints = vec![10, 500];
        assert!(c.validate().is_err());

        let mut c = small_config();
        c.policies[0].id = "bad id".into();
        assert!(c.validate().is_err());

        let mut c = small_config();
        c.policies.clear();
        assert!(c.validate().is_err());

        let mut c = small_config();
        c.replications = 0;
        assert!(c.validate().is_err());
    }
}
