//! TOML run configuration: parsing with field diagnostics, cross-field
//! validation, normalization to a canonical form, and a stable digest of
//! that form.
//!
//! A config file drives an experiment (instance + experiment + policies),
//! a list of concentration checks, or both:
//!
//! ```toml
//! seed = 42
//!
//! [instance]
//! arms = 10          # shorthand for means = [0, -gap, ..., -gap]
//! gap = 0.3
//! noise = "gaussian"
//!
//! [experiment]
//! horizon = 10000
//! replications = 1000
//! # checkpoints = [100, 1000, 10000]   (geometric grid when omitted)
//!
//! [[policy]]
//! kind = "ocucb"     # ocucb | klucb-plus | ucb1 | moss
//! eta = 2.0
//! rho = 0.5
//!
//! [[conc]]
//! check = "maximal"  # maximal | lil | tau | alpha-beta
//! n = 100
//! epsilon = 20.0
//! replications = 100000
//! ```
//!
//! Unknown fields are rejected, as are fields that do not belong to the
//! declared check kind.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::conc::{self, BoundCheck, WalkConfig};
use crate::env::{BanditInstance, NoiseKind};
use crate::error::{Error, Result};
use crate::policies::{IndexParams, PolicyKind};
use crate::sim::{default_checkpoints, ExperimentConfig, PolicySpec};

/// Parsed form of a run configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Master seed for every stream derived during the run.
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSection>,
    #[serde(default, rename = "policy", skip_serializing_if = "Vec::is_empty")]
    pub policies: Vec<PolicySection>,
    #[serde(default, rename = "conc", skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<ConcSection>,
}

/// Bandit instance: explicit `means`, or the `arms`/`gap` shorthand for
/// one optimal arm at 0 and `arms - 1` arms at `-gap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseKind>,
}

impl InstanceSection {
    /// Materialized mean vector.
    pub fn resolved_means(&self) -> Result<Vec<f64>> {
        match (&self.means, self.arms, self.gap) {
            (Some(_), None, Some(_)) | (Some(_), Some(_), _) => Err(Error::Config(
                "instance accepts either means or arms+gap, not both".into(),
            )),
            (Some(means), None, None) => Ok(means.clone()),
            (None, Some(arms), Some(gap)) => {
                if !(gap > 0.0) {
                    return Err(Error::Config(format!("gap must be positive (got {gap})")));
                }
                if arms < 1 {
                    return Err(Error::Config("arms must be at least 1".into()));
                }
                let mut means = vec![-gap; arms];
                means[0] = 0.0;
                Ok(means)
            }
            (None, Some(_), None) | (None, None, Some(_)) => Err(Error::Config(
                "arms and gap must be given together".into(),
            )),
            (None, None, None) => Err(Error::Config(
                "instance requires means or arms+gap".into(),
            )),
        }
    }

    pub fn to_instance(&self) -> Result<BanditInstance> {
        BanditInstance::new(self.resolved_means()?, self.noise.unwrap_or(NoiseKind::Gaussian))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub horizon: u64,
    pub replications: usize,
    /// Regret recording times; geometric default grid when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    /// Output label; defaults to the kind's name. Must be unique per run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub kind: PolicyKind,
    pub eta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub drop_log_factors: bool,
}

impl PolicySection {
    pub fn to_spec(&self) -> PolicySpec {
        PolicySpec {
            id: self.id.clone().unwrap_or_else(|| self.kind.to_string()),
            kind: self.kind,
            params: IndexParams {
                eta: self.eta,
                rho: self.rho.unwrap_or(0.5),
                drop_log_factors: self.drop_log_factors,
            },
        }
    }
}

/// One concentration check. All parameter fields are optional at the TOML
/// level; [`ConcSection::resolve`] enforces exactly the fields the declared
/// `check` kind needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcSection {
    /// "maximal" | "lil" | "tau" | "alpha-beta".
    pub check: String,
    pub replications: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_fit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_fit_beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseKind>,
}

/// A validated concentration check, ready to execute.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedCheck {
    Maximal { n: u64, epsilon: f64, cfg: WalkConfig },
    Lil { eta: f64, floor: f64, cfg: WalkConfig },
    Tau { delta: f64, b: f64, eta: f64, c_fit: f64, cfg: WalkConfig },
    AlphaBeta {
        delta: f64,
        rho: f64,
        lambdas: Vec<f64>,
        eta: f64,
        c_fit: f64,
        c_fit_beta: f64,
        cfg: WalkConfig,
    },
}

impl ResolvedCheck {
    pub fn execute(&self) -> Result<Vec<BoundCheck>> {
        match self {
            ResolvedCheck::Maximal { n, epsilon, cfg } => {
                Ok(vec![conc::check_maximal(*n, *epsilon, cfg)?])
            }
            ResolvedCheck::Lil { eta, floor, cfg } => {
                Ok(vec![conc::estimate_lil_survival(*eta, *floor, cfg)?])
            }
            ResolvedCheck::Tau { delta, b, eta, c_fit, cfg } => {
                conc::tau_checks(*delta, *b, *eta, *c_fit, cfg)
            }
            ResolvedCheck::AlphaBeta { delta, rho, lambdas, eta, c_fit, c_fit_beta, cfg } => {
                conc::alpha_beta_checks(*delta, *rho, lambdas, *eta, *c_fit, *c_fit_beta, cfg)
            }
        }
    }
}

impl ConcSection {
    fn require<T: Copy>(&self, field: Option<T>, name: &str) -> Result<T> {
        field.ok_or_else(|| {
            Error::Config(format!("conc check '{}' requires field '{name}'", self.check))
        })
    }

    fn forbid<T>(&self, field: &Option<T>, name: &str) -> Result<()> {
        if field.is_some() {
            return Err(Error::Config(format!(
                "conc check '{}' does not take field '{name}'",
                self.check
            )));
        }
        Ok(())
    }

    /// Validates field presence for the declared kind and binds the walk
    /// shape. Value-range validation happens inside the check itself.
    pub fn resolve(&self, seed: u64) -> Result<ResolvedCheck> {
        let noise = self.noise.unwrap_or(NoiseKind::Gaussian);
        let walk = |truncation: u64| WalkConfig {
            truncation,
            replications: self.replications,
            noise,
            seed,
        };
        match self.check.as_str() {
            "maximal" => {
                self.forbid(&self.truncation, "truncation")?;
                self.forbid(&self.eta, "eta")?;
                self.forbid(&self.floor, "floor")?;
                self.forbid(&self.delta, "delta")?;
                self.forbid(&self.b, "b")?;
                self.forbid(&self.rho, "rho")?;
                self.forbid(&self.lambdas, "lambdas")?;
                self.forbid(&self.c_fit, "c_fit")?;
                self.forbid(&self.c_fit_beta, "c_fit_beta")?;
                let n = self.require(self.n, "n")?;
                Ok(ResolvedCheck::Maximal {
                    n,
                    epsilon: self.require(self.epsilon, "epsilon")?,
                    cfg: walk(n),
                })
            }
            "lil" => {
                self.forbid(&self.n, "n")?;
                self.forbid(&self.epsilon, "epsilon")?;
                self.forbid(&self.delta, "delta")?;
                self.forbid(&self.b, "b")?;
                self.forbid(&self.rho, "rho")?;
                self.forbid(&self.lambdas, "lambdas")?;
                self.forbid(&self.c_fit, "c_fit")?;
                self.forbid(&self.c_fit_beta, "c_fit_beta")?;
                Ok(ResolvedCheck::Lil {
                    eta: self.require(self.eta, "eta")?,
                    floor: self.require(self.floor, "floor")?,
                    cfg: walk(self.require(self.truncation, "truncation")?),
                })
            }
            "tau" => {
                self.forbid(&self.n, "n")?;
                self.forbid(&self.epsilon, "epsilon")?;
                self.forbid(&self.floor, "floor")?;
                self.forbid(&self.rho, "rho")?;
                self.forbid(&self.lambdas, "lambdas")?;
                self.forbid(&self.c_fit_beta, "c_fit_beta")?;
                Ok(ResolvedCheck::Tau {
                    delta: self.require(self.delta, "delta")?,
                    b: self.require(self.b, "b")?,
                    eta: self.require(self.eta, "eta")?,
                    c_fit: self.require(self.c_fit, "c_fit")?,
                    cfg: walk(self.require(self.truncation, "truncation")?),
                })
            }
            "alpha-beta" => {
                self.forbid(&self.n, "n")?;
                self.forbid(&self.epsilon, "epsilon")?;
                self.forbid(&self.floor, "floor")?;
                self.forbid(&self.b, "b")?;
                let lambdas = self
                    .lambdas
                    .clone()
                    .ok_or_else(|| {
                        Error::Config("conc check 'alpha-beta' requires field 'lambdas'".into())
                    })?;
                Ok(ResolvedCheck::AlphaBeta {
                    delta: self.require(self.delta, "delta")?,
                    rho: self.require(self.rho, "rho")?,
                    lambdas,
                    eta: self.require(self.eta, "eta")?,
                    c_fit: self.require(self.c_fit, "c_fit")?,
                    c_fit_beta: self.require(self.c_fit_beta, "c_fit_beta")?,
                    cfg: walk(self.require(self.truncation, "truncation")?),
                })
            }
            other => Err(Error::Config(format!(
                "unknown conc check '{other}' (expected maximal, lil, tau, or alpha-beta)"
            ))),
        }
    }
}

impl FileConfig {
    /// Parses TOML text; syntax and unknown-field errors carry the toml
    /// crate's line/column diagnostics.
    pub fn parse(text: &str) -> Result<FileConfig> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)?;
        FileConfig::parse(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }

    /// The experiment this config describes, if any. The instance,
    /// experiment, and policy sections must be given together.
    pub fn experiment(&self) -> Result<Option<ExperimentConfig>> {
        match (&self.instance, &self.experiment) {
            (None, None) => {
                if self.policies.is_empty() {
                    Ok(None)
                } else {
                    Err(Error::Config(
                        "policy sections require instance and experiment sections".into(),
                    ))
                }
            }
            (Some(instance), Some(experiment)) => {
                if self.policies.is_empty() {
                    return Err(Error::Config("at least one [[policy]] is required".into()));
                }
                let config = ExperimentConfig {
                    instance: instance.to_instance()?,
                    horizon: experiment.horizon,
                    checkpoints: experiment
                        .checkpoints
                        .clone()
                        .unwrap_or_else(|| default_checkpoints(experiment.horizon)),
                    policies: self.policies.iter().map(PolicySection::to_spec).collect(),
                    replications: experiment.replications,
                    master_seed: self.seed,
                };
                config.validate()?;
                Ok(Some(config))
            }
            _ => Err(Error::Config(
                "instance and experiment sections must be given together".into(),
            )),
        }
    }

    /// All concentration checks, resolved and validated.
    pub fn resolved_checks(&self) -> Result<Vec<ResolvedCheck>> {
        self.checks.iter().map(|c| c.resolve(self.seed)).collect()
    }

    /// Full cross-field validation; a valid config drives at least one of
    /// an experiment or a concentration check.
    pub fn validate(&self) -> Result<()> {
        let experiment = self.experiment()?;
        let checks = self.resolved_checks()?;
        if experiment.is_none() && checks.is_empty() {
            return Err(Error::Config(
                "config defines neither an experiment nor concentration checks".into(),
            ));
        }
        Ok(())
    }

    /// Canonical form: shorthands expanded and defaults made explicit, so
    /// that equivalent configs serialize identically.
    pub fn normalized(&self) -> Result<FileConfig> {
        self.validate()?;
        let instance = match &self.instance {
            None => None,
            Some(section) => Some(InstanceSection {
                means: Some(section.resolved_means()?),
                arms: None,
                gap: None,
                noise: Some(section.noise.unwrap_or(NoiseKind::Gaussian)),
            }),
        };
        let experiment = self.experiment.as_ref().map(|e| ExperimentSection {
            horizon: e.horizon,
            replications: e.replications,
            checkpoints: Some(
                e.checkpoints
                    .clone()
                    .unwrap_or_else(|| default_checkpoints(e.horizon)),
            ),
        });
        let policies = self
            .policies
            .iter()
            .map(|p| PolicySection {
                id: Some(p.id.clone().unwrap_or_else(|| p.kind.to_string())),
                kind: p.kind,
                eta: p.eta,
                rho: Some(p.rho.unwrap_or(0.5)),
                drop_log_factors: p.drop_log_factors,
            })
            .collect();
        let checks = self
            .checks
            .iter()
            .map(|c| ConcSection {
                noise: Some(c.noise.unwrap_or(NoiseKind::Gaussian)),
                ..c.clone()
            })
            .collect();
        Ok(FileConfig {
            seed: self.seed,
            instance,
            experiment,
            policies,
            checks,
        })
    }

    /// Hex SHA-256 of the canonical serialization; identical across
    /// platforms for equivalent configs.
    pub fn hash(&self) -> Result<String> {
        let canonical = self.normalized()?.to_toml_string()?;
        let digest = Sha256::digest(canonical.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}
