//! Orchestration behind the CLI: execute a config end to end and write the
//! result files.

use std::path::Path;
use std::time::Instant;

use crate::config::FileConfig;
use crate::error::{Error, Result};
use crate::report::{self, RunManifest};
use crate::sim;

/// File names the runner claims for itself in the output directory.
const RESERVED: [&str; 3] = ["summary", "conc", "manifest"];

/// Result of executing a config: the written manifest, one printable line
/// per concentration check, and the combined verdict.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub check_lines: Vec<String>,
    pub all_passed: bool,
}

/// Runs the experiment and/or concentration checks described by `config`,
/// writing one CSV per policy, `summary.csv`, `conc.csv` (when checks are
/// configured), and `manifest.toml` into `out_dir`.
pub fn execute_run(config: &FileConfig, out_dir: &Path) -> Result<RunOutcome> {
    let started = Instant::now();
    config.validate()?;
    let config_hash = config.hash()?;
    std::fs::create_dir_all(out_dir)?;

    let mut outputs = Vec::new();
    let mut check_lines = Vec::new();
    let mut all_passed = true;

    if let Some(experiment) = config.experiment()? {
        for policy in &experiment.policies {
            if RESERVED.contains(&policy.id.as_str()) {
                return Err(Error::Config(format!(
                    "policy id '{}' collides with a reserved output name",
                    policy.id
                )));
            }
        }
        let results = sim::run_experiment(&experiment)?;
        for result in &results {
            let file = format!("{}.csv", result.id);
            report::write_regret_csv(&out_dir.join(&file), &report::policy_rows(result))?;
            outputs.push(file);
        }
        report::write_regret_csv(&out_dir.join("summary.csv"), &report::summary_rows(&results))?;
        outputs.push("summary.csv".into());
    }

    let resolved = config.resolved_checks()?;
    if !resolved.is_empty() {
        let mut bound_checks = Vec::new();
        for check in &resolved {
            bound_checks.extend(check.execute()?);
        }
        for check in &bound_checks {
            all_passed &= check.pass;
            check_lines.push(format!(
                "{}: estimate {:.6e} vs bound {:.6e} (stderr {:.2e}) ... {}",
                check.name,
                check.estimate,
                check.bound,
                check.stderr,
                if check.pass { "PASS" } else { "FAIL" }
            ));
        }
        report::write_conc_csv(&out_dir.join("conc.csv"), &bound_checks)?;
        outputs.push("conc.csv".into());
    }

    let manifest = RunManifest {
        config_hash,
        version: env!("CARGO_PKG_VERSION").into(),
        duration_seconds: started.elapsed().as_secs_f64(),
        outputs,
    };
    manifest.write(&out_dir.join("manifest.toml"))?;
    Ok(RunOutcome { manifest, check_lines, all_passed })
}
