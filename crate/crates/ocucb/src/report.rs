//! CSV result files and the run manifest.
//!
//! Regret CSVs share one schema: `policy, replication_or_AGG, checkpoint_t,
//! regret_mean, regret_stderr`. Per-policy files carry one row per
//! (replication, checkpoint) with stderr 0; summary files carry aggregated
//! rows marked `AGG`. Floats are serialized with 17 significant digits
//! (`{:.16e}`), which round-trips every f64 exactly, so identical results
//! produce identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conc::BoundCheck;
use crate::error::{Error, Result};
use crate::sim::PolicyResult;

pub const REGRET_HEADER: [&str; 5] = [
    "policy",
    "replication_or_AGG",
    "checkpoint_t",
    "regret_mean",
    "regret_stderr",
];

pub const CONC_HEADER: [&str; 5] = ["check", "estimate", "bound", "stderr", "pass"];

/// One regret CSV row; `replication = None` marks an aggregate (`AGG`) row.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretRow {
    pub policy: String,
    pub replication: Option<usize>,
    pub checkpoint_t: u64,
    pub regret_mean: f64,
    pub regret_stderr: f64,
}

/// Exact-round-trip float encoding used in every CSV.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Per-replication rows for one policy's trajectories.
pub fn policy_rows(result: &PolicyResult) -> Vec<RegretRow> {
    let mut rows = Vec::new();
    for (replication, trajectory) in result.trajectories.iter().enumerate() {
        for (i, &t) in trajectory.checkpoints.iter().enumerate() {
            rows.push(RegretRow {
                policy: result.id.clone(),
                replication: Some(replication),
                checkpoint_t: t,
                regret_mean: trajectory.regret[i],
                regret_stderr: 0.0,
            });
        }
    }
    rows
}

/// Aggregate rows (mean with standard error) for a set of policies.
pub fn summary_rows(results: &[PolicyResult]) -> Vec<RegretRow> {
    let mut rows = Vec::new();
    for result in results {
        for (i, &t) in result.summary.checkpoints.iter().enumerate() {
            rows.push(RegretRow {
                policy: result.id.clone(),
                replication: None,
                checkpoint_t: t,
                regret_mean: result.summary.mean[i],
                regret_stderr: result.summary.stderr[i],
            });
        }
    }
    rows
}

pub fn write_regret_csv(path: &Path, rows: &[RegretRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(REGRET_HEADER)?;
    for row in rows {
        let replication = match row.replication {
            Some(r) => r.to_string(),
            None => "AGG".to_string(),
        };
        writer.write_record([
            row.policy.as_str(),
            &replication,
            &row.checkpoint_t.to_string(),
            &format_float(row.regret_mean),
            &format_float(row.regret_stderr),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(
    origin: &str,
    line: usize,
    name: &str,
    raw: &str,
) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Parse(format!("{origin}: line {line}: invalid {name} value '{raw}'")))
}

/// Parses a regret CSV from any reader, validating the header. An empty or
/// truncated input is a parse error; a header-only input yields no rows.
/// `origin` names the source in diagnostics (a path, usually).
pub fn parse_regret_csv<R: std::io::Read>(input: R, origin: &str) -> Result<Vec<RegretRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(REGRET_HEADER) {
        return Err(Error::Parse(format!(
            "{origin}: expected header {}, found {}",
            REGRET_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        if record.len() != REGRET_HEADER.len() {
            return Err(Error::Parse(format!(
                "{origin}: line {line}: expected {} fields, found {}",
                REGRET_HEADER.len(),
                record.len()
            )));
        }
        let replication = match &record[1] {
            "AGG" => None,
            raw => Some(parse_field(origin, line, "replication", raw)?),
        };
        rows.push(RegretRow {
            policy: record[0].to_string(),
            replication,
            checkpoint_t: parse_field(origin, line, "checkpoint_t", &record[2])?,
            regret_mean: parse_field(origin, line, "regret_mean", &record[3])?,
            regret_stderr: parse_field(origin, line, "regret_stderr", &record[4])?,
        });
    }
    Ok(rows)
}

/// Reads a regret CSV file; see [`parse_regret_csv`].
pub fn read_regret_csv(path: &Path) -> Result<Vec<RegretRow>> {
    let file = std::fs::File::open(path)?;
    parse_regret_csv(std::io::BufReader::new(file), &path.display().to_string())
}

/// Writes concentration check results.
pub fn write_conc_csv(path: &Path, checks: &[BoundCheck]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(CONC_HEADER)?;
    for check in checks {
        writer.write_record([
            check.name.as_str(),
            &format_float(check.estimate),
            &format_float(check.bound),
            &format_float(check.stderr),
            if check.pass { "true" } else { "false" },
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Provenance record written next to the result files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Digest of the canonicalized config (stable across platforms).
    pub config_hash: String,
    /// Library version that produced the run.
    pub version: String,
    pub duration_seconds: f64,
    /// Result files, relative to the manifest's directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize manifest: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
    }
}
