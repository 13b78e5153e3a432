//! Static SVG regret plots with optional theoretical envelope overlays.
//!
//! Input is one or more summary CSVs (aggregate rows only); output is a
//! self-contained SVG (mean curves with standard-error bands on a log-t
//! axis) plus a sidecar `<name>.values.csv` listing every plotted value,
//! so overlay claims can be checked by machine rather than by eye.

use std::path::{Path, PathBuf};

use crate::difficulty;
use crate::error::{Error, Result};
use crate::policies::IndexParams;
use crate::report;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 50.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Which envelope curves to overlay and on which instance, parsed from a
/// `key=value;...` spec such as
/// `means=0,-0.3,-0.3;eta=2;rho=0.5;upper-c=1.2;lower`.
///
/// Keys: `means` (comma-separated) or `arms`+`gap`; `eta` (default 2);
/// `rho` (default 0.5); `upper-c` (upper-envelope constant); bare `lower`.
/// When neither `upper-c` nor `lower` is given, both curves are drawn with
/// the upper constant defaulting to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSpec {
    pub means: Vec<f64>,
    pub params: IndexParams,
    pub upper_c: Option<f64>,
    pub lower: bool,
}

impl EnvelopeSpec {
    pub fn parse(text: &str) -> Result<EnvelopeSpec> {
        let mut means: Option<Vec<f64>> = None;
        let mut arms: Option<usize> = None;
        let mut gap: Option<f64> = None;
        let mut eta = 2.0;
        let mut rho = 0.5;
        let mut upper_c: Option<f64> = None;
        let mut lower = false;
        let bad = |entry: &str, what: &str| {
            Error::Parse(format!("envelope spec entry '{entry}': {what}"))
        };
        for entry in text.split(';').filter(|e| !e.is_empty()) {
            match entry.split_once('=') {
                None if entry == "lower" => lower = true,
                None => return Err(bad(entry, "expected key=value or 'lower'")),
                Some((key, value)) => match key {
                    "means" => {
                        let parsed: std::result::Result<Vec<f64>, _> =
                            value.split(',').map(str::parse).collect();
                        means = Some(parsed.map_err(|_| bad(entry, "invalid float list"))?);
                    }
                    "arms" => {
                        arms = Some(value.parse().map_err(|_| bad(entry, "invalid count"))?)
                    }
                    "gap" => gap = Some(value.parse().map_err(|_| bad(entry, "invalid float"))?),
                    "eta" => eta = value.parse().map_err(|_| bad(entry, "invalid float"))?,
                    "rho" => rho = value.parse().map_err(|_| bad(entry, "invalid float"))?,
                    "upper-c" => {
                        upper_c = Some(value.parse().map_err(|_| bad(entry, "invalid float"))?)
                    }
                    _ => return Err(bad(entry, "unknown key")),
                },
            }
        }
        let means = match (means, arms, gap) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(Error::Parse(
                    "envelope spec accepts either means or arms+gap, not both".into(),
                ))
            }
            (Some(m), None, None) => m,
            (None, Some(k), Some(g)) => {
                if k < 2 || !(g > 0.0) {
                    return Err(Error::Parse(
                        "envelope spec needs arms >= 2 and gap > 0".into(),
                    ));
                }
                let mut m = vec![-g; k];
                m[0] = 0.0;
                m
            }
            _ => {
                return Err(Error::Parse(
                    "envelope spec requires means or arms+gap".into(),
                ))
            }
        };
        let (upper_c, lower) = match (upper_c, lower) {
            (None, false) => (Some(1.0), true),
            other => other,
        };
        let params = IndexParams { eta, rho, drop_log_factors: false };
        params
            .validate()
            .map_err(|e| Error::Parse(format!("envelope spec: {e}")))?;
        Ok(EnvelopeSpec { means, params, upper_c, lower })
    }
}

/// One plotted curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub checkpoints: Vec<u64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Loads the aggregate rows of each summary CSV as one series per policy.
/// Grids must agree across series; mismatches name the offending files.
pub fn load_series(paths: &[PathBuf]) -> Result<Vec<Series>> {
    let mut series: Vec<Series> = Vec::new();
    let mut origin: Vec<PathBuf> = Vec::new();
    for path in paths {
        let rows = report::read_regret_csv(path)?;
        let mut any = false;
        for row in rows {
            if row.replication.is_some() {
                continue; // per-replication row; only aggregates are plotted
            }
            any = true;
            match series.iter_mut().find(|s| s.name == row.policy) {
                Some(existing) => {
                    existing.checkpoints.push(row.checkpoint_t);
                    existing.mean.push(row.regret_mean);
                    existing.stderr.push(row.regret_stderr);
                }
                None => {
                    series.push(Series {
                        name: row.policy.clone(),
                        checkpoints: vec![row.checkpoint_t],
                        mean: vec![row.regret_mean],
                        stderr: vec![row.regret_stderr],
                    });
                    origin.push(path.clone());
                }
            }
        }
        if !any {
            return Err(Error::Parse(format!(
                "{}: no aggregate (AGG) rows to plot",
                path.display()
            )));
        }
    }
    if series.is_empty() {
        return Err(Error::Parse("no input series".into()));
    }
    for i in 1..series.len() {
        if series[i].checkpoints != series[0].checkpoints {
            return Err(Error::Parse(format!(
                "checkpoint grids differ between {} (policy '{}') and {} (policy '{}')",
                origin[0].display(),
                series[0].name,
                origin[i].display(),
                series[i].name,
            )));
        }
    }
    Ok(series)
}

/// Envelope curves evaluated on the data's checkpoint grid (skipping t < 2,
/// where the envelopes are undefined).
pub fn envelope_series(spec: &EnvelopeSpec, checkpoints: &[u64]) -> Result<Vec<Series>> {
    let grid: Vec<u64> = checkpoints.iter().copied().filter(|&t| t >= 2).collect();
    if grid.is_empty() {
        return Err(Error::Config(
            "no checkpoints >= 2 to evaluate envelopes on".into(),
        ));
    }
    let mut out = Vec::new();
    if let Some(c) = spec.upper_c {
        let mut mean = Vec::new();
        for &t in &grid {
            mean.push(difficulty::upper_envelope(&spec.means, t, &spec.params, c)?.total);
        }
        out.push(Series {
            name: "upper-envelope".into(),
            checkpoints: grid.clone(),
            stderr: vec![0.0; mean.len()],
            mean,
        });
    }
    if spec.lower {
        let mut mean = Vec::new();
        for &t in &grid {
            mean.push(difficulty::lower_envelope(&spec.means, t)?.total);
        }
        out.push(Series {
            name: "lower-envelope".into(),
            checkpoints: grid.clone(),
            stderr: vec![0.0; mean.len()],
            mean,
        });
    }
    Ok(out)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    log_min: f64,
    log_max: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, t: u64) -> f64 {
        let span = self.log_max - self.log_min;
        let frac = if span == 0.0 {
            0.5
        } else {
            ((t as f64).log10() - self.log_min) / span
        };
        MARGIN_LEFT + frac * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        HEIGHT - MARGIN_BOTTOM - (v / self.y_max) * h
    }
}

fn polyline_points(frame: &Frame, s: &Series) -> String {
    s.checkpoints
        .iter()
        .zip(&s.mean)
        .map(|(&t, &v)| format!("{:.2},{:.2}", frame.x(t), frame.y(v)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders the SVG document for data series plus envelope overlays.
pub fn svg_document(series: &[Series], envelopes: &[Series]) -> String {
    let mut y_max = 0.0f64;
    let mut t_min = u64::MAX;
    let mut t_max = 1u64;
    for s in series.iter().chain(envelopes) {
        for (i, &v) in s.mean.iter().enumerate() {
            y_max = y_max.max(v + s.stderr[i]);
        }
        for &t in &s.checkpoints {
            t_min = t_min.min(t);
            t_max = t_max.max(t);
        }
    }
    if y_max <= 0.0 {
        y_max = 1.0;
    }
    let frame = Frame {
        log_min: (t_min.max(1) as f64).log10(),
        log_max: (t_max as f64).log10(),
        y_max: y_max * 1.05,
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Axes.
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    // Decade ticks on the x axis.
    let mut decade = 1u64;
    while decade <= t_max {
        if decade >= t_min.max(1) {
            let x = frame.x(decade);
            svg.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{y0}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n\
                 <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{decade}</text>\n",
                y0 + 5.0,
                y0 + 20.0
            ));
        }
        match decade.checked_mul(10) {
            Some(next) => decade = next,
            None => break,
        }
    }
    // Five y ticks.
    for i in 0..=4 {
        let v = frame.y_max * i as f64 / 4.0;
        let y = frame.y(v);
        let label = if frame.y_max >= 100.0 {
            format!("{v:.0}")
        } else {
            format!("{v:.2}")
        };
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{x0}\" y2=\"{y:.2}\" stroke=\"black\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{label}</text>\n",
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">round t (log scale)</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    ));
    svg.push_str(&format!(
        "<text x=\"15\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 15 {:.2})\">\
         mean regret</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    ));

    // Standard-error bands first so curves draw on top.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if s.checkpoints.len() >= 2 && s.stderr.iter().any(|&e| e > 0.0) {
            let forward = s.checkpoints.iter().zip(s.mean.iter().zip(&s.stderr));
            let mut d = String::new();
            for (j, (&t, (&m, &e))) in forward.enumerate() {
                let prefix = if j == 0 { "M" } else { "L" };
                d.push_str(&format!("{prefix}{:.2},{:.2} ", frame.x(t), frame.y(m + e)));
            }
            for (&t, (&m, &e)) in s.checkpoints.iter().zip(s.mean.iter().zip(&s.stderr)).rev() {
                d.push_str(&format!("L{:.2},{:.2} ", frame.x(t), frame.y(m - e)));
            }
            d.push('Z');
            svg.push_str(&format!(
                "<path d=\"{d}\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\"/>\n"
            ));
        }
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if s.checkpoints.len() >= 2 {
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                polyline_points(&frame, s)
            ));
        }
        for (&t, &v) in s.checkpoints.iter().zip(&s.mean) {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                frame.x(t),
                frame.y(v)
            ));
        }
    }
    for s in envelopes {
        if s.checkpoints.len() >= 2 {
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"#444444\" \
                 stroke-width=\"1.2\" stroke-dasharray=\"6 3\"/>\n",
                polyline_points(&frame, s)
            ));
        } else {
            for (&t, &v) in s.checkpoints.iter().zip(&s.mean) {
                svg.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#444444\"/>\n",
                    frame.x(t),
                    frame.y(v)
                ));
            }
        }
    }

    // Legend.
    let mut row = 0;
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN_TOP + 15.0 + 18.0 * row as f64;
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\">{}</text>\n",
            x0 + 10.0,
            y - 10.0,
            x0 + 28.0,
            y,
            xml_escape(&s.name)
        ));
        row += 1;
    }
    for s in envelopes {
        let y = MARGIN_TOP + 15.0 + 18.0 * row as f64;
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#444444\" \
             stroke-dasharray=\"6 3\"/>\n<text x=\"{:.2}\" y=\"{:.2}\">{}</text>\n",
            x0 + 10.0,
            y - 4.0,
            x0 + 22.0,
            y - 4.0,
            x0 + 28.0,
            y,
            xml_escape(&s.name)
        ));
        row += 1;
    }

    svg.push_str("</svg>\n");
    svg
}

fn values_sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("values.csv")
}

fn write_values_csv(path: &Path, all: &[&Series]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["series", "checkpoint_t", "value", "stderr"])?;
    for s in all {
        for (i, &t) in s.checkpoints.iter().enumerate() {
            writer.write_record([
                s.name.as_str(),
                &t.to_string(),
                &report::format_float(s.mean[i]),
                &report::format_float(s.stderr[i]),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Reads summary CSVs, renders the SVG to `out`, and writes the sidecar
/// values CSV next to it. Nothing is written if loading fails.
pub fn render_plot(inputs: &[PathBuf], spec: Option<&EnvelopeSpec>, out: &Path) -> Result<()> {
    let series = load_series(inputs)?;
    let envelopes = match spec {
        Some(spec) => envelope_series(spec, &series[0].checkpoints)?,
        None => Vec::new(),
    };
    let svg = svg_document(&series, &envelopes);
    std::fs::write(out, svg)?;
    let all: Vec<&Series> = series.iter().chain(&envelopes).collect();
    write_values_csv(&values_sidecar_path(out), &all)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parses_explicit_form() {
        let spec = EnvelopeSpec::parse("means=0,-0.3,-0.5;eta=2.5;rho=0.75;upper-c=1.5;lower")
            .unwrap();
        assert_eq!(spec.means, vec![0.0, -0.3, -0.5]);
        assert_eq!(spec.params.eta, 2.5);
        assert_eq!(spec.params.rho, 0.75);
        assert_eq!(spec.upper_c, Some(1.5));
        assert!(spec.lower);
    }

    #[test]
    fn spec_parses_shorthand_and_defaults_to_both_curves() {
        let spec = EnvelopeSpec::parse("arms=10;gap=0.3").unwrap();
        assert_eq!(spec.means.len(), 10);
        assert_eq!(spec.means[0], 0.0);
        assert_eq!(spec.means[9], -0.3);
        assert_eq!(spec.params.eta, 2.0);
        assert_eq!(spec.upper_c, Some(1.0));
        assert!(spec.lower);
    }

    #[test]
    fn spec_selectors_are_exclusive_when_given() {
        let spec = EnvelopeSpec::parse("means=0,-1;upper-c=2").unwrap();
        assert_eq!(spec.upper_c, Some(2.0));
        assert!(!spec.lower);
        let spec = EnvelopeSpec::parse("means=0,-1;lower").unwrap();
        assert_eq!(spec.upper_c, None);
        assert!(spec.lower);
    }

    #[test]
    fn spec_rejects_malformed_input() {
        assert!(EnvelopeSpec::parse("").is_err());
        assert!(EnvelopeSpec::parse("means=0,-1;wavelength=3").is_err());
        assert!(EnvelopeSpec::parse("means=a,b").is_err());
        assert!(EnvelopeSpec::parse("means=0,-1;arms=2;gap=0.1").is_err());
        assert!(EnvelopeSpec::parse("arms=2").is_err());
        assert!(EnvelopeSpec::parse("means=0,-1;eta=1.0").is_err());
        assert!(EnvelopeSpec::parse("lower").is_err()); // no instance
    }

    fn series(name: &str, checkpoints: Vec<u64>, mean: Vec<f64>) -> Series {
        let stderr = vec![0.1; mean.len()];
        Series { name: name.into(), checkpoints, mean, stderr }
    }

    #[test]
    fn svg_smoke() {
        let s = vec![
            series("ocucb", vec![10, 100, 1000], vec![1.0, 2.0, 3.0]),
            series("ucb1", vec![10, 100, 1000], vec![2.0, 4.0, 6.0]),
        ];
        let spec = EnvelopeSpec::parse("means=0,-0.3;upper-c=1").unwrap();
        let env = envelope_series(&spec, &[10, 100, 1000]).unwrap();
        let doc = svg_document(&s, &env);
        assert!(doc.starts_with("<svg"));
        assert!(doc.contains("ocucb"));
        assert!(doc.contains("upper-envelope"));
        assert_eq!(doc.matches("<polyline").count(), 3);
        assert!(doc.ends_with("</svg>\n"));
    }

    #[test]
    fn single_point_series_renders_marker_and_legend() {
        let s = vec![series("solo", vec![50], vec![1.0])];
        let doc = svg_document(&s, &[]);
        assert!(doc.contains("<circle"));
        assert!(!doc.contains("<polyline"));
        assert!(doc.contains("solo"));
    }

    #[test]
    fn envelope_series_skips_degenerate_checkpoints() {
        let spec = EnvelopeSpec::parse("means=0,-0.5").unwrap();
        let env = envelope_series(&spec, &[1, 10, 100]).unwrap();
        assert_eq!(env.len(), 2);
        assert_eq!(env[0].checkpoints, vec![10, 100]);
        assert!(env[0].mean.iter().all(|&v| v > 0.0));
        assert!(envelope_series(&spec, &[1]).is_err());
    }

    #[test]
    fn legend_escapes_markup() {
        let s = vec![series("a<b&c", vec![10, 20], vec![1.0, 2.0])];
        let doc = svg_document(&s, &[]);
        assert!(doc.contains("a&lt;b&amp;c"));
        assert!(!doc.contains("a<b"));
    }
}
