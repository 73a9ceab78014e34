//! Batch subcommands: `run`, `compare` and `replay`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use plugpull::sim::{compute_metrics, run_scenario, Metrics, Mode, ScenarioConfig, SimLog};

use crate::telemetry::{frames_from_rows, TelemetryFrame};

/// Runs one scenario and writes its CSV log. Returns the log as written.
pub fn run(cfg: &ScenarioConfig, mode: Option<Mode>, out: &Path) -> anyhow::Result<SimLog> {
    let mut cfg = cfg.clone();
    if let Some(mode) = mode {
        cfg.mode = mode;
    }
    let log = run_scenario(&cfg)?;
    std::fs::write(out, log.to_csv()).with_context(|| format!("writing {}", out.display()))?;
    Ok(log)
}

/// Per-mode row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub mode: Mode,
    pub log_path: PathBuf,
    pub metrics: Option<Metrics>,
}

/// Log paths next to the table: `<stem>_baseline.csv`, `<stem>_proposed.csv`.
pub fn comparison_log_path(table: &Path, mode: Mode) -> PathBuf {
    let stem = table.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "compare".into());
    table.with_file_name(format!("{stem}_{}.csv", mode.as_str()))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into())
}

pub fn format_table(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("mode       t_e_s      overshoot_m  time_to_return_s  peak_fdot_N_per_s\n");
    for r in rows {
        let m = r.metrics.as_ref();
        let _ = writeln!(
            out,
            "{:<10} {:<10} {:<12} {:<17} {}",
            r.mode.as_str(),
            opt(m.map(|m| m.t_e)),
            opt(m.map(|m| m.overshoot)),
            opt(m.and_then(|m| m.time_to_return)),
            opt(m.map(|m| m.peak_force_rate)),
        );
    }
    out
}

/// Runs both modes, writes both CSV logs beside `out`, computes the
/// metrics from the written files and writes the table to `out`.
pub fn compare(cfg: &ScenarioConfig, out: &Path) -> anyhow::Result<Vec<ComparisonRow>> {
    let window = cfg.teleop.recovery_duration;
    let mut rows = Vec::new();
    for mode in [Mode::Baseline, Mode::Proposed] {
        let path = comparison_log_path(out, mode);
        run(cfg, Some(mode), &path)?;
        let log = read_log(&path)?;
        rows.push(ComparisonRow { mode, log_path: path, metrics: compute_metrics(&log, window) });
    }
    std::fs::write(out, format_table(&rows)).with_context(|| format!("writing {}", out.display()))?;
    Ok(rows)
}

pub fn read_log(path: &Path) -> anyhow::Result<SimLog> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(SimLog::from_csv(&text).with_context(|| format!("parsing {}", path.display()))?)
}

/// Telemetry frames of a logged run, one JSON object per line.
pub fn replay(log: &Path, rate_hz: f64) -> anyhow::Result<Vec<String>> {
    let log = read_log(log)?;
    Ok(frames_from_rows(&log.rows, rate_hz).iter().map(TelemetryFrame::encode).collect())
}
