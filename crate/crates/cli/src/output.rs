//! File outputs: atomic writes, the trajectory/sweep CSV formats, and the
//! JSON report shapes.

use std::io::{BufWriter, Write};
use std::path::Path;

use stosync::metrics::MetricsReport;
use stosync::sde::Trajectory;

use crate::error::CliError;
use crate::gformat::format_g;

/// Write bytes to `path` atomically (temp file in the same directory,
/// then rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Trajectory CSV: header `t,x_0_0,...,x_{N-1}_{n-1}` (node-major, then
/// component), values in `%.10g`.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let file = std::fs::File::create(&tmp)?;
        let mut w = BufWriter::new(file);
        write!(w, "t")?;
        for node in 0..traj.node_count() {
            for comp in 0..traj.node_dim() {
                write!(w, ",x_{node}_{comp}")?;
            }
        }
        writeln!(w)?;
        for k in 0..traj.times().len() {
            write!(w, "{}", format_g(traj.times()[k], 10))?;
            for v in traj.state(k) {
                write!(w, ",{}", format_g(*v, 10))?;
            }
            writeln!(w)?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// One sweep cell result.
pub struct SweepRow {
    pub value: f64,
    pub seed_index: usize,
    pub order_parameter: f64,
    pub lyapunov: f64,
}

/// Sweep CSV: `<parameter>,R,lyapunov,seed`, one row per (value, seed),
/// NaN for failed cells.
pub fn sweep_csv(parameter: &str, rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!("{parameter},R,lyapunov,seed\n"));
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_g(row.value, 10),
            format_g(row.order_parameter, 10),
            format_g(row.lyapunov, 10),
            row.seed_index
        ));
    }
    out
}

/// Metrics report as JSON; a `-inf` Lyapunov sentinel (error hit exactly
/// zero) is carried as `null` plus an explicit flag since JSON has no
/// infinities.
pub fn metrics_json(report: &MetricsReport) -> serde_json::Value {
    let hit_zero = report.lyapunov_estimate == f64::NEG_INFINITY;
    serde_json::json!({
        "order_parameter": report.order_parameter,
        "lyapunov_estimate": if hit_zero { None } else { Some(report.lyapunov_estimate) },
        "error_hit_zero": hit_zero,
        "fit_window": [report.fit_window.0, report.fit_window.1],
        "final_spread": report.final_spread,
        "transient_cut": report.transient_cut,
    })
}

pub fn to_pretty_json(value: &serde_json::Value) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("json serialization");
    text.push('\n');
    text.into_bytes()
}
