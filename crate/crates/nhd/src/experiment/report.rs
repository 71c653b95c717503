//! Deterministic CSV and JSON emission.
//!
//! Bytes must be reproducible run to run, so every float goes through one
//! formatter, rows keep sweep order, and maps are ordered. Files end with a
//! trailing newline.

use std::path::Path;

use crate::error::Result;

use super::runner::{ExactRow, ExpectationRow, MetricRow, RunReport};

/// Render with 12 significant digits. Exact zero compresses to "0" so that
/// columns of structural zeros stay readable.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.11e}")
    }
}

fn write_lines(path: &Path, header: &str, lines: impl Iterator<Item = String>) -> Result<()> {
    let mut out = String::with_capacity(4096);
    out.push_str(header);
    out.push('\n');
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Sampled rows: the measured points with their error bars.
pub fn write_sampled_csv(path: &Path, rows: &[ExpectationRow]) -> Result<()> {
    write_lines(
        path,
        "r,t,state_tag,sx,sy,sz,sx_err,sy_err,sz_err,p_branch,n_eff",
        rows.iter().map(|row| {
            format!(
                "{},{},{},{},{},{},{},{},{},{},{}",
                fmt_sig(row.r),
                fmt_sig(row.t),
                row.state,
                fmt_sig(row.est_sx),
                fmt_sig(row.est_sy),
                fmt_sig(row.est_sz),
                fmt_sig(row.err_sx),
                fmt_sig(row.err_sy),
                fmt_sig(row.err_sz),
                fmt_sig(row.p_branch),
                fmt_sig(row.n_eff),
            )
        }),
    )
}

/// Exact reference curves for every state tag.
pub fn write_exact_csv(path: &Path, rows: &[ExactRow]) -> Result<()> {
    write_lines(
        path,
        "r,t,state_tag,sx,sy,sz",
        rows.iter().map(|row| {
            format!(
                "{},{},{},{},{},{}",
                fmt_sig(row.r),
                fmt_sig(row.t),
                row.state,
                fmt_sig(row.sx),
                fmt_sig(row.sy),
                fmt_sig(row.sz),
            )
        }),
    )
}

fn metric_line(row: &MetricRow, with_r: bool) -> String {
    let mut fields = Vec::with_capacity(16);
    if with_r {
        fields.push(fmt_sig(row.r));
    }
    fields.extend(
        [
            row.t,
            row.sx,
            row.sy,
            row.sz,
            row.rho00,
            row.rho01_re,
            row.rho01_im,
            row.rho11,
            row.recon00,
            row.recon01_re,
            row.recon01_im,
            row.recon11,
            row.recon_err,
            row.residual,
            row.impurity,
        ]
        .iter()
        .map(|&x| fmt_sig(x)),
    );
    fields.join(",")
}

const METRIC_COLUMNS: &str = "t,sx,sy,sz,rho00,rho01_re,rho01_im,rho11,recon00,recon01_re,recon01_im,recon11,recon_err,residual,impurity";

/// Metric trajectory for a single r (the filename carries the r value).
pub fn write_metric_csv(path: &Path, rows: &[MetricRow]) -> Result<()> {
    write_lines(path, METRIC_COLUMNS, rows.iter().map(|row| metric_line(row, false)))
}

/// Metric trajectories for all r in one table.
pub fn write_metric_csv_with_r(path: &Path, rows: &[MetricRow]) -> Result<()> {
    write_lines(
        path,
        &format!("r,{METRIC_COLUMNS}"),
        rows.iter().map(|row| metric_line(row, true)),
    )
}

/// Full report as pretty JSON, mirroring the CSVs plus diagnostics.
pub fn write_json(path: &Path, report: &RunReport) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| crate::error::Error::InvalidInput(format!("report serialization: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
