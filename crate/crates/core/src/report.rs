//! CSV and JSON output for [`SolveReport`].

use std::io::{self, Write};

use crate::solver::SolveReport;

pub const CSV_HEADER: &str = "K,f_xbar,violation_xbar,f_xlast,wall_time_s";

/// One row per checkpoint. Reals are written with 12 significant digits in
/// scientific notation so that reports diff cleanly.
pub fn write_csv<W: Write>(report: &SolveReport, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for cp in &report.checkpoints {
        writeln!(
            out,
            "{},{:.11e},{:.11e},{:.11e},{:.11e}",
            cp.k, cp.f_xbar, cp.violation_xbar, cp.f_xlast, cp.wall_time_s
        )?;
    }
    Ok(())
}

pub fn to_csv_string(report: &SolveReport) -> String {
    let mut buf = Vec::new();
    write_csv(report, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}

pub fn to_json(report: &SolveReport) -> serde_json::Result<String> {
    serde_json::to_string_pretty(report)
}

pub fn from_json(text: &str) -> serde_json::Result<SolveReport> {
    serde_json::from_str(text)
}
