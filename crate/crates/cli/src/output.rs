//! Plain-text outputs. Every number is written with 17 significant digits
//! so files are byte-identical across runs and lossless on re-read.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use pt_cavity::diagnostics::ObservableSeries;
use pt_cavity::optics::TransverseField;
use serde::Serialize;

use crate::CliError;

pub const OBSERVABLES_HEADER: &str = "n,P,q,p_defined,q_theory_H,q_theory_NH";

/// Lossless, deterministic rendering of a float.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_file(path: &Path, contents: &str) -> Result<PathBuf, CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(path.to_path_buf())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("output types serialize infallibly");
    text.push('\n');
    write_file(path, &text)
}

/// Renders the observable series with the closed-form overlay. `theory(n)`
/// returns the harmonic and non-Hermitian parts for round trip `n`, or
/// `None` before the excitation.
pub fn observables_csv(series: &ObservableSeries, theory: impl Fn(u64) -> Option<(f64, f64)>) -> String {
    let mut out = String::with_capacity(96 * (series.len() + 1));
    out.push_str(OBSERVABLES_HEADER);
    out.push('\n');
    for i in 0..series.len() {
        let n = series.n[i];
        let q = series.q[i];
        let (h, nh) = theory(n).unzip();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            n,
            num(series.power[i]),
            opt(q),
            u8::from(q.is_some()),
            opt(h),
            opt(nh)
        );
    }
    out
}

/// Writes `observables.csv` into `dir`. The series must be non-empty with
/// strictly increasing round-trip indices.
pub fn emit_plot_data(
    series: &ObservableSeries,
    theory: impl Fn(u64) -> Option<(f64, f64)>,
    dir: &Path,
) -> Result<PathBuf, CliError> {
    if series.is_empty() {
        return Err(CliError::Config("cannot write an empty observable series".into()));
    }
    debug_assert!(series.n.windows(2).all(|w| w[0] < w[1]));
    write_file(&dir.join("observables.csv"), &observables_csv(series, theory))
}

pub fn field_csv(field: &TransverseField) -> String {
    let mut out = String::with_capacity(100 * (field.len() + 1));
    out.push_str("x,re,im,intensity\n");
    for (x, v) in field.positions().zip(&field.values) {
        let _ = writeln!(out, "{},{},{},{}", num(x), num(v.re), num(v.im), num(v.norm_sqr()));
    }
    out
}

/// Generic table with a header row.
pub fn table_csv(header: &[&str], rows: &[Vec<Option<f64>>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| opt(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
