//! CSV and manifest emission. One CSV per snapshot (x plus one column per
//! field), a diagnostics CSV with one column per functional, and a plain
//! text manifest with the run metadata. Numbers carry 17 significant
//! digits so files round-trip doubles exactly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::invariants::DiagnosticSeries;
use crate::model::State;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn snapshot_file_name(index: usize) -> String {
    format!("snapshot_{index:06}.csv")
}

/// Write one snapshot as `x,<field>,...` rows.
pub fn write_snapshot(
    dir: &Path,
    index: usize,
    state: &State,
    field_names: &[&str],
) -> Result<PathBuf> {
    let path = dir.join(snapshot_file_name(index));
    let mut out = String::new();
    out.push_str("x");
    for name in field_names.iter().take(state.arity()) {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let nodes = state.grid().nodes();
    for (j, &x) in nodes.iter().enumerate() {
        out.push_str(&fmt_f64(x));
        for f in state.fields() {
            out.push(',');
            out.push_str(&fmt_f64(f.values()[j]));
        }
        out.push('\n');
    }
    fs::write(&path, out)?;
    Ok(path)
}

/// Index of written snapshots: `index,time,file`.
pub fn write_snapshot_index(dir: &Path, entries: &[(usize, f64, String)]) -> Result<PathBuf> {
    let path = dir.join("snapshots.csv");
    let mut out = String::from("index,time,file\n");
    for (index, time, file) in entries {
        out.push_str(&format!("{index},{},{file}\n", fmt_f64(*time)));
    }
    fs::write(&path, out)?;
    Ok(path)
}

/// Diagnostics CSV: `t` plus one column per functional, one row per
/// recorded snapshot. Column order follows the functional list, so it is
/// stable across runs with the same diagnostics configuration.
pub fn write_diagnostics(dir: &Path, series: &DiagnosticSeries) -> Result<PathBuf> {
    let path = dir.join("diagnostics.csv");
    let mut out = String::from("t");
    for name in series.names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, &t) in series.times().iter().enumerate() {
        out.push_str(&fmt_f64(t));
        for name in series.names() {
            out.push(',');
            out.push_str(&fmt_f64(series.series(name).expect("column exists")[i]));
        }
        out.push('\n');
    }
    fs::write(&path, out)?;
    Ok(path)
}

/// Plain-text manifest: the canonical config followed by `[result]`
/// key = value lines supplied by the caller.
pub fn write_manifest(
    dir: &Path,
    canonical_config: &str,
    result_entries: &[(String, String)],
) -> Result<PathBuf> {
    let path = dir.join("manifest.txt");
    let mut file = fs::File::create(&path)?;
    file.write_all(canonical_config.as_bytes())?;
    writeln!(file)?;
    writeln!(file, "[result]")?;
    for (k, v) in result_entries {
        writeln!(file, "{k} = {v}")?;
    }
    Ok(path)
}
