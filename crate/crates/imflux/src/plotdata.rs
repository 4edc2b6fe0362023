//! Plot-data extraction: turn telemetry records into small per-selector CSV
//! series (time plus one or more columns) ready for any plotting tool.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::telemetry::TelemetryRecord;

/// Named selectors that expand to one or more telemetry columns. Any raw
/// telemetry column name is also accepted as a selector.
const ALIASES: &[(&str, &[&str])] = &[
    ("flux_error_norm", &["flux_err_norm"]),
    ("excitation", &["int_delta_e_sq", "int_delta_m_sq"]),
    ("estimates", &["rr_hat", "tl_hat", "omega_hat"]),
    ("estimate_errors", &["rr_err", "tl_err", "omega_err"]),
    (
        "residuals",
        &[
            "res_e_a1",
            "res_e_a2",
            "res_e_a3",
            "res_e_a4",
            "res_e_a5",
            "res_e_a6",
            "res_e_mixed",
            "res_m",
        ],
    ),
    ("determinants", &["delta_e", "delta_m"]),
];

/// Expand a selector into telemetry column names, or `None` if it matches
/// neither an alias nor a column.
pub fn resolve_selector(name: &str) -> Option<Vec<&'static str>> {
    if let Some((_, cols)) = ALIASES.iter().find(|(alias, _)| *alias == name) {
        return Some(cols.to_vec());
    }
    crate::telemetry::COLUMN_NAMES
        .iter()
        .find(|c| **c == name && **c != "t")
        .map(|c| vec![*c])
}

/// Write one CSV per selector into `out_dir` (`<selector>.csv`, header
/// `t,<columns...>`). With `log10` set, every non-time value v is emitted as
/// log10(max(|v|, 1e-300)) so decay rates read as straight lines.
///
/// An empty selector list and an unknown selector are both configuration
/// faults: the caller asked for a plot and silence would hide the mistake.
pub fn emit_plot_data(
    records: &[TelemetryRecord],
    selectors: &[String],
    out_dir: &Path,
    log10: bool,
) -> Result<Vec<PathBuf>> {
    if selectors.is_empty() {
        return Err(Error::config(vec![
            "plot-data requires at least one --select".into()
        ]));
    }
    let mut resolved = Vec::with_capacity(selectors.len());
    let mut problems = Vec::new();
    for s in selectors {
        match resolve_selector(s) {
            Some(cols) => resolved.push((s.as_str(), cols)),
            None => problems.push(format!(
                "unknown plot selector {s:?}; valid selectors are telemetry column names or one of: {}",
                ALIASES
                    .iter()
                    .map(|(a, _)| *a)
                    .collect::<Vec<_>>()
                    .join(", ")
            )),
        }
    }
    if !problems.is_empty() {
        return Err(Error::config(problems));
    }
    if records.is_empty() {
        return Err(Error::Telemetry("no telemetry records to plot".into()));
    }

    fs::create_dir_all(out_dir)?;
    let mut written = Vec::with_capacity(resolved.len());
    for (name, cols) in resolved {
        let path = out_dir.join(format!("{name}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        let mut header = vec!["t"];
        header.extend(cols.iter().copied());
        w.write_record(&header)
            .map_err(|e| Error::Telemetry(e.to_string()))?;
        let mut row = Vec::with_capacity(header.len());
        for r in records {
            row.clear();
            row.push(r.t.to_string());
            for c in &cols {
                let v = r
                    .column(c)
                    .expect("resolved selectors only name real columns");
                let v = if log10 { v.abs().max(1e-300).log10() } else { v };
                row.push(v.to_string());
            }
            w.write_record(&row)
                .map_err(|e| Error::Telemetry(e.to_string()))?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}
