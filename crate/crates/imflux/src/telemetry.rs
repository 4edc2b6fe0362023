//! Telemetry records and their CSV serialization.
//!
//! One record per logged step. Column order is the struct field order and is
//! part of the schema; bump [`crate::TELEMETRY_SCHEMA`] when changing it.
//!
//! Two columns need care when reading plots: `delta_e` is the raw stacked
//! determinant at the log instant (diagnostic, nonzero whenever the chains
//! carry signal), while `int_delta_e_sq` integrates the *gated* value the
//! estimators actually consumed (zero until the enable time). Closed-form
//! error-decay checks must use the gated integral.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq)]
pub struct TelemetryRecord {
    pub t: f64,
    // Plant ground truth.
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub i_a: f64,
    pub i_b: f64,
    pub omega: f64,
    pub v_a: f64,
    pub v_b: f64,
    // Observer outputs.
    pub lambda_hat_a: f64,
    pub lambda_hat_b: f64,
    pub rr_hat: f64,
    pub tl_hat: f64,
    pub omega_hat: f64,
    // Errors against simulator ground truth.
    pub flux_err_norm: f64,
    pub rr_err: f64,
    pub tl_err: f64,
    pub omega_err: f64,
    // Mixing diagnostics.
    pub delta_e: f64,
    pub delta_m: f64,
    pub int_delta_e_sq: f64,
    pub int_delta_m_sq: f64,
    // Per-chain regression residuals |z - phi . theta_true| / (1 + |z|).
    pub res_e_a1: f64,
    pub res_e_a2: f64,
    pub res_e_a3: f64,
    pub res_e_a4: f64,
    pub res_e_a5: f64,
    pub res_e_a6: f64,
    // Mixed-regression residual |zeta - delta_e . theta_true| / (1 + |zeta|).
    pub res_e_mixed: f64,
    // Mechanical residual |z_m - phi_m . (tl, omega)| / (1 + |z_m|).
    pub res_m: f64,
    // Relative error of adj(phi) . phi = det(phi) . I at this instant.
    pub adj_identity_rel: f64,
}

impl TelemetryRecord {
    pub fn res_e_max(&self) -> f64 {
        self.res_e_a1
            .max(self.res_e_a2)
            .max(self.res_e_a3)
            .max(self.res_e_a4)
            .max(self.res_e_a5)
            .max(self.res_e_a6)
    }

    /// Column value by header name; used by the plot-data exporter.
    pub fn column(&self, name: &str) -> Option<f64> {
        let v = match name {
            "t" => self.t,
            "lambda_a" => self.lambda_a,
            "lambda_b" => self.lambda_b,
            "i_a" => self.i_a,
            "i_b" => self.i_b,
            "omega" => self.omega,
            "v_a" => self.v_a,
            "v_b" => self.v_b,
            "lambda_hat_a" => self.lambda_hat_a,
            "lambda_hat_b" => self.lambda_hat_b,
            "rr_hat" => self.rr_hat,
            "tl_hat" => self.tl_hat,
            "omega_hat" => self.omega_hat,
            "flux_err_norm" => self.flux_err_norm,
            "rr_err" => self.rr_err,
            "tl_err" => self.tl_err,
            "omega_err" => self.omega_err,
            "delta_e" => self.delta_e,
            "delta_m" => self.delta_m,
            "int_delta_e_sq" => self.int_delta_e_sq,
            "int_delta_m_sq" => self.int_delta_m_sq,
            "res_e_a1" => self.res_e_a1,
            "res_e_a2" => self.res_e_a2,
            "res_e_a3" => self.res_e_a3,
            "res_e_a4" => self.res_e_a4,
            "res_e_a5" => self.res_e_a5,
            "res_e_a6" => self.res_e_a6,
            "res_e_mixed" => self.res_e_mixed,
            "res_m" => self.res_m,
            "adj_identity_rel" => self.adj_identity_rel,
            _ => return None,
        };
        Some(v)
    }
}

pub const COLUMN_NAMES: [&str; 30] = [
    "t",
    "lambda_a",
    "lambda_b",
    "i_a",
    "i_b",
    "omega",
    "v_a",
    "v_b",
    "lambda_hat_a",
    "lambda_hat_b",
    "rr_hat",
    "tl_hat",
    "omega_hat",
    "flux_err_norm",
    "rr_err",
    "tl_err",
    "omega_err",
    "delta_e",
    "delta_m",
    "int_delta_e_sq",
    "int_delta_m_sq",
    "res_e_a1",
    "res_e_a2",
    "res_e_a3",
    "res_e_a4",
    "res_e_a5",
    "res_e_a6",
    "res_e_mixed",
    "res_m",
    "adj_identity_rel",
];

fn schema_line() -> String {
    format!("# imflux-telemetry schema={}\n", crate::TELEMETRY_SCHEMA)
}

pub fn write_csv<W: Write>(mut out: W, records: &[TelemetryRecord]) -> Result<()> {
    out.write_all(schema_line().as_bytes())
        .map_err(|e| Error::Telemetry(format!("write failed: {e}")))?;
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)
            .map_err(|e| Error::Telemetry(format!("serialize failed: {e}")))?;
    }
    w.flush()
        .map_err(|e| Error::Telemetry(format!("flush failed: {e}")))?;
    Ok(())
}

pub fn to_csv_bytes(records: &[TelemetryRecord]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(&mut buf, records)?;
    Ok(buf)
}

pub fn write_csv_file(path: &Path, records: &[TelemetryRecord]) -> Result<()> {
    let file = std::fs::File::create(path)
        .map_err(|e| Error::Telemetry(format!("cannot create {}: {e}", path.display())))?;
    write_csv(std::io::BufWriter::new(file), records)
}

pub fn read_csv_file(path: &Path) -> Result<Vec<TelemetryRecord>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Telemetry(format!("cannot open {}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(std::io::BufReader::new(file));
    // Name every missing column up front instead of failing row by row.
    // Extra columns are tolerated so enriched telemetry still checks.
    let headers = rdr
        .headers()
        .map_err(|e| Error::Telemetry(format!("{}: unreadable header: {e}", path.display())))?;
    let present: Vec<&str> = headers.iter().collect();
    let missing: Vec<&str> = COLUMN_NAMES
        .iter()
        .copied()
        .filter(|c| !present.contains(c))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Telemetry(format!(
            "{}: missing telemetry columns: {}",
            path.display(),
            missing.join(", ")
        )));
    }
    let mut out = Vec::new();
    for (n, row) in rdr.deserialize::<TelemetryRecord>().enumerate() {
        let rec = row.map_err(|e| {
            Error::Telemetry(format!("{} row {}: {e}", path.display(), n + 1))
        })?;
        out.push(rec);
    }
    if out.is_empty() {
        return Err(Error::Telemetry(format!(
            "{} contains no telemetry rows",
            path.display()
        )));
    }
    Ok(out)
}

/// First index with `t >= t_from`, or `None` if the log ends earlier.
pub fn index_at(records: &[TelemetryRecord], t_from: f64) -> Option<usize> {
    let idx = records.partition_point(|r| r.t < t_from);
    (idx < records.len()).then_some(idx)
}
