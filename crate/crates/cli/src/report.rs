//! Check records and their CSV/JSON serialization.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use num_complex::Complex64;
use serde::Serialize;

use asymptopia::{Error, Result};

/// How a row's residual is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    AtMost,
    Below,
}

/// One CSV row: a check evaluated at one radius (or once, for radius-free checks).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub check_id: String,
    pub charge_pair: String,
    pub cone_id: String,
    pub radius: Option<f64>,
    pub value_re: f64,
    pub value_im: f64,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip)]
    pub comparison: Comparison,
}

impl Row {
    /// A row that passes when `residual ≤ threshold`.
    pub fn at_most(
        check_id: &str,
        charge_pair: &str,
        cone_id: &str,
        radius: Option<f64>,
        value: Complex64,
        residual: f64,
        threshold: f64,
    ) -> Self {
        Self::build(
            check_id,
            charge_pair,
            cone_id,
            radius,
            value,
            residual,
            threshold,
            Comparison::AtMost,
        )
    }

    /// A row that passes when `residual < threshold`.
    pub fn below(
        check_id: &str,
        charge_pair: &str,
        cone_id: &str,
        radius: Option<f64>,
        value: Complex64,
        residual: f64,
        threshold: f64,
    ) -> Self {
        Self::build(
            check_id,
            charge_pair,
            cone_id,
            radius,
            value,
            residual,
            threshold,
            Comparison::Below,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        check_id: &str,
        charge_pair: &str,
        cone_id: &str,
        radius: Option<f64>,
        value: Complex64,
        residual: f64,
        threshold: f64,
        comparison: Comparison,
    ) -> Self {
        let pass = match comparison {
            Comparison::AtMost => residual <= threshold,
            Comparison::Below => residual < threshold,
        };
        Row {
            check_id: check_id.to_string(),
            charge_pair: charge_pair.to_string(),
            cone_id: cone_id.to_string(),
            radius,
            value_re: value.re,
            value_im: value.im,
            residual,
            threshold,
            pass,
            comparison,
        }
    }

    fn sort_key(&self) -> (&str, &str, &str, f64) {
        (
            &self.check_id,
            &self.charge_pair,
            &self.cone_id,
            self.radius.unwrap_or(f64::NEG_INFINITY),
        )
    }
}

/// The finite tail window used by the sequence-algebra checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyRecord {
    pub window_start: u64,
    pub sample_count: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub config_hash: String,
    pub grid_checksum: String,
    pub tail_policy: PolicyRecord,
    /// Expected row count per check, fixed before any check runs.
    pub plan: Vec<(String, usize)>,
    pub rows: Vec<Row>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl Report {
    /// Sorts rows by `(check_id, charge_pair, cone_id, radius)`.
    pub fn normalize(&mut self) {
        self.rows.sort_by(|a, b| {
            let (x, y) = (a.sort_key(), b.sort_key());
            x.0.cmp(y.0)
                .then(x.1.cmp(y.1))
                .then(x.2.cmp(y.2))
                .then(x.3.total_cmp(&y.3))
        });
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// Checks that every planned check produced exactly its planned number of rows.
    pub fn verify_plan(&self) -> Result<()> {
        let mut planned = 0;
        for (id, n) in &self.plan {
            let got = self.rows.iter().filter(|r| &r.check_id == id).count();
            if got != *n {
                return Err(Error::Consistency(format!(
                    "check {id}: planned {n} rows, produced {got}"
                )));
            }
            planned += n;
        }
        if planned != self.rows.len() {
            return Err(Error::Consistency(format!(
                "planned {planned} rows, produced {}",
                self.rows.len()
            )));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        w.write_record([
            "check_id",
            "charge_pair",
            "cone_id",
            "radius",
            "value_re",
            "value_im",
            "residual",
            "threshold",
            "pass",
        ])
        .map_err(io_err)?;
        for r in &self.rows {
            w.serialize(r).map_err(io_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Usage(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Usage(format!("csv: {e}")))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|s| s + "\n")
            .map_err(|e| Error::Usage(format!("json: {e}")))
    }
}

fn io_err(e: csv::Error) -> Error {
    Error::Usage(format!("csv: {e}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Writes `report.csv` or `report.json` into `dir`, creating it if needed.
pub fn emit_report(report: &Report, format: Format, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| {
        Error::Config(format!(
            "cannot create output directory {}: {e}",
            dir.display()
        ))
    })?;
    let (name, body) = match format {
        Format::Csv => ("report.csv", report.to_csv()?),
        Format::Json => ("report.json", report.to_json()?),
    };
    let path = dir.join(name);
    fs::write(&path, body)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}
