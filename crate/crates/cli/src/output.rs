//! CSV emission with fixed float formatting and JSON metadata sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};

use crate::config::ParamSet;

/// Locale-free float image with 17 significant digits.
pub fn fval(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parameter columns prefixed to every per-point row.
pub const PARAM_COLUMNS: [&str; 7] =
    ["eta", "omega", "gamma", "big_gamma", "drive_f", "detuning", "n_fock"];

pub fn param_fields(p: &ParamSet) -> Vec<String> {
    vec![
        fval(p.eta),
        fval(p.omega),
        fval(p.gamma),
        fval(p.big_gamma),
        fval(p.drive_f),
        fval(p.detuning),
        p.n_fock.to_string(),
    ]
}

/// Parameter fields, then empty value fields, then the error message.
pub fn error_row(p: &ParamSet, n_values: usize, message: &str) -> Vec<String> {
    let mut fields = param_fields(p);
    fields.extend((0..n_values).map(|_| String::new()));
    fields.push(message.to_string());
    fields
}

/// Per-point file name: `name.csv` alone, `name_000042.csv` in a sweep.
pub fn point_file(name: &str, index: usize, sweeping: bool) -> String {
    if sweeping {
        format!("{name}_{index:06}.csv")
    } else {
        format!("{name}.csv")
    }
}

/// One CSV table plus its metadata sidecar.
pub struct Table {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
    columns: Vec<String>,
}

impl Table {
    /// Create `dir/name` and write the header row.
    pub fn create(dir: &Path, name: &str, columns: &[&str]) -> Result<Table> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        let path = dir.join(name);
        let mut writer = csv::Writer::from_path(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        writer.write_record(columns).with_context(|| format!("writing {}", path.display()))?;
        Ok(Table {
            path,
            writer,
            columns: columns.iter().map(|c| c.to_string()).collect(),
        })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        ensure!(
            fields.len() == self.columns.len(),
            "row width {} does not match {} columns in {}",
            fields.len(),
            self.columns.len(),
            self.path.display()
        );
        self.writer.write_record(fields).with_context(|| format!("writing {}", self.path.display()))
    }

    /// Flush the CSV and write `<stem>.meta.json` beside it.
    pub fn finish(mut self, meta: &serde_json::Value) -> Result<()> {
        self.writer.flush().with_context(|| format!("flushing {}", self.path.display()))?;
        let mut full = meta.clone();
        full["columns"] = serde_json::json!(self.columns);
        write_sidecar(&self.path, &full)
    }
}

/// Write `<stem>.meta.json` next to an output file.
pub fn write_sidecar(path: &Path, meta: &serde_json::Value) -> Result<()> {
    let side = path.with_extension("meta.json");
    let text = serde_json::to_string_pretty(meta).context("serializing metadata")?;
    fs::write(&side, text + "\n").with_context(|| format!("writing {}", side.display()))
}
