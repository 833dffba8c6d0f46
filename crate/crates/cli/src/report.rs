//! JSON reports and CSV tables.

use std::path::{Path, PathBuf};

use renorm_core::{BoundReport, Complex64, EnergyBreakdown};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{emit_config, ProblemConfig};
use crate::error::CliError;

/// Significant digits of every float in reports and tables.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

/// Rounds every float in a JSON tree.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

/// Plot-ready table: a header row naming the columns, then numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| CliError::io("writing table", e))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| format_float(x))).map_err(|e| CliError::io("writing table", e))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io("writing table", e))?;
        Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
    }
}

fn format_float(x: f64) -> String {
    let r = round_sig(x);
    if r.is_nan() {
        "nan".into()
    } else if r == 0.0 || (1e-4..1e12).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// What a command produced: results, tables, and any violated contracts.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub results: Value,
    pub tables: Vec<Table>,
    pub violations: Vec<String>,
}

impl Outcome {
    pub fn new(results: Value) -> Self {
        Self { results, tables: Vec::new(), violations: Vec::new() }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.tables.push(table);
        self
    }

    /// Records a violation when `ok` is false.
    pub fn require(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.violations.push(message());
        }
    }
}

/// SHA-256 of the canonical TOML form of the config.
pub fn config_hash(config: &ProblemConfig) -> String {
    format!("{:x}", Sha256::digest(emit_config(config).as_bytes()))
}

/// Full report document.
///
/// `timestamp` is informational and kept out of the config hash; pass
/// `None` for byte-identical reports.
pub fn emit_report(command: &str, config: &ProblemConfig, outcome: &Outcome, timestamp: Option<u64>) -> Value {
    let mut doc = Map::new();
    doc.insert("tool".into(), json!("renorm"));
    doc.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    doc.insert("command".into(), json!(command));
    doc.insert("config_hash".into(), json!(config_hash(config)));
    doc.insert("domain".into(), json!(config.domain().to_string()));
    doc.insert("resolution".into(), json!(config.resolution.to_string()));
    doc.insert("seed".into(), json!(config.seed));
    doc.insert("status".into(), json!(if outcome.violations.is_empty() { "ok" } else { "contract-violation" }));
    doc.insert("violations".into(), json!(outcome.violations));
    doc.insert("results".into(), round_value(outcome.results.clone()));
    if let Some(t) = timestamp {
        doc.insert("timestamp".into(), json!(t));
    }
    Value::Object(doc)
}

/// Path of table `name` next to the report: `out.json` gives `out.name.csv`.
pub fn table_path(report: &Path, name: &str) -> PathBuf {
    let stem = report.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    report.with_file_name(format!("{stem}.{name}.csv"))
}

pub fn point(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn points(zs: &[Complex64]) -> Value {
    Value::Array(zs.iter().copied().map(point).collect())
}

pub fn breakdown(e: &EnergyBreakdown) -> Value {
    json!({
        "weighted_term": e.weighted_term,
        "b_term": e.b_term,
        "h_term": e.h_term,
        "lift_term": e.lift_term,
        "total": e.total,
        "consistency_defect": e.consistency_defect(),
    })
}

pub fn bound(b: &BoundReport) -> Value {
    json!({ "lhs": b.lhs, "rhs": b.rhs, "holds": b.holds, "slack": b.slack, "context": b.context })
}
