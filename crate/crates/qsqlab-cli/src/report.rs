//! Versioned JSON reports and CSV tables.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const SCHEMA: &str = "qsqlab.report/v1";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `value <= expected + tolerance`
    AtMost,
    /// `value >= expected - tolerance`
    AtLeast,
    /// `|value − expected| <= tolerance`
    Equal,
    /// `value > expected`
    Above,
    /// `value < expected`
    Below,
}

/// One claim checked by an experiment. `pass` is recomputable from the other
/// fields.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub claim: String,
    pub value: f64,
    pub expected: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    pub pass: bool,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
            Comparison::Equal => "==",
            Comparison::Above => ">",
            Comparison::Below => "<",
        }
    }
}

impl Check {
    pub fn new(claim: impl Into<String>, value: f64, comparison: Comparison, expected: f64, tolerance: f64) -> Self {
        let pass = match comparison {
            Comparison::AtMost => value <= expected + tolerance,
            Comparison::AtLeast => value >= expected - tolerance,
            Comparison::Equal => (value - expected).abs() <= tolerance,
            Comparison::Above => value > expected,
            Comparison::Below => value < expected,
        };
        Check { claim: claim.into(), value, expected, comparison, tolerance, pass }
    }

    pub fn at_most(claim: impl Into<String>, value: f64, bound: f64) -> Self {
        Check::new(claim, value, Comparison::AtMost, bound, 0.0)
    }

    pub fn at_least(claim: impl Into<String>, value: f64, bound: f64) -> Self {
        Check::new(claim, value, Comparison::AtLeast, bound, 0.0)
    }

    pub fn equal(claim: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        Check::new(claim, value, Comparison::Equal, expected, tolerance)
    }

    /// A yes/no fact recorded as 1 or 0.
    pub fn holds(claim: impl Into<String>, ok: bool) -> Self {
        Check::new(claim, ok as u8 as f64, Comparison::Equal, 1.0, 0.0)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub experiment: String,
    pub config: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    /// Experiment-specific raw results.
    pub details: Value,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Writes `report.json` and `tables/<name>.csv` under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Io(e.to_string());
        fs::create_dir_all(dir).map_err(io)?;
        fs::write(dir.join("report.json"), self.to_json() + "\n").map_err(io)?;
        if !self.tables.is_empty() {
            let tables = dir.join("tables");
            fs::create_dir_all(&tables).map_err(io)?;
            for t in &self.tables {
                let mut w = csv::Writer::from_path(tables.join(format!("{}.csv", t.name)))
                    .map_err(|e| CliError::Io(e.to_string()))?;
                w.write_record(&t.header).map_err(|e| CliError::Io(e.to_string()))?;
                for row in &t.rows {
                    w.write_record(row).map_err(|e| CliError::Io(e.to_string()))?;
                }
                w.flush().map_err(io)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flags_follow_the_comparison() {
        assert!(Check::at_most("a", 1.0, 1.0).pass);
        assert!(!Check::at_most("a", 1.1, 1.0).pass);
        assert!(Check::at_least("a", 0.9, 0.9).pass);
        assert!(Check::equal("a", 1.0 + 1e-10, 1.0, 1e-9).pass);
        assert!(!Check::new("a", 0.0, Comparison::Above, 0.0, 0.0).pass);
        assert!(!Check::holds("a", false).pass);
    }

    #[test]
    fn writes_report_and_tables() {
        let dir = std::env::temp_dir().join(format!("qsqlab-report-{}", std::process::id()));
        let mut t = Table::new("rows", &["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        let r = Report {
            schema: SCHEMA,
            experiment: "x".into(),
            config: BTreeMap::new(),
            checks: vec![Check::holds("ok", true)],
            details: Value::Null,
            wall_time_s: 0.0,
            tables: vec![t],
        };
        r.write_to(&dir).unwrap();
        let csv = fs::read_to_string(dir.join("tables/rows.csv")).unwrap();
        assert_eq!(csv, "a,b\n1,2\n");
        let json: Value = serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
        assert_eq!(json["schema"], SCHEMA);
        assert!(json.get("tables").is_none());
        fs::remove_dir_all(dir).unwrap();
    }
}
