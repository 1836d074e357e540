//! Report model and its CSV and JSON renderings.
//!
//! CSV layout: `#`-prefixed metadata lines (version, command, parameters,
//! summary values, checks), then one header row and the data rows. Numbers
//! are written with 17 significant digits in exponent form, independent of
//! locale.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    List(Vec<f64>),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::List(vs) => vs.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(" "),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::List(vs) => json!(vs),
        }
    }
}

/// A tolerance check; a failed check makes the run exit with status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value ≤ tol`.
    pub fn below(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tol,
            passed: value <= tol,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 0.0 } else { 1.0 },
            tol: 0.0,
            passed: ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub command: String,
    pub timestamp: Option<u64>,
    pub params: Vec<(String, Cell)>,
    pub columns: Vec<&'static str>,
    /// Columns present only in JSON rows; they follow `columns` in each row.
    pub json_columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Cell)>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(command: &str, columns: &[&'static str]) -> Self {
        Self {
            command: command.to_string(),
            columns: columns.to_vec(),
            ..Self::default()
        }
    }

    pub fn param(&mut self, key: &str, v: impl Into<Cell>) {
        self.params.push((key.to_string(), v.into()));
    }

    pub fn summary(&mut self, key: &str, v: impl Into<Cell>) {
        self.summary.push((key.to_string(), v.into()));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# version={VERSION} command={}", self.command);
        if let Some(t) = self.timestamp {
            let _ = writeln!(out, "# timestamp={t}");
        }
        for (k, v) in &self.params {
            let _ = writeln!(out, "# param {k}={}", v.csv());
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# summary {k}={}", v.csv());
        }
        for c in &self.checks {
            let _ = writeln!(
                out,
                "# check {} value={} tol={} passed={}",
                c.name,
                fmt_num(c.value),
                fmt_num(c.tol),
                c.passed
            );
        }
        let _ = writeln!(out, "# passed={}", self.passed());
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row[..self.columns.len()].iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let obj = |pairs: &[(String, Cell)]| {
            Value::Object(pairs.iter().map(|(k, v)| (k.clone(), v.json())).collect())
        };
        let names: Vec<&str> = self.columns.iter().chain(&self.json_columns).copied().collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    names
                        .iter()
                        .zip(r)
                        .map(|(k, v)| (k.to_string(), v.json()))
                        .collect::<Map<_, _>>(),
                )
            })
            .collect();
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({"name": c.name, "value": c.value, "tol": c.tol, "passed": c.passed}))
            .collect();
        let mut v = json!({
            "version": VERSION,
            "command": self.command,
            "params": obj(&self.params),
            "columns": names,
            "rows": rows,
            "summary": obj(&self.summary),
            "checks": checks,
            "passed": self.passed(),
        });
        if let Some(t) = self.timestamp {
            v["timestamp"] = json!(t);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("curv", &["lambda", "r"]);
        r.json_columns = vec!["converged"];
        r.rows.push(vec![0.5.into(), (1.0 / 3.0).into(), true.into()]);
        r.checks.push(Check::below("dev", 0.1, 0.05));
        r
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], format!("# version={VERSION} command=curv"));
        assert!(lines.contains(&"lambda,r"));
        assert_eq!(lines.last().unwrap(), &"5.0000000000000000e-1,3.3333333333333331e-1");
        assert!(csv.contains("passed=false"));
    }

    #[test]
    fn json_rows_are_keyed() {
        let v = sample().to_json();
        assert_eq!(v["version"], VERSION);
        assert_eq!(v["rows"][0]["converged"], true);
        assert_eq!(v["rows"][0]["lambda"], 0.5);
        assert_eq!(v["passed"], false);
        assert!(v.get("timestamp").is_none());
    }

    #[test]
    fn seventeen_significant_digits() {
        let s = fmt_num(std::f64::consts::PI);
        assert_eq!(s.split('e').next().unwrap().replace('.', "").len(), 17);
        assert_eq!(s.parse::<f64>().unwrap(), std::f64::consts::PI);
    }
}
