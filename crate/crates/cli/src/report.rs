//! Checked inequalities, CSV tables and the plain-text summary.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// One checked inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    /// `measured ≤ bound`.
    pub fn at_most(name: &str, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured <= bound,
            detail: format!("{measured:.6e} <= {bound:.6e}"),
        }
    }

    /// `measured > bound`.
    pub fn above(name: &str, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured > bound,
            detail: format!("{measured:.6e} > {bound:.6e}"),
        }
    }

    pub fn flag(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// A CSV file: header plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(file: impl Into<String>, header: &[&'static str]) -> Self {
        Self {
            file: file.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Outcome of one experiment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    /// Measured constants worth keeping next to the checks.
    pub notes: Vec<(String, f64)>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(scenario: &str) -> Self {
        Self {
            scenario: scenario.into(),
            ..Default::default()
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn note(&mut self, name: &str, value: f64) {
        self.notes.push((name.into(), value));
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.scenario);
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{tag}  {}: {}", c.name, c.detail);
        }
        for (name, v) in &self.notes {
            let _ = writeln!(s, "note  {name} = {v:.12e}");
        }
        for w in &self.warnings {
            let _ = writeln!(s, "WARN  {w}");
        }
        let status = if self.all_passed() { "pass" } else { "fail" };
        let _ = writeln!(s, "status: {status}");
        s
    }

    /// Writes every non-empty table and `summary.txt` into `dir`; empty
    /// tables are skipped with a warning.
    pub fn write(&mut self, dir: &Path) -> Result<Vec<PathBuf>, WriteError> {
        fs::create_dir_all(dir).map_err(|e| WriteError::new(dir, e))?;
        let mut written = Vec::new();
        for t in &self.tables {
            if t.rows.is_empty() {
                self.warnings.push(format!("{} has no rows; not written", t.file));
                continue;
            }
            let path = dir.join(&t.file);
            fs::write(&path, t.to_csv()).map_err(|e| WriteError::new(&path, e))?;
            written.push(path);
        }
        let path = dir.join("summary.txt");
        fs::write(&path, self.summary()).map_err(|e| WriteError::new(&path, e))?;
        written.push(path);
        Ok(written)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("writing {}: {source}", path.display())]
pub struct WriteError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

impl WriteError {
    fn new(path: &Path, source: io::Error) -> Self {
        Self {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_fixed_scientific_format() {
        let mut t = Table::new("x.csv", &["t", "v"]);
        t.push(vec![0.5, -1.0 / 3.0]);
        assert_eq!(t.to_csv(), "t,v\n5.000000000000e-1,-3.333333333333e-1\n");
    }

    #[test]
    fn empty_tables_are_skipped_with_warning() {
        let dir = std::env::temp_dir().join(format!("shocklab-report-{}", std::process::id()));
        let mut r = Report::new("empty");
        r.tables.push(Table::new("shift.csv", &["t"]));
        let written = r.write(&dir).unwrap();
        assert_eq!(written.len(), 1);
        assert!(r.warnings[0].contains("shift.csv"));
        let _ = fs::remove_dir_all(&dir);
    }
}
