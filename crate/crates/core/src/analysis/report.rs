use std::fmt::Display;
use std::io::Write;

use crate::error::Result;

/// Tabular experiment output with a `# key=value` header.
///
/// Every report records the natural-log convention, the producing version,
/// and whatever parameters (seed, sample counts, sizes) the experiment adds.
/// Rows are numeric; floats are written in shortest round-trip form so equal
/// inputs give byte-identical files.
#[derive(Debug, Clone, PartialEq)]
pub struct StatReport {
    pub experiment: String,
    pub params: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub summary: Vec<(String, f64)>,
}

pub const VERSION: &str = concat!("fgsw-core ", env!("CARGO_PKG_VERSION"));

impl StatReport {
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        StatReport {
            experiment: experiment.to_string(),
            params: vec![
                ("log_base".into(), "e".into()),
                ("version".into(), VERSION.into()),
            ],
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    /// Sets (or replaces) a header parameter.
    pub fn param(&mut self, key: &str, value: impl Display) -> &mut Self {
        let value = value.to_string();
        match self.params.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.params.push((key.to_string(), value)),
        }
        self
    }

    pub fn get_param(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn set_summary(&mut self, key: &str, value: f64) -> &mut Self {
        match self.summary.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.summary.push((key.to_string(), value)),
        }
        self
    }

    pub fn summary(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Appends the rows of a report with identical columns.
    pub fn extend_rows(&mut self, other: &StatReport) {
        assert_eq!(self.columns, other.columns, "column mismatch");
        self.rows.extend(other.rows.iter().cloned());
    }

    /// `<experiment>_<graph>_<n>_<seed>.csv`
    pub fn file_name(&self, graph: &str, n: usize, seed: u64) -> String {
        format!("{}_{graph}_{n}_{seed}.csv", self.experiment)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# experiment={}", self.experiment)?;
        for (k, v) in &self.params {
            writeln!(out, "# {k}={v}")?;
        }
        for (k, v) in &self.summary {
            writeln!(out, "# summary.{k}={v}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("utf8")
    }
}
