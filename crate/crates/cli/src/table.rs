use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliResult;

/// Numeric table, one row per sample, written as CSV.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Shortest decimal that reads back to the same `f64`; `NaN` for masked
/// entries.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x}")
    }
}

pub fn masked(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Keeps the first `keep` columns plus those naming a selected method,
    /// either exactly or as the `err_<method>` companion.
    pub fn select(&self, keep: usize, methods: &[String]) -> Table {
        if methods.is_empty() {
            return self.clone();
        }
        let chosen: Vec<usize> = (0..self.columns.len())
            .filter(|&i| {
                let c = &self.columns[i];
                i < keep
                    || methods
                        .iter()
                        .any(|m| c == m || c.strip_prefix("err_") == Some(m.as_str()) || c.strip_prefix("abs_") == Some(m.as_str()))
            })
            .collect();
        Table {
            columns: chosen.iter().map(|&i| self.columns[i].clone()).collect(),
            rows: self.rows.iter().map(|r| chosen.iter().map(|&i| r[i]).collect()).collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}
