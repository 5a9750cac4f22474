//! CSV and summary file writers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Nine significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.8e}")
}

/// Empty field for an absent value.
pub fn optional(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

#[derive(Clone, Debug)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Flat `key = value` report.
#[derive(Clone, Debug, Default)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn float(mut self, key: &str, x: f64) -> Self {
        self.entries.push((key.to_string(), float(x)));
        self
    }

    pub fn optional(mut self, key: &str, x: Option<f64>) -> Self {
        self.entries.push((key.to_string(), optional(x)));
        self
    }

    pub fn text(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)
        .map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Write { path: path.clone(), source })?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(float(0.0), "0.00000000e0");
        assert_eq!(float(31.25), "3.12500000e1");
        assert_eq!(float(-1.0 / 3.0), "-3.33333333e-1");
        assert_eq!(optional(None), "");
    }

    #[test]
    fn table_and_summary_render() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), String::new()]);
        assert_eq!(t.render(), "a,b\n1,\n");
        let s = Summary::new().float("x", 2.0).optional("y", None).text("ok", true);
        assert_eq!(s.render(), "x = 2.00000000e0\ny = \nok = true\n");
        assert_eq!(s.get("ok"), Some("true"));
    }
}
