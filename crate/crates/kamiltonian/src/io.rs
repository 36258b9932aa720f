//! Output files: CSV tables with a one-line `#` metadata header, and JSON
//! documents. Numbers are written with Rust's shortest round-trip float
//! formatting and JSON objects with sorted keys, so identical inputs give
//! byte-identical files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::Result;

/// Writer of the artefacts of one run into a directory.
#[derive(Clone, Debug)]
pub struct OutputDir {
    root: PathBuf,
    meta: String,
    written: Vec<PathBuf>,
}

impl OutputDir {
    /// Creates `root` if needed. `meta` (a single line) heads every CSV file
    /// and is embedded in every JSON document.
    pub fn create(root: &Path, meta: &str) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), meta: meta.replace(['\n', '\r'], " "), written: Vec::new() })
    }

    /// Files written so far, in order.
    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Metadata line.
    pub fn meta(&self) -> &str {
        &self.meta
    }

    /// Writes `name` as CSV: `# <meta>`, the header row, then `rows`.
    pub fn csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<PathBuf>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let path = self.root.join(name);
        let mut file = BufWriter::new(File::create(&path)?);
        writeln!(file, "# {}", self.meta)?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes `name` as pretty JSON `{"metadata": <meta>, "result": value}`.
    pub fn json(&mut self, name: &str, value: Value) -> Result<PathBuf> {
        let path = self.root.join(name);
        let meta: Value = serde_json::from_str(&self.meta).unwrap_or_else(|_| Value::String(self.meta.clone()));
        let doc = serde_json::json!({ "metadata": meta, "result": value });
        let mut file = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut file, &doc)?;
        writeln!(file)?;
        file.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }
}

/// Formats a float for tables (shortest round-trip representation).
pub fn num(x: f64) -> String {
    // Print negative zero as `0`.
    format!("{}", if x == 0.0 { 0.0 } else { x })
}

/// Reads a CSV written by [`OutputDir::csv`]: returns the metadata line, the
/// header and the rows.
pub fn read_csv(path: &Path) -> Result<(String, Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path)?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let meta = first.strip_prefix("# ").unwrap_or(first).to_string();
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok((meta, header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_the_metadata_line() {
        let dir = std::env::temp_dir().join(format!("kamiltonian-io-{}", std::process::id()));
        let mut out = OutputDir::create(&dir, "{\"a\":1}").unwrap();
        let p = out.csv("t.csv", &["x", "y"], vec![vec![num(0.1), num(-2.0)]]).unwrap();
        let (meta, header, rows) = read_csv(&p).unwrap();
        assert_eq!(meta, "{\"a\":1}");
        assert_eq!(header, vec!["x", "y"]);
        assert_eq!(rows, vec![vec!["0.1".to_string(), "-2".to_string()]]);
        fs::remove_dir_all(dir).unwrap();
    }
}
