//! Tabular output.
//!
//! CSV with a `#`-prefixed metadata header carrying enough to reproduce the
//! run (command, config hash, seed, tool version). Bodies are byte-identical
//! across reruns with the same config and seed.

use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

/// A rectangular table of preformatted cells plus reproduction metadata.
#[derive(Debug, Clone)]
pub struct CurveTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub metadata: Vec<(String, String)>,
    /// Extra `# key = value` lines after the body (fit results and the like).
    pub footer: Vec<(String, String)>,
}

impl CurveTable {
    pub fn new(command: &str, config_hash: &str, seed: u64, columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: vec![
                ("command".into(), command.into()),
                ("config_sha256".into(), config_hash.into()),
                ("seed".into(), seed.to_string()),
                ("tool_version".into(), env!("CARGO_PKG_VERSION").into()),
            ],
            footer: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        assert_eq!(
            cells.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(cells);
    }

    pub fn add_metadata(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.push((key.into(), value.into()));
    }

    pub fn add_footer(&mut self, key: &str, value: impl Into<String>) {
        self.footer.push((key.into(), value.into()));
    }

    /// Render as CSV: `#` metadata block, header row, data rows, `#` footer.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.metadata {
            out.push_str(&format!("# {key} = {value}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        for (key, value) in &self.footer {
            out.push_str(&format!("# {key} = {value}\n"));
        }
        out
    }

    /// Write `<dir>/<name>` and return the path.
    pub fn write_to(&self, dir: &Path, name: &str) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        let mut file = std::fs::File::create(&path)?;
        file.write_all(self.to_csv().as_bytes())?;
        Ok(path)
    }
}

/// Shortest-round-trip float formatting; stable across runs. Values far
/// from unity switch to scientific notation.
pub fn fmt_float(value: f64) -> String {
    if value == 0.0 {
        "0".into()
    } else if value.abs() < 1e-4 || value.abs() >= 1e15 {
        format!("{value:e}")
    } else {
        format!("{value}")
    }
}

/// SHA-256 hex digest of the canonical config text.
pub fn config_hash(canonical: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut table = CurveTable::new("demo", "abc123", 7, &["a", "b"]);
        table.push_row(vec![fmt_float(1.5), fmt_float(-2.0)]);
        table.add_footer("tau_s", fmt_float(4.55e-4));
        let csv = table.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# command = demo"));
        assert!(lines.contains(&"a,b"));
        assert!(lines.contains(&"1.5,-2"));
        assert!(lines.last().unwrap().starts_with("# tau_s"));
    }

    #[test]
    #[should_panic]
    fn ragged_rows_panic() {
        let mut table = CurveTable::new("demo", "x", 1, &["a", "b"]);
        table.push_row(vec!["1".into()]);
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(config_hash("x"), config_hash("x"));
        assert_ne!(config_hash("x"), config_hash("y"));
        assert_eq!(config_hash("").len(), 64);
    }
}
