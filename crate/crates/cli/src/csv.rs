//! Deterministic CSV output.

use parametric_core::conventions::CONVENTIONS;
use sha2::{Digest, Sha256};

/// First 16 hex digits of the SHA-256 of the conventions sheet.
pub fn conventions_hash() -> String {
    let digest = Sha256::digest(CONVENTIONS.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub struct CsvTable {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
    verb: &'static str,
}

impl CsvTable {
    pub fn new(verb: &'static str, columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), verb }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "# parametric {} {}\n# conventions sha256:{}\n",
            self.verb,
            env!("CARGO_PKG_VERSION"),
            conventions_hash()
        );
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(|f| escape(f)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

fn escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}
