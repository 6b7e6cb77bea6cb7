//! Output files: delimiter-separated values with a commented provenance
//! header. Identical config + seed produces bitwise-identical files.

use std::fmt::Write as _;

use crate::config::RunConfig;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Serializes numbers with 17 significant digits, enough to round-trip f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `# `-prefixed provenance block: engine version plus the fully resolved
/// configuration.
pub fn provenance_header(kind: &str, config: &RunConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# sqz {kind} table, engine version {ENGINE_VERSION}");
    let _ = writeln!(out, "# resolved configuration:");
    for line in config.to_toml().lines() {
        let _ = writeln!(out, "#   {line}");
    }
    out
}

/// CSV assembly helper that keeps row layout uniform.
pub struct Table {
    text: String,
    columns: usize,
}

impl Table {
    pub fn new(header: String, columns: &[&str]) -> Table {
        let mut text = header;
        let _ = writeln!(text, "{}", columns.join(","));
        Table { text, columns: columns.len() }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns);
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn comment(&mut self, line: &str) {
        let _ = writeln!(self.text, "# {line}");
    }

    pub fn finish(self) -> String {
        self.text
    }
}
