use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// Table with a `# config:` line, optional extra comment lines, and a header.
pub struct Csv {
    comments: Vec<String>,
    header: String,
    rows: Vec<String>,
}

impl Csv {
    pub fn new(config: &impl Serialize, header: &[&str]) -> Self {
        let cfg = serde_json::to_string(config).expect("config serializes");
        Self { comments: vec![format!("# config: {cfg}")], header: header.join(","), rows: Vec::new() }
    }

    /// Adds a `# key: value` line above the header.
    pub fn comment(&mut self, key: &str, value: impl std::fmt::Display) {
        self.comments.push(format!("# {key}: {value}"));
    }

    pub fn row<I, T>(&mut self, cells: I)
    where
        I: IntoIterator<Item = T>,
        T: std::fmt::Display,
    {
        self.rows.push(cells.into_iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","));
    }

    pub fn into_string(self) -> String {
        let mut lines = self.comments;
        lines.push(self.header);
        lines.extend(self.rows);
        lines.join("\n") + "\n"
    }
}

pub fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Writes to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}
