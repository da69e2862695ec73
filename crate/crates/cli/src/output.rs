//! CSV writing with round-trip-exact numbers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::Context;

/// 17 significant digits in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|&v| num(v)).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut text = header.iter().map(|h| h.as_ref()).collect::<Vec<_>>().join(",");
        text.push('\n');
        Csv { text }
    }

    pub fn push(&mut self, values: &[f64]) {
        let _ = writeln!(self.text, "{}", csv_row(values));
    }

    pub fn push_fields<S: AsRef<str>>(&mut self, fields: &[S]) {
        let row = fields.iter().map(|f| f.as_ref()).collect::<Vec<_>>().join(",");
        let _ = writeln!(self.text, "{row}");
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        }
        fs::write(path, &self.text).with_context(|| format!("cannot write {}", path.display()))
    }
}
