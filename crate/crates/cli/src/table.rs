use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::AppError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub metadata: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            metadata: Vec::new(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    /// Column index by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.column(name)?;
        self.rows
            .iter()
            .map(|r| match r[c] {
                Cell::Num(v) => Some(v),
                Cell::Text(_) => None,
            })
            .collect()
    }

    /// RFC 4180 text with `#` metadata lines first. Non-finite numbers are
    /// refused rather than written.
    pub fn to_csv(&self) -> Result<String, AppError> {
        let mut out = String::new();
        for m in &self.metadata {
            write!(out, "# {m}\r\n").expect("writing to a String");
        }
        out.push_str(&self.header.iter().map(|h| quote(h)).collect::<Vec<_>>().join(","));
        out.push_str("\r\n");
        for (i, row) in self.rows.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Num(v) if !v.is_finite() => {
                        return Err(AppError::Numeric(format!("non-finite value in row {i}, column `{}`", self.header[j])));
                    }
                    Cell::Num(v) => write!(out, "{v:.16e}").expect("writing to a String"),
                    Cell::Text(s) => out.push_str(&quote(s)),
                }
            }
            out.push_str("\r\n");
        }
        Ok(out)
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Column names `{prefix}_re`, `{prefix}_im`, `{prefix}_abs`.
pub fn complex_columns(prefix: &str) -> [String; 3] {
    [format!("{prefix}_re"), format!("{prefix}_im"), format!("{prefix}_abs")]
}

pub fn complex_cells(z: Complex64) -> [Cell; 3] {
    [Cell::Num(z.re), Cell::Num(z.im), Cell::Num(z.norm())]
}

/// Writes to `path`, or to stdout when `None`.
pub fn emit_csv(table: &ResultTable, path: Option<&Path>) -> Result<(), AppError> {
    let text = table.to_csv()?;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| AppError::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| AppError::Io(format!("stdout: {e}")))
        }
    }
}
