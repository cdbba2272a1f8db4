//! Plain-text column tables used for every output file.
//!
//! ```text
//! # key = value          metadata, any number of lines
//! t	mean_x	dispersion     one header line
//! 0	0	1                  whitespace-separated rows
//! ```
//!
//! Numbers are written with Rust's shortest round-trip `Display`, which is
//! locale-independent.

use std::fmt::Write as _;
use std::io::{self, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("table has no header line")]
    MissingHeader,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { meta: Vec::new(), columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        let mut buf = String::new();
        for (k, v) in &self.meta {
            // keep one metadata entry per line
            let v = v.replace(['\n', '\r'], " ");
            let _ = writeln!(buf, "# {k} = {v}");
        }
        let _ = writeln!(buf, "{}", self.columns.join("\t"));
        w.write_all(buf.as_bytes())?;
        for row in &self.rows {
            buf.clear();
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    buf.push('\t');
                }
                let _ = write!(buf, "{v}");
            }
            buf.push('\n');
            w.write_all(buf.as_bytes())?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("table text is UTF-8")
    }

    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut table = Table::default();
        let mut have_header = false;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if have_header {
                    continue;
                }
                if let Some((k, v)) = rest.split_once('=') {
                    table.meta.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            if !have_header {
                table.columns = line.split_whitespace().map(str::to_string).collect();
                have_header = true;
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| TableError::Parse { line: n + 1, msg: format!("not a number: {tok:?}") })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != table.columns.len() {
                return Err(TableError::Parse {
                    line: n + 1,
                    msg: format!("expected {} columns, found {}", table.columns.len(), row.len()),
                });
            }
            table.rows.push(row);
        }
        if !have_header {
            return Err(TableError::MissingHeader);
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_with_meta() {
        let t = Table::parse("# gamma = 0.5\n# engine = ode\nt\tx\n0\t1\n0.5\t-2e-3\n").unwrap();
        assert_eq!(t.meta_value("gamma"), Some("0.5"));
        assert_eq!(t.columns, ["t", "x"]);
        assert_eq!(t.column("x").unwrap(), vec![1.0, -2e-3]);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(Table::parse("# only = meta\n"), Err(TableError::MissingHeader)));
        assert!(matches!(Table::parse("a b\n1\n"), Err(TableError::Parse { line: 2, .. })));
        assert!(matches!(Table::parse("a\nfoo\n"), Err(TableError::Parse { .. })));
    }

    proptest! {
        #[test]
        fn values_round_trip_bit_exact(vals in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..40)) {
            let mut t = Table::new(["v"]).with_meta("note", "multi\nline");
            for v in &vals {
                t.push_row(vec![*v]);
            }
            let back = Table::parse(&t.to_text()).unwrap();
            prop_assert_eq!(back.column("v").unwrap(), vals);
            prop_assert_eq!(back.meta_value("note"), Some("multi line"));
        }
    }
}
