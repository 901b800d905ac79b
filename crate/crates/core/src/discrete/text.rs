//! Plain-text table format.
//!
//! ```text
//! # optional comments
//!       y0   y1
//! x0    0.4  0.1
//! x1    0.1  0.4
//! ```
//!
//! The first non-comment line holds the column labels; every following line
//! holds a row label and one decimal entry per column, whitespace separated.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::tables::JointPmf2;

pub fn parse_table<T: Scalar>(text: &str) -> Result<JointPmf2<T>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "missing header line".into(),
    })?;
    let cols: Vec<String> = header.split_whitespace().map(str::to_owned).collect();

    let mut rows = Vec::new();
    let mut values = Vec::new();
    for (line, l) in lines {
        let mut fields = l.split_whitespace();
        let label = fields.next().expect("nonempty line");
        let entries: Vec<&str> = fields.collect();
        if entries.len() != cols.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} entries, found {}", cols.len(), entries.len()),
            });
        }
        for e in entries {
            let v: f64 = e.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("not a decimal number: `{e}`"),
            })?;
            values.push(T::c(v));
        }
        rows.push(label.to_owned());
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "table has no rows".into(),
        });
    }
    let arr = Array2::from_shape_vec((rows.len(), cols.len()), values)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    JointPmf2::new(rows, cols, arr)
}

pub fn read_table<T: Scalar>(path: impl AsRef<Path>) -> Result<JointPmf2<T>> {
    parse_table(&std::fs::read_to_string(path)?)
}

pub fn format_table<T: Scalar>(j: &JointPmf2<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", j.col_labels().join(" "));
    for (label, row) in j.row_labels().iter().zip(j.probs().rows()) {
        out.push_str(label);
        for v in row {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}
