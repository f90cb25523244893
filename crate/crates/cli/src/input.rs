//! Reading instances from disk.
//!
//! Numbers are kept as their decimal literals until a consumer decides how
//! to read them: the float solvers round each literal once, while the exact
//! engine parses it as a rational (`0.1` is `1/10`).

use std::path::Path;

use serde::Deserialize;
use serde_json::Number;
use sinkhorn_limit::algebra::{parse_decimal, Rational, RationalInstance};
use sinkhorn_limit::{GaugeFix, Marginals, PositiveMatrix};

use crate::error::CliError;

/// An instance with every number kept as a decimal literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralInstance {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<String>,
    pub row_sums: Vec<String>,
    pub col_sums: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    matrix: Vec<Vec<Number>>,
    row_sums: Vec<Number>,
    col_sums: Vec<Number>,
}

impl LiteralInstance {
    pub fn to_float(&self) -> Result<(PositiveMatrix, Marginals), CliError> {
        let parse = |v: &[String]| -> Result<Vec<f64>, CliError> {
            v.iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| sinkhorn_limit::Error::InvalidDecimal(s.clone()).into())
                })
                .collect()
        };
        let a = PositiveMatrix::new(self.rows, self.cols, parse(&self.entries)?)?;
        let m = Marginals::new(parse(&self.row_sums)?, parse(&self.col_sums)?)?;
        Ok((a, m))
    }

    pub fn to_rational(&self, gauge: GaugeFix) -> Result<RationalInstance, CliError> {
        let parse = |v: &[String]| v.iter().map(|s| parse_decimal(s)).collect::<Result<Vec<Rational>, _>>();
        Ok(RationalInstance::new(
            self.rows,
            self.cols,
            parse(&self.entries)?,
            parse(&self.row_sums)?,
            parse(&self.col_sums)?,
            gauge,
        )?)
    }
}

/// Parses a comma-separated list such as `1,1.5,2`.
pub fn parse_list(text: &str) -> Vec<String> {
    text.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Reads a JSON document `{matrix, row_sums, col_sums}`, or a headerless CSV
/// matrix whose marginals come from `rows` and `cols`.
pub fn parse_input(path: &Path, rows: Option<&str>, cols: Option<&str>) -> Result<LiteralInstance, CliError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: shown.clone(),
        source,
    })?;
    if text.trim_start().starts_with('{') {
        if rows.is_some() || cols.is_some() {
            return Err(CliError::Usage("--rows/--cols only apply to CSV input".into()));
        }
        parse_document(&shown, &text)
    } else {
        let (Some(rows), Some(cols)) = (rows, cols) else {
            return Err(CliError::Usage("CSV input needs --rows and --cols".into()));
        };
        parse_csv(&shown, &text, parse_list(rows), parse_list(cols))
    }
}

fn parse_document(path: &str, text: &str) -> Result<LiteralInstance, CliError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_string(),
        line: e.line() as u64,
        column: e.column() as u64,
        message: e.to_string(),
    })?;
    let rows = doc.matrix.len();
    let cols = doc.matrix.first().map_or(0, Vec::len);
    if let Some(i) = doc.matrix.iter().position(|r| r.len() != cols) {
        return Err(sinkhorn_limit::Error::ShapeMismatch {
            context: "matrix rows",
            expected: format!("{cols} entries"),
            found: format!("{} entries in row {}", doc.matrix[i].len(), i + 1),
        }
        .into());
    }
    let lit = |v: &[Number]| v.iter().map(Number::to_string).collect::<Vec<_>>();
    Ok(LiteralInstance {
        rows,
        cols,
        entries: doc.matrix.iter().flat_map(|r| lit(r)).collect(),
        row_sums: lit(&doc.row_sums),
        col_sums: lit(&doc.col_sums),
    })
}

fn parse_csv(
    path: &str,
    text: &str,
    row_sums: Vec<String>,
    col_sums: Vec<String>,
) -> Result<LiteralInstance, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut entries = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Parse {
                path: path.to_string(),
                line,
                column: 1,
                message: e.to_string(),
            }
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let line = record.position().map_or(0, |p| p.line());
        for (k, field) in record.iter().enumerate() {
            if parse_decimal(field).is_err() {
                return Err(CliError::Parse {
                    path: path.to_string(),
                    line,
                    column: k as u64 + 1,
                    message: format!("field {} is not a decimal number: {field:?}", k + 1),
                });
            }
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(CliError::Parse {
                    path: path.to_string(),
                    line,
                    column: 1,
                    message: format!("expected {c} fields, found {}", record.len()),
                })
            }
            Some(_) => {}
        }
        entries.extend(record.iter().map(str::to_string));
        rows += 1;
    }
    Ok(LiteralInstance {
        rows,
        cols: cols.unwrap_or(0),
        entries,
        row_sums,
        col_sums,
    })
}
