//! Report documents and their JSON / CSV renderings.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::CliError;
use crate::job::OutputFormat;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub rows: Vec<f64>,
    pub cols: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorReport {
    pub gauge: String,
    pub row: Vec<f64>,
    pub col: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub method: &'static str,
    pub shape: [usize; 2],
    pub tolerance: f64,
    pub converged: bool,
    pub iterations: usize,
    pub max_marginal_residual: f64,
    pub matrix: Vec<Vec<f64>>,
    pub residuals: ResidualReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factors: Option<FactorReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub shape: [usize; 2],
    pub allowed_gap: f64,
    /// `None` when no closed form exists for the shape.
    pub max_gap: Option<f64>,
    pub iterative: SolveReport,
    pub closed_form: Option<SolveReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceDegreeReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub shape: [usize; 2],
    pub gauge: String,
    pub variables: Vec<String>,
    pub unit_ideal: bool,
    pub variable: String,
    pub degree: Option<usize>,
    pub bound: u64,
    pub basis: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeSweep {
    pub rows: usize,
    pub cols: usize,
    pub bound: u64,
    pub at_bound: usize,
    pub above_bound: usize,
    pub histogram: BTreeMap<usize, usize>,
    pub degrees: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub seed: u64,
    pub count: usize,
    pub shapes: Vec<ShapeSweep>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Report {
    Solve(SolveReport),
    Compare(CompareReport),
    InstanceDegree(InstanceDegreeReport),
    Sweep(SweepReport),
}

/// Long-format CSV row: `field,i,j,value` with 1-based indices.
type Row = [String; 4];

fn row(field: &str, i: Option<usize>, j: Option<usize>, value: impl ToString) -> Row {
    let idx = |k: Option<usize>| k.map(|k| (k + 1).to_string()).unwrap_or_default();
    [field.to_string(), idx(i), idx(j), value.to_string()]
}

fn solve_rows(prefix: &str, r: &SolveReport, out: &mut Vec<Row>) {
    let f = |name: &str| format!("{prefix}{name}");
    out.push(row(&f("method"), None, None, r.method));
    out.push(row(&f("converged"), None, None, r.converged));
    out.push(row(&f("iterations"), None, None, r.iterations));
    out.push(row(&f("max_marginal_residual"), None, None, r.max_marginal_residual));
    for (i, line) in r.matrix.iter().enumerate() {
        for (j, v) in line.iter().enumerate() {
            out.push(row(&f("s"), Some(i), Some(j), v));
        }
    }
    for (i, v) in r.residuals.rows.iter().enumerate() {
        out.push(row(&f("row_residual"), Some(i), None, v));
    }
    for (j, v) in r.residuals.cols.iter().enumerate() {
        out.push(row(&f("col_residual"), None, Some(j), v));
    }
    if let Some(fr) = &r.factors {
        out.push(row(&f("gauge"), None, None, &fr.gauge));
        for (i, v) in fr.row.iter().enumerate() {
            out.push(row(&f("r"), Some(i), None, v));
        }
        for (j, v) in fr.col.iter().enumerate() {
            out.push(row(&f("c"), None, Some(j), v));
        }
    }
}

impl Report {
    fn csv_rows(&self) -> Vec<Row> {
        let mut out = Vec::new();
        match self {
            Report::Solve(r) => {
                out.push(row("schema_version", None, None, r.schema_version));
                out.push(row("command", None, None, r.command));
                solve_rows("", r, &mut out);
            }
            Report::Compare(r) => {
                out.push(row("schema_version", None, None, r.schema_version));
                out.push(row("command", None, None, r.command));
                out.push(row("allowed_gap", None, None, r.allowed_gap));
                out.push(row(
                    "max_gap",
                    None,
                    None,
                    r.max_gap.map(|g| g.to_string()).unwrap_or_default(),
                ));
                solve_rows("iterative.", &r.iterative, &mut out);
                if let Some(c) = &r.closed_form {
                    solve_rows("closed_form.", c, &mut out);
                }
            }
            Report::InstanceDegree(r) => {
                out.push(row("schema_version", None, None, r.schema_version));
                out.push(row("command", None, None, r.command));
                out.push(row("gauge", None, None, &r.gauge));
                out.push(row("unit_ideal", None, None, r.unit_ideal));
                out.push(row("variable", None, None, &r.variable));
                out.push(row(
                    "degree",
                    None,
                    None,
                    r.degree.map(|d| d.to_string()).unwrap_or_default(),
                ));
                out.push(row("bound", None, None, r.bound));
                for (k, p) in r.basis.iter().enumerate() {
                    out.push(row("basis", Some(k), None, p));
                }
            }
            Report::Sweep(r) => {
                out.push(row("schema_version", None, None, r.schema_version));
                out.push(row("command", None, None, r.command));
                out.push(row("seed", None, None, r.seed));
                out.push(row("count", None, None, r.count));
                for s in &r.shapes {
                    let shape = format!("degree_{}x{}", s.rows, s.cols);
                    out.push(row(&format!("bound_{}x{}", s.rows, s.cols), None, None, s.bound));
                    for (k, d) in s.degrees.iter().enumerate() {
                        out.push(row(&shape, Some(k), None, d));
                    }
                }
            }
        }
        out
    }

    pub fn render(&self, format: OutputFormat) -> Result<String, CliError> {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Output(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let out = |e: csv::Error| CliError::Output(e.to_string());
                w.write_record(["field", "i", "j", "value"]).map_err(out)?;
                for r in self.csv_rows() {
                    w.write_record(&r).map_err(out)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
                String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
            }
        }
    }
}
