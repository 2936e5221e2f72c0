//! Report, table and value writers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use qleg::classical::ErrorTable;
use qleg::VerificationReport;

use crate::eval::EvalRow;
use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// One JSON object per line.
    Json,
    Csv,
    Human,
}

pub struct Sink {
    out: Box<dyn Write>,
}

// Debug formatting is the shortest round-trip form and switches to an
// exponent for very small or large magnitudes.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self, Failure> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Self { out })
    }

    fn json_lines<T: serde::Serialize>(&mut self, items: &[T]) -> Result<(), Failure> {
        for item in items {
            serde_json::to_writer(&mut self.out, item).map_err(io::Error::from)?;
            self.out.write_all(b"\n")?;
        }
        self.out.flush()?;
        Ok(())
    }

    pub fn reports(&mut self, reports: &[VerificationReport], format: Format) -> Result<(), Failure> {
        match format {
            Format::Json => self.json_lines(reports),
            Format::Human => {
                for r in reports {
                    writeln!(self.out, "{r}")?;
                }
                let failed = reports.iter().filter(|r| !r.passed).count();
                writeln!(self.out, "{} reports, {} failed", reports.len(), failed)?;
                self.out.flush()?;
                Ok(())
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut self.out);
                w.write_record([
                    "identity_id",
                    "params",
                    "lhs",
                    "rhs",
                    "abs_residual",
                    "rel_residual",
                    "tolerance",
                    "passed",
                    "precision",
                ])?;
                for r in reports {
                    w.write_record([
                        r.identity_id.as_str().to_owned(),
                        r.params.to_string(),
                        num(r.lhs),
                        num(r.rhs),
                        num(r.abs_residual),
                        num(r.rel_residual),
                        num(r.tolerance),
                        r.passed.to_string(),
                        r.truncation.precision.to_string(),
                    ])?;
                }
                w.flush()?;
                Ok(())
            }
        }
    }

    /// `rank, eigenvalue, branch, x, predicted, deviation`.
    pub fn spectrum_csv(&mut self, reports: &[VerificationReport]) -> Result<(), Failure> {
        let mut w = csv::Writer::from_writer(&mut self.out);
        w.write_record(["rank", "eigenvalue", "branch", "x", "predicted", "deviation"])?;
        for r in reports {
            let field = |k: &str| r.params.get(k).map(|v| v.to_string()).unwrap_or_default();
            w.write_record([
                field("rank"),
                num(r.lhs),
                field("branch"),
                field("x"),
                num(r.rhs),
                num(r.abs_residual),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `p, q, probe, q_value, limit_value, abs_error`.
    pub fn scan_csv(&mut self, table: &ErrorTable) -> Result<(), Failure> {
        let mut w = csv::Writer::from_writer(&mut self.out);
        w.write_record(["p", "q", "probe", "q_value", "limit_value", "abs_error"])?;
        for row in &table.rows {
            w.write_record([
                row.p.to_string(),
                num(row.q),
                opt(row.probe),
                num(row.q_value),
                num(row.limit_value),
                num(row.abs_error),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn eval(&mut self, rows: &[EvalRow], format: Format) -> Result<(), Failure> {
        match format {
            Format::Json => self.json_lines(rows),
            Format::Human => {
                for r in rows {
                    writeln!(self.out, "{}_{}({}) = {}", r.family, r.n, r.x, r.value)?;
                }
                self.out.flush()?;
                Ok(())
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut self.out);
                w.write_record(["family", "n", "x", "value"])?;
                for r in rows {
                    w.serialize((&r.family, r.n, r.x, r.value))?;
                }
                w.flush()?;
                Ok(())
            }
        }
    }
}
