//! Plot-ready result tables as CSV or JSON.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 9] = ["sweep_var", "value", "scheme", "objective", "mean", "ci95_lo", "ci95_hi", "trials", "infeasible_count"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_var: String,
    pub value: f64,
    pub scheme: String,
    pub objective: String,
    pub mean: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    pub trials: usize,
    pub infeasible_count: usize,
}

impl SweepRow {
    /// Copy with every float rounded to 12 significant digits.
    pub fn rounded(&self) -> Self {
        Self {
            value: round12(self.value),
            mean: round12(self.mean),
            ci95_lo: round12(self.ci95_lo),
            ci95_hi: round12(self.ci95_hi),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

pub fn format12(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

pub fn round12(x: f64) -> f64 {
    format12(x).parse().unwrap_or(x)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.sweep_var.clone(),
            format12(r.value),
            r.scheme.clone(),
            r.objective.clone(),
            format12(r.mean),
            format12(r.ci95_lo),
            format12(r.ci95_hi),
            r.trials.to_string(),
            r.infeasible_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    let rounded: Vec<SweepRow> = rows.iter().map(SweepRow::rounded).collect();
    serde_json::to_writer_pretty(&mut out, &rounded)?;
    writeln!(out)?;
    Ok(())
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Writes `rows` to `path`, or to stdout when `path` is `None`.
pub fn emit_results(rows: &[SweepRow], format: OutputFormat, path: Option<&Path>) -> Result<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        OutputFormat::Csv => write_csv(rows, sink),
        OutputFormat::Json => write_json(rows, sink),
    }
}
