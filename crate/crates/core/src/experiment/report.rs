use super::bench::BenchmarkReport;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            _ => Err(Error::invalid("format", format!("expected json, csv or markdown, got `{s}`"))),
        }
    }
}

fn bucket_count(report: &BenchmarkReport) -> usize {
    report.config.alphas.len()
}

fn markdown(report: &BenchmarkReport) -> String {
    let k = bucket_count(report);
    let mut out = String::from("| Scheme | N |");
    for b in 0..k {
        let _ = write!(out, " B{b} |");
    }
    out.push_str("\n|---|---|");
    out.push_str(&"---:|".repeat(k));
    out.push('\n');
    for row in &report.rows {
        let _ = write!(out, "| {} | {} |", row.scheme, row.label);
        for c in &row.cells {
            match c.median {
                Some(v) => {
                    let _ = write!(out, " {v:.2} |");
                }
                None => out.push_str(" - |"),
            }
        }
        out.push('\n');
    }
    out
}

fn csv(report: &BenchmarkReport) -> String {
    let c = &report.config;
    let mut out = String::new();
    let _ = writeln!(out, "# sigma={}", c.sigma);
    let _ = writeln!(out, "# h={}", c.h);
    let _ = writeln!(out, "# S={}", c.s);
    let _ = writeln!(out, "# lambda={}", c.lambda);
    let _ = writeln!(out, "# realizations={}", c.realizations);
    let _ = writeln!(out, "# seed={}", c.seed);
    let _ = writeln!(out, "# suite={}", c.suite.join(";"));
    out.push_str("scheme,N,bucket,alpha,median_log10_eta,samples,failures\n");
    for row in &report.rows {
        for (b, cell) in row.cells.iter().enumerate() {
            let median = cell.median.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.scheme, row.label, b, c.alphas[b], median, cell.samples, cell.failures
            );
        }
    }
    out
}

/// Renders a report. JSON is canonical; markdown rounds to two decimals.
pub fn emit_table(report: &BenchmarkReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => csv(report),
        Format::Markdown => markdown(report),
    }
}
