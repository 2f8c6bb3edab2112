use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// What a command produced: a JSON document, a flat table for CSV, and for
/// checking commands whether every assertion passed.
pub struct Report {
    pub json: Value,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub passed: Option<bool>,
}

impl Report {
    pub fn new(json: Value, headers: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        Self { json, headers, rows, passed: None }
    }

    pub fn with_verdict(mut self, passed: bool) -> Self {
        self.passed = Some(passed);
        self
    }
}

pub fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<()> {
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, &report.json)?;
            writeln!(sink)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(&report.headers)?;
            for row in &report.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
