//! Deterministic result emission. run.json carries no wall-clock data;
//! timings go to a separate file excluded from the reproducibility
//! guarantee. Every CSV starts with a comment naming units and the config
//! hash.

use serde::Serialize;
use std::io::Write;
use std::path::Path;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let body = serde_json::to_string_pretty(value)?;
    std::fs::write(path, body + "\n")?;
    Ok(())
}

pub struct CsvWriter {
    out: std::io::BufWriter<std::fs::File>,
}

impl CsvWriter {
    pub fn create(path: &Path, config_hash: &str, columns: &[&str]) -> anyhow::Result<Self> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# units=nondimensional-torus, config_hash={config_hash}")?;
        writeln!(out, "{}", columns.join(","))?;
        Ok(CsvWriter { out })
    }

    pub fn row(&mut self, fields: &[String]) -> anyhow::Result<()> {
        writeln!(self.out, "{}", fields.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> anyhow::Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}
