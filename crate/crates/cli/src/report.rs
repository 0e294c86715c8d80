//! Report files: `summary.json`, `trajectory.csv` and `portfolios.csv`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use amak_core::backtest::{BacktestConfig, BacktestResult};
use amak_core::market_data::format_significant;
use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const CSV_DIGITS: usize = 12;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct DataSource {
    /// Input path, or `synthetic` for generated data.
    pub source: String,
    pub sha256: String,
    pub n_price_rows: usize,
    pub assets: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub data: DataSource,
    pub config: BacktestConfig,
    pub started_at: String,
    pub finished_at: String,
}

impl RunManifest {
    fn comment(&self) -> String {
        format!(
            "# seed={} data_sha256={} version={}",
            self.seed, self.data.sha256, self.version
        )
    }
}

#[derive(Debug, Serialize)]
struct StrategySummary<'a> {
    strategy: &'a str,
    mdd: f64,
    apy: f64,
    asr: f64,
    terminal_wealth: f64,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    manifest: &'a RunManifest,
    eval_start: usize,
    evaluated_days: usize,
    strategies: Vec<StrategySummary<'a>>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

pub fn write_summary(path: &Path, manifest: &RunManifest, result: &BacktestResult) -> Result<()> {
    let summary = Summary {
        manifest,
        eval_start: result.eval_start,
        evaluated_days: result.n_evaluated(),
        strategies: result
            .strategies
            .iter()
            .map(|s| StrategySummary {
                strategy: s.kind.name(),
                mdd: s.metrics.mdd,
                apy: s.metrics.apy,
                asr: s.metrics.asr,
                terminal_wealth: s.trajectory.terminal(),
            })
            .collect(),
    };
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, &summary)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// One row per wealth value; `day` is the relatives row the value was realised on
/// (the first row is the starting wealth at `eval_start`).
pub fn write_trajectory(
    path: &Path,
    manifest: &RunManifest,
    result: &BacktestResult,
) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{}", manifest.comment())?;
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["day".to_owned()];
    header.extend(result.strategies.iter().map(|s| s.kind.name().to_owned()));
    wtr.write_record(&header)?;
    for i in 0..=result.n_evaluated() {
        let mut record = vec![(result.eval_start + i).to_string()];
        record.extend(
            result
                .strategies
                .iter()
                .map(|s| format_significant(s.trajectory.values()[i], CSV_DIGITS)),
        );
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

/// One row per evaluated day and strategy; `day` is the relatives row the weights apply to.
pub fn write_portfolios(
    path: &Path,
    manifest: &RunManifest,
    result: &BacktestResult,
) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{}", manifest.comment())?;
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["day".to_owned(), "strategy".to_owned()];
    header.extend(manifest.data.assets.iter().cloned());
    wtr.write_record(&header)?;
    for i in 0..result.n_evaluated() {
        for s in &result.strategies {
            let mut record = vec![
                (result.eval_start + i).to_string(),
                s.kind.name().to_owned(),
            ];
            record.extend(
                s.portfolios[i]
                    .weights()
                    .iter()
                    .map(|&w| format_significant(w, CSV_DIGITS)),
            );
            wtr.write_record(&record)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
