use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use amak_core::backtest::StrategyKind;
use amak_core::market_data::{read_prices, write_prices};
use amak_core::{compute_relatives, generate_synthetic, run_backtest, PriceSeries, SyntheticSpec};
use anyhow::{Context, Result};
use chrono::{SecondsFormat, Utc};
use clap::{ArgGroup, Args, Parser, Subcommand};
use log::{info, LevelFilter};

mod config;
mod report;

use config::{parse_strategies, FileConfig};
use report::{sha256_hex, DataSource, RunManifest};

#[derive(Debug, Parser)]
#[command(
    name = "amak",
    version,
    about = "Multi-horizon online portfolio selection backtests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run strategies over a price file or a synthetic market and write reports.
    Backtest(BacktestArgs),
    /// Write a synthetic price series in the ingestion CSV format.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["data", "synthetic"])))]
struct BacktestArgs {
    /// Price CSV: a date column followed by one column per asset.
    #[arg(long, value_name = "CSV")]
    data: Option<PathBuf>,
    /// Synthetic market spec (TOML), or `default`.
    #[arg(long, value_name = "SPEC")]
    synthetic: Option<String>,
    /// Run configuration (TOML).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Report directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "amak-out")]
    out: PathBuf,
    /// Comma-separated subset of amak, corn-k, ubah, crp, best-stock, eg.
    #[arg(long, value_name = "LIST", value_parser = parse_strategy_list)]
    strategies: Option<StrategyList>,
    #[arg(long)]
    seed: Option<u64>,
    /// Log every clustering lifecycle event.
    #[arg(short, long, conflicts_with = "quiet")]
    verbose: bool,
    /// Suppress the run log.
    #[arg(short, long)]
    quiet: bool,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Synthetic market spec (TOML), or `default`.
    #[arg(long, value_name = "SPEC")]
    spec: String,
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
}

#[derive(Debug, Clone)]
struct StrategyList(Vec<StrategyKind>);

fn parse_strategy_list(s: &str) -> Result<StrategyList, String> {
    match parse_strategies(s) {
        Ok(v) if v.is_empty() => Err("no strategies given".into()),
        Ok(v) => Ok(StrategyList(v)),
        Err(e) => Err(e.to_string()),
    }
}

fn load_spec(spec: &str) -> Result<SyntheticSpec> {
    if spec == "default" {
        return Ok(SyntheticSpec::default());
    }
    let text = fs::read_to_string(spec).with_context(|| format!("cannot read spec {spec}"))?;
    let parsed: SyntheticSpec =
        toml::from_str(&text).with_context(|| format!("invalid synthetic spec {spec}"))?;
    parsed.validate()?;
    Ok(parsed)
}

fn price_csv(series: &PriceSeries) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    write_prices(series, &mut bytes)?;
    Ok(bytes)
}

fn load_input(args: &BacktestArgs, seed: u64) -> Result<(PriceSeries, DataSource)> {
    let (series, bytes, source) = if let Some(path) = &args.data {
        let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        let series = read_prices(bytes.as_slice())
            .with_context(|| format!("cannot load prices from {}", path.display()))?;
        (series, bytes, path.display().to_string())
    } else {
        let name = args.synthetic.as_deref().unwrap_or("default");
        let mut spec = load_spec(name)?;
        if name == "default" {
            spec.seed = seed;
        }
        let series = generate_synthetic(&spec)?;
        let bytes = price_csv(&series)?;
        (series, bytes, "synthetic".to_owned())
    };
    let data = DataSource {
        source,
        sha256: sha256_hex(&bytes),
        n_price_rows: series.n_days(),
        assets: series.asset_names().to_vec(),
    };
    Ok((series, data))
}

fn cmd_backtest(args: BacktestArgs) -> Result<()> {
    let started_at = Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true);
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let config = file.to_backtest(args.seed, args.strategies.clone().map(|l| l.0));
    config.validate()?;
    let (series, data) = load_input(&args, config.seed)?;
    let relatives = compute_relatives(&series)?;
    info!(
        "{} days x {} assets from {} (sha256 {})",
        series.n_days(),
        series.n_assets(),
        data.source,
        &data.sha256[..12]
    );

    let result = run_backtest(&config, &relatives)?;
    for s in &result.strategies {
        info!(
            "{:<10} wealth {:>10.4}  apy {:>8.4}  mdd {:>8.4}  asr {:>8.4}",
            s.kind.name(),
            s.trajectory.terminal(),
            s.metrics.apy,
            s.metrics.mdd,
            s.metrics.asr
        );
    }

    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        data,
        config,
        started_at,
        finished_at: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
    };
    report::write_summary(&args.out.join("summary.json"), &manifest, &result)?;
    report::write_trajectory(&args.out.join("trajectory.csv"), &manifest, &result)?;
    report::write_portfolios(&args.out.join("portfolios.csv"), &manifest, &result)?;
    info!("reports written to {}", args.out.display());
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let spec = load_spec(&args.spec)?;
    let series = generate_synthetic(&spec)?;
    let mut bytes = format!("# generated seed={}\n", spec.seed).into_bytes();
    bytes.extend(price_csv(&series)?);
    write_file(&args.out, &bytes)?;
    info!(
        "{} days x {} assets written to {} (seed {}, sha256 {})",
        series.n_days(),
        series.n_assets(),
        args.out.display(),
        spec.seed,
        sha256_hex(&bytes)
    );
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn init_logging(level: LevelFilter) {
    env_logger::Builder::new()
        .filter_level(level)
        .format_target(false)
        .format_timestamp(None)
        .init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match &cli.command {
        Command::Backtest(a) if a.quiet => LevelFilter::Off,
        Command::Backtest(a) if a.verbose => LevelFilter::Debug,
        _ => LevelFilter::Info,
    };
    init_logging(level);
    let outcome = match cli.command {
        Command::Backtest(args) => cmd_backtest(args),
        Command::Generate(args) => cmd_generate(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
