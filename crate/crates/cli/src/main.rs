use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use cpm_core::waveforms::{PulseComponent, PulseTable};
use cpm_core::Scheme;
use cpm_sim::config::ExperimentConfig;
use cpm_sim::sweep::{self, RunSummary};
use cpm_sim::{curves, run_oracle_suite, run_sweep, tables};

/// Simulation workbench for CPM detection in aeronautical telemetry.
#[derive(Parser)]
#[command(name = "cpmsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo BER sweep over an Eb/N0 grid.
    Sweep(SweepArgs),
    /// Check the trellis detectors against the exhaustive oracles.
    OracleSuite(OracleArgs),
    /// Write the complexity and storage comparison tables as CSV.
    DumpTables(TablesArgs),
    /// Convert BER records into sorted plot-data CSV.
    EmitCurves(CurvesArgs),
    /// Dump a sampled frequency or phase pulse as two-column CSV.
    Pulse(PulseArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// TOML experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// pcmfm or artm-cpm.
    #[arg(long)]
    scheme: Option<String>,
    /// mlsd-coherent, mlsd-phase-deviation, proposed or msd.
    #[arg(long)]
    detector: Option<String>,
    /// Survivors per state for the proposed detector.
    #[arg(long)]
    survivors: Option<usize>,
    /// Window length for the MSD baseline.
    #[arg(long)]
    window: Option<usize>,
    /// Comma-separated Eb/N0 grid in dB, e.g. 6,7,8,9,10.
    #[arg(long, value_delimiter = ',')]
    ebn0: Option<Vec<f64>>,
    /// Frame budget per point.
    #[arg(long)]
    frames: Option<u64>,
    /// Data symbols per frame.
    #[arg(long)]
    frame_len: Option<usize>,
    /// Master seed; frames derive their own streams from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Early-stop error target per point.
    #[arg(long)]
    min_errors: Option<u64>,
    /// Disable early stopping and run the full frame budget.
    #[arg(long)]
    paper_scale: bool,
    /// Run without noise.
    #[arg(long)]
    noiseless: bool,
    /// Samples per symbol.
    #[arg(long)]
    oversample: Option<usize>,
    /// Records CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value = "pcmfm")]
    scheme: String,
    #[arg(long, default_value_t = 200)]
    trials: u64,
    /// Longest data length per trial (exhaustive cost is M^max_len).
    #[arg(long, default_value_t = 8)]
    max_len: usize,
    #[arg(long, default_value_t = 8.0)]
    ebn0: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, default_value_t = 4)]
    oversample: usize,
    /// Traceback length N used for the evaluated storage totals.
    #[arg(long, default_value_t = 1000)]
    traceback: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CurvesArgs {
    /// BER records CSV produced by `cpmsim sweep`.
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PulseArgs {
    #[arg(long, default_value = "pcmfm")]
    scheme: String,
    #[arg(long, default_value_t = 4)]
    oversample: usize,
    /// g (frequency pulse) or q (phase pulse).
    #[arg(long, default_value = "g")]
    component: String,
    #[arg(long)]
    out: PathBuf,
}

fn parse_scheme(name: &str) -> anyhow::Result<Scheme> {
    ExperimentConfig {
        scheme: name.into(),
        ..Default::default()
    }
    .scheme()
}

fn run_sweep_command(args: SweepArgs) -> anyhow::Result<()> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = args.scheme {
        config.scheme = v;
    }
    if let Some(v) = args.detector {
        config.detector = v;
    }
    if let Some(v) = args.survivors {
        config.survivors = v;
    }
    if let Some(v) = args.window {
        config.window = v;
    }
    if let Some(v) = args.ebn0 {
        config.ebn0_grid = v;
    }
    if let Some(v) = args.frames {
        config.n_frames = v;
    }
    if let Some(v) = args.frame_len {
        config.frame_len = v;
    }
    if let Some(v) = args.seed {
        config.master_seed = v;
    }
    if let Some(v) = args.min_errors {
        config.min_errors = Some(v);
    }
    if args.paper_scale {
        config.min_errors = None;
    }
    if args.noiseless {
        config.noiseless = true;
    }
    if let Some(v) = args.oversample {
        config.oversample = v;
    }
    if let Some(v) = args.out {
        config.output_path = Some(v);
    }

    let started = Instant::now();
    let records = run_sweep(&config)?;
    let mut csv = Vec::new();
    sweep::write_ber_csv(&records, &mut csv)?;
    match &config.output_path {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            let summary = RunSummary {
                version: sweep::version_string(),
                elapsed_seconds: started.elapsed().as_secs_f64(),
                records: records.len(),
                config: &config,
            };
            let summary_path = path.with_extension("summary.json");
            fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)
                .with_context(|| format!("writing {}", summary_path.display()))?;
            eprintln!(
                "wrote {} records to {} ({}s)",
                records.len(),
                path.display(),
                started.elapsed().as_secs()
            );
        }
        None => {
            std::io::stdout().write_all(&csv)?;
        }
    }
    Ok(())
}

fn run_oracle_command(args: OracleArgs) -> anyhow::Result<()> {
    let scheme = parse_scheme(&args.scheme)?;
    let report = run_oracle_suite(&scheme, args.trials, args.max_len, args.ebn0, args.seed)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    anyhow::ensure!(
        report.passed(),
        "oracle suite failed: {}/{} coherent, {}/{} noncoherent, {} dominance violations",
        report.coherent_agreements,
        report.trials,
        report.noncoherent_agreements,
        report.trials,
        report.dominance_violations
    );
    Ok(())
}

fn run_tables_command(args: TablesArgs) -> anyhow::Result<()> {
    fs::create_dir_all(&args.out_dir)?;
    let complexity_path = args.out_dir.join("table_complexity.csv");
    let storage_path = args.out_dir.join("table_storage.csv");
    fs::write(
        &complexity_path,
        tables::complexity_table_csv(args.oversample)?,
    )?;
    fs::write(
        &storage_path,
        tables::storage_table_csv(args.oversample, args.traceback)?,
    )?;
    eprintln!(
        "wrote {} and {}",
        complexity_path.display(),
        storage_path.display()
    );
    Ok(())
}

fn run_curves_command(args: CurvesArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.records)
        .with_context(|| format!("reading {}", args.records.display()))?;
    let records = sweep::parse_ber_csv(&text)?;
    let mut out = Vec::new();
    curves::emit_curves(&records, &mut out)?;
    fs::write(&args.out, out).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn run_pulse_command(args: PulseArgs) -> anyhow::Result<()> {
    let scheme = parse_scheme(&args.scheme)?;
    let table = PulseTable::for_scheme(&scheme, args.oversample)?;
    let component = match args.component.as_str() {
        "g" | "frequency" => PulseComponent::Frequency,
        "q" | "phase" => PulseComponent::Phase,
        other => anyhow::bail!("unknown pulse component `{other}` (expected `g` or `q`)"),
    };
    let mut buf = Vec::new();
    table.write_csv(&mut buf, component)?;
    fs::write(&args.out, buf).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(args) => run_sweep_command(args),
        Command::OracleSuite(args) => run_oracle_command(args),
        Command::DumpTables(args) => run_tables_command(args),
        Command::EmitCurves(args) => run_curves_command(args),
        Command::Pulse(args) => run_pulse_command(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            // one machine-readable error line on stderr
            let line = serde_json::json!({ "error": format!("{err:#}") });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
