use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use edgebench::pareto::EnergySource;
use edgebench::report::{
    cmd_calibrate, cmd_pareto, cmd_segment, cmd_sweep, cmd_synth, resolve_registry_path,
    CalibrateRequest, CommandError, ParetoRequest, RunReport, SegmentRequest, SweepRequest,
    SynthRequest,
};

const EXIT_CODES_HELP: &str = "Exit codes:
  0  success
  2  usage error (bad flags, refusing to overwrite)
  3  I/O error (missing file, unwritable output)
  4  parse error (malformed trace, registry, or scenario)
  5  analysis error (degenerate fit, empty candidate set)

The registry path comes from --registry or the EDGEBENCH_CONFIG
environment variable.";

/// Energy benchmarking for embedded inference: segment current traces,
/// calibrate latency models, sweep duty-cycle energy, pick Pareto winners.
#[derive(Parser)]
#[command(name = "edgebench", version, after_help = EXIT_CODES_HELP)]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment trace CSVs into windows and per-inference metrics.
    Segment(SegmentArgs),
    /// Fit per-processor FLOPS-to-latency models from a trace directory.
    Calibrate(CalibrateArgs),
    /// Sweep cycle energy over a cycle-time grid for all feasible pairs.
    Sweep(SweepArgs),
    /// Compute energy/quality Pareto fronts at given cycle times.
    Pareto(ParetoArgs),
    /// Generate synthetic traces with ground-truth sidecars.
    Synth(SynthArgs),
}

#[derive(Args)]
struct SegmentArgs {
    /// Trace CSV files.
    #[arg(required = true)]
    traces: Vec<PathBuf>,
    /// Inferences per active window; defaults to the trace meta key.
    #[arg(long)]
    inferences_per_window: Option<u32>,
    /// Supply voltage, V.
    #[arg(long, default_value_t = 3.3)]
    voltage: f64,
    /// Also report run-to-run reliability across the given traces.
    #[arg(long)]
    reliability: bool,
    /// Coefficient-of-variation threshold for the reliability verdict.
    #[arg(long, default_value_t = 0.05)]
    cv_threshold: f64,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Registry JSON (falls back to EDGEBENCH_CONFIG).
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Directory of trace CSVs with processor/model meta keys.
    #[arg(long)]
    traces_dir: PathBuf,
    /// Where to write the calibration JSON.
    #[arg(long)]
    out_calibration: PathBuf,
    /// Overwrite an existing calibration file.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Registry JSON (falls back to EDGEBENCH_CONFIG).
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Calibration JSON from `calibrate`; optional if the registry embeds one.
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// Smallest cycle time, s.
    #[arg(long, default_value_t = 0.0)]
    cycle_min: f64,
    /// Largest cycle time, s.
    #[arg(long, default_value_t = 5.0)]
    cycle_max: f64,
    /// Grid points per pair.
    #[arg(long, default_value_t = 11)]
    steps: usize,
    /// Also write one plot-ready CSV per pair into this directory.
    #[arg(long)]
    csv_dir: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum SourceArg {
    Auto,
    Predicted,
    Measured,
}

impl From<SourceArg> for EnergySource {
    fn from(v: SourceArg) -> Self {
        match v {
            SourceArg::Auto => EnergySource::Auto,
            SourceArg::Predicted => EnergySource::Predicted,
            SourceArg::Measured => EnergySource::Measured,
        }
    }
}

#[derive(Args)]
struct ParetoArgs {
    /// Registry JSON (falls back to EDGEBENCH_CONFIG).
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Calibration JSON from `calibrate`.
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// Directory of measured traces to prefer over predictions.
    #[arg(long)]
    traces_dir: Option<PathBuf>,
    /// Cycle times to evaluate, s.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 2.5, 5.0])]
    cycle_times: Vec<f64>,
    /// Drop candidates below this quality.
    #[arg(long, default_value_t = 0.0)]
    quality_threshold: f64,
    /// Where cycle energies come from.
    #[arg(long, value_enum, default_value_t = SourceArg::Auto)]
    source: SourceArg,
    /// Also enforce each model's use-case quality target from the registry.
    #[arg(long)]
    use_targets: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Scenario JSON: one object or an array of them.
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for the generated trace CSVs and .truth.json sidecars.
    #[arg(long)]
    out_dir: PathBuf,
}

fn run(command: Command) -> Result<RunReport, CommandError> {
    match command {
        Command::Segment(a) => cmd_segment(&SegmentRequest {
            traces: a.traces,
            inferences_per_window: a.inferences_per_window,
            voltage: a.voltage,
            reliability: a.reliability,
            cv_threshold: a.cv_threshold,
        }),
        Command::Calibrate(a) => cmd_calibrate(&CalibrateRequest {
            registry: resolve_registry_path(a.registry)?,
            traces_dir: a.traces_dir,
            out_calibration: a.out_calibration,
            force: a.force,
        }),
        Command::Sweep(a) => cmd_sweep(&SweepRequest {
            registry: resolve_registry_path(a.registry)?,
            calibration: a.calibration,
            cycle_min: a.cycle_min,
            cycle_max: a.cycle_max,
            steps: a.steps,
            csv_dir: a.csv_dir,
        }),
        Command::Pareto(a) => cmd_pareto(&ParetoRequest {
            registry: resolve_registry_path(a.registry)?,
            calibration: a.calibration,
            traces_dir: a.traces_dir,
            cycle_times: a.cycle_times,
            quality_threshold: a.quality_threshold,
            source: a.source.into(),
            use_targets: a.use_targets,
        }),
        Command::Synth(a) => cmd_synth(&SynthRequest {
            scenario: a.scenario,
            out_dir: a.out_dir,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let doc = report.to_json();
    if let Some(path) = &cli.out {
        if let Err(source) = std::fs::write(path, &doc) {
            eprintln!("error: {}: {source}", path.display());
            return ExitCode::from(3);
        }
    } else {
        print!("{doc}");
    }
    ExitCode::SUCCESS
}
