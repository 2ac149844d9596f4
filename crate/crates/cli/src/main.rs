//! `tmsc` — transient micro short-circuit detection for battery telemetry.
//!
//! Exit codes: 0 = ran, no faults; 2 = ran, faults detected; 1 = error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tmsc_cli::io::{
    dump_coherence_csv, dump_scalogram_magnitude_csv, load_profile_csv, load_telemetry_csv,
    write_telemetry_csv,
};
use tmsc_cli::report::{write_report_json, write_truth_json};
use tmsc_cli::{CliError, Result};
use tmsc_core::coherence::BandSplit;
use tmsc_core::detector::{analyze, ThresholdPolicy};
use tmsc_core::signal::TimeSeries;
use tmsc_core::sim::{make_scenario, scenario_faults, simulate, CellParams, Scenario};
use tmsc_core::spectral::{build_scale_grid, cwt};
use tmsc_core::{DetectorConfig, MorletParams, WindowSpec};

#[derive(Parser)]
#[command(
    name = "tmsc",
    version,
    about = "Detect transient micro short-circuit faults in battery telemetry via wavelet coherence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a telemetry CSV and report fault events.
    Analyze {
        /// Input CSV with header `time_s,voltage_v,current_a`.
        #[arg(long)]
        input: PathBuf,
        /// Window start time in seconds (default: start of the series).
        #[arg(long)]
        window_start: Option<f64>,
        /// Window length in seconds (default: the whole series).
        #[arg(long)]
        window_len: Option<f64>,
        /// High/low frequency demarcation in Hz (default: 0.1 Hz scaled by
        /// the sampling rate).
        #[arg(long)]
        f_split: Option<f64>,
        /// Lowest analyzed frequency in Hz (default: 0.0024 scaled by the
        /// sampling rate).
        #[arg(long)]
        f_min: Option<f64>,
        /// Highest analyzed frequency in Hz (default: Nyquist).
        #[arg(long)]
        f_max: Option<f64>,
        /// Scales per octave.
        #[arg(long, default_value_t = 12)]
        voices: u32,
        /// Morlet center frequency.
        #[arg(long, default_value_t = 6.0)]
        omega0: f64,
        /// Threshold policy: `fixed:V` or `robust:K`.
        #[arg(long, default_value = "robust:6")]
        threshold: String,
        /// Write the detection report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the coherence map as a plot-ready CSV grid.
        #[arg(long)]
        dump_coherence: Option<PathBuf>,
    },
    /// Generate experiment telemetry with the battery/fault simulator.
    Simulate {
        /// Fault scenario: `all`, `1`..`5`, or `none`.
        #[arg(long, value_parser = parse_scenario)]
        scenario: Scenario,
        /// Seed for the pseudo-FUDS load generator.
        #[arg(long)]
        seed: u64,
        /// Use this `time_s,current_a` drive profile instead of the builtin
        /// pseudo-FUDS generator (the seed is then unused).
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Output telemetry CSV.
        #[arg(long)]
        out: PathBuf,
        /// Also write the injected ground-truth fault list as JSON.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Dump the scalogram magnitude of one channel as a CSV grid.
    Spectrum {
        /// Input CSV with header `time_s,voltage_v,current_a`.
        #[arg(long)]
        input: PathBuf,
        /// Channel to transform.
        #[arg(long, value_enum)]
        channel: Channel,
        /// Output CSV grid.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Channel {
    Voltage,
    Current,
}

fn parse_scenario(raw: &str) -> std::result::Result<Scenario, String> {
    match raw {
        "all" => Ok(Scenario::All),
        "none" => Ok(Scenario::None),
        "1" => Ok(Scenario::Fault1),
        "2" => Ok(Scenario::Fault2),
        "3" => Ok(Scenario::Fault3),
        "4" => Ok(Scenario::Fault4),
        "5" => Ok(Scenario::Fault5),
        other => Err(format!("unknown scenario '{other}' (use all|1|2|3|4|5|none)")),
    }
}

fn parse_threshold(raw: &str) -> Result<ThresholdPolicy> {
    let (kind, value) = raw.split_once(':').ok_or_else(|| {
        CliError::InvalidArgument(format!("threshold '{raw}' must be fixed:V or robust:K"))
    })?;
    let number: f64 = value.parse().map_err(|e| {
        CliError::InvalidArgument(format!("threshold value '{value}': {e}"))
    })?;
    match kind {
        "fixed" => Ok(ThresholdPolicy::Fixed(number)),
        "robust" => Ok(ThresholdPolicy::Robust(number)),
        other => Err(CliError::InvalidArgument(format!(
            "unknown threshold policy '{other}' (use fixed or robust)"
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_analyze(
    input: PathBuf,
    window_start: Option<f64>,
    window_len: Option<f64>,
    f_split: Option<f64>,
    f_min: Option<f64>,
    f_max: Option<f64>,
    voices: u32,
    omega0: f64,
    threshold: String,
    report_path: Option<PathBuf>,
    dump_coherence: Option<PathBuf>,
) -> Result<u8> {
    let (voltage, current) = load_telemetry_csv(&input)?;
    let dt = voltage.dt();
    let start = window_start.unwrap_or_else(|| voltage.t0());
    let length = window_len.unwrap_or(voltage.len() as f64 * dt - (start - voltage.t0()));
    let split = match f_split {
        Some(f) => BandSplit::new(f)?,
        None => BandSplit::default_for_dt(dt),
    };
    let config = DetectorConfig {
        window: WindowSpec::new(start, length)?,
        f_min: f_min.unwrap_or(0.0024 / dt),
        f_max: f_max.unwrap_or(0.5 / dt),
        voices_per_octave: voices,
        morlet: MorletParams::new(omega0)?,
        split,
        threshold: parse_threshold(&threshold)?,
        min_event_gap: (5.0 * dt).max(dt),
    };

    let report = analyze(&voltage, &current, &config)?;

    println!(
        "analyzed [{:.1} s, {:.1} s): {} event(s), threshold {:.6}",
        start,
        start + length,
        report.events.len(),
        report.threshold
    );
    for (k, e) in report.events.iter().enumerate() {
        println!(
            "  event {}: {:.1}-{:.1} s, peak score {:.4} at {:.1} s, {:.3} Hz",
            k + 1,
            e.t_start,
            e.t_end,
            e.peak_score,
            e.peak_time,
            e.peak_frequency
        );
    }

    if let Some(path) = report_path {
        write_report_json(&report, &path)?;
        println!("report written to {}", path.display());
    }
    if let Some(path) = dump_coherence {
        dump_coherence_csv(&path, &report.coherence)?;
        println!("coherence map written to {}", path.display());
    }

    Ok(if report.events.is_empty() { 0 } else { 2 })
}

fn run_simulate(
    scenario: Scenario,
    seed: u64,
    profile: Option<PathBuf>,
    out: PathBuf,
    truth_path: Option<PathBuf>,
) -> Result<u8> {
    let output = match profile {
        Some(path) => {
            let load = load_profile_csv(&path)?;
            simulate(&CellParams::default(), &load, &scenario_faults(scenario))?
        }
        None => make_scenario(scenario, seed)?,
    };
    write_telemetry_csv(&out, &output.voltage, &output.current)?;
    println!(
        "simulated {} samples ({} fault(s)) -> {}",
        output.voltage.len(),
        output.truth.len(),
        out.display()
    );
    if let Some(path) = truth_path {
        write_truth_json(&output.truth, &path)?;
        println!("ground truth written to {}", path.display());
    }
    Ok(0)
}

fn run_spectrum(input: PathBuf, channel: Channel, out: PathBuf) -> Result<u8> {
    let (voltage, current) = load_telemetry_csv(&input)?;
    let series: &TimeSeries = match channel {
        Channel::Voltage => &voltage,
        Channel::Current => &current,
    };
    let dt = series.dt();
    let params = MorletParams::default();
    let grid = build_scale_grid(0.0024 / dt, 0.5 / dt, 12, &params)?;
    let scalogram = cwt(series, &grid, &params)?;
    dump_scalogram_magnitude_csv(&out, &scalogram)?;
    println!(
        "scalogram {} x {} written to {}",
        scalogram.rows(),
        scalogram.cols(),
        out.display()
    );
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze {
            input,
            window_start,
            window_len,
            f_split,
            f_min,
            f_max,
            voices,
            omega0,
            threshold,
            report,
            dump_coherence,
        } => run_analyze(
            input,
            window_start,
            window_len,
            f_split,
            f_min,
            f_max,
            voices,
            omega0,
            threshold,
            report,
            dump_coherence,
        ),
        Command::Simulate {
            scenario,
            seed,
            profile,
            out,
            truth,
        } => run_simulate(scenario, seed, profile, out, truth),
        Command::Spectrum {
            input,
            channel,
            out,
        } => run_spectrum(input, channel, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version print and exit 0; argument errors exit 1
            // (exit code 2 is reserved for "faults detected").
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
