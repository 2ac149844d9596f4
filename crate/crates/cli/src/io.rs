//! CSV codecs: telemetry files, drive-profile files and plot-ready matrix
//! dumps.
//!
//! Telemetry values are written with Rust's shortest-roundtrip float
//! formatting, so write-then-load reproduces the series bit-exactly.
//! Matrix dumps use 9 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::ArrayView2;
use tmsc_core::coherence::{CoherenceMap, NormalizedMap};
use tmsc_core::signal::{default_tolerance, validate_series, TimeSeries, Unit};
use tmsc_core::Scalogram;

use crate::error::{CliError, Result};

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn column_index(
    reader: &mut csv::Reader<File>,
    path: &Path,
    name: &'static str,
) -> Result<usize> {
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?;
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or(CliError::MissingColumn {
            path: path.to_path_buf(),
            column: name,
        })
}

fn parse_err(path: &Path, line: u64, message: String) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    }
}

/// One row of a telemetry file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelemetryRecord {
    pub time_s: f64,
    pub voltage_v: f64,
    pub current_a: f64,
}

/// Reads the raw rows of a telemetry file without validating uniformity.
pub fn read_telemetry_records(path: &Path) -> Result<Vec<TelemetryRecord>> {
    let columns = read_columns(path, &["time_s", "voltage_v", "current_a"])?;
    Ok((0..columns[0].len())
        .map(|k| TelemetryRecord {
            time_s: columns[0][k],
            voltage_v: columns[1][k],
            current_a: columns[2][k],
        })
        .collect())
}

fn parse_field(path: &Path, line: u64, record: &csv::StringRecord, idx: usize) -> Result<f64> {
    let raw = record
        .get(idx)
        .ok_or_else(|| parse_err(path, line, format!("missing field {idx}")))?;
    raw.trim()
        .parse()
        .map_err(|e| parse_err(path, line, format!("'{raw}': {e}")))
}

fn read_columns(path: &Path, names: &[&'static str]) -> Result<Vec<Vec<f64>>> {
    let mut reader = open_reader(path)?;
    let indices: Vec<usize> = names
        .iter()
        .map(|n| column_index(&mut reader, path, n))
        .collect::<Result<_>>()?;
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line())
                .unwrap_or_default();
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or_default();
        for (slot, &idx) in columns.iter_mut().zip(&indices) {
            slot.push(parse_field(path, line, &record, idx)?);
        }
    }
    Ok(columns)
}

/// Infers the sample period from the first timestamp gap and validates the
/// channel against it.
fn to_series(times: &[f64], values: &[f64], unit: Unit) -> Result<TimeSeries> {
    if times.len() < 2 {
        return Err(tmsc_core::Error::TooShort {
            len: times.len(),
            min: 2,
        }
        .into());
    }
    let dt = times[1] - times[0];
    let raw: Vec<(f64, f64)> = times.iter().copied().zip(values.iter().copied()).collect();
    Ok(validate_series(&raw, dt, default_tolerance(dt), unit)?)
}

/// Loads a `time_s,voltage_v,current_a` telemetry file into validated,
/// synchronized channels.
pub fn load_telemetry_csv(path: &Path) -> Result<(TimeSeries, TimeSeries)> {
    let records = read_telemetry_records(path)?;
    let times: Vec<f64> = records.iter().map(|r| r.time_s).collect();
    let volts: Vec<f64> = records.iter().map(|r| r.voltage_v).collect();
    let amps: Vec<f64> = records.iter().map(|r| r.current_a).collect();
    let voltage = to_series(&times, &volts, Unit::Volts)?;
    let current = to_series(&times, &amps, Unit::Amperes)?;
    Ok((voltage, current))
}

/// Writes synchronized channels as `time_s,voltage_v,current_a`.
pub fn write_telemetry_csv(
    path: &Path,
    voltage: &TimeSeries,
    current: &TimeSeries,
) -> Result<()> {
    if voltage.t0() != current.t0()
        || voltage.dt() != current.dt()
        || voltage.len() != current.len()
    {
        return Err(tmsc_core::Error::MismatchedChannels.into());
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    (|| -> std::io::Result<()> {
        writeln!(w, "time_s,voltage_v,current_a")?;
        for k in 0..voltage.len() {
            writeln!(
                w,
                "{},{},{}",
                voltage.time_at(k),
                voltage.values()[k],
                current.values()[k]
            )?;
        }
        w.flush()
    })()
    .map_err(|e| io_err(path, e))
}

/// Loads a `time_s,current_a` drive profile (e.g. a real FUDS schedule).
pub fn load_profile_csv(path: &Path) -> Result<TimeSeries> {
    let columns = read_columns(path, &["time_s", "current_a"])?;
    to_series(&columns[0], &columns[1], Unit::Amperes)
}

/// Writes a time × frequency matrix: first row is the time axis, first
/// column the frequency axis in Hz (descending), cells at 9 significant
/// digits.
pub fn dump_matrix_csv(
    path: &Path,
    frequencies: &[f64],
    t0: f64,
    dt: f64,
    data: ArrayView2<'_, f64>,
) -> Result<()> {
    assert_eq!(frequencies.len(), data.nrows(), "axis/shape mismatch");
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    (|| -> std::io::Result<()> {
        write!(w, "")?;
        for c in 0..data.ncols() {
            write!(w, ",{:.8e}", t0 + c as f64 * dt)?;
        }
        writeln!(w)?;
        for (r, &f) in frequencies.iter().enumerate() {
            write!(w, "{f:.8e}")?;
            for c in 0..data.ncols() {
                write!(w, ",{:.8e}", data[(r, c)])?;
            }
            writeln!(w)?;
        }
        w.flush()
    })()
    .map_err(|e| io_err(path, e))
}

pub fn dump_coherence_csv(path: &Path, m: &CoherenceMap) -> Result<()> {
    dump_matrix_csv(path, m.grid().frequencies(), m.t0(), m.dt(), m.data().view())
}

pub fn dump_normalized_csv(path: &Path, m: &NormalizedMap) -> Result<()> {
    dump_matrix_csv(path, m.grid().frequencies(), m.t0(), m.dt(), m.data().view())
}

pub fn dump_scalogram_magnitude_csv(path: &Path, s: &Scalogram) -> Result<()> {
    dump_matrix_csv(
        path,
        s.grid().frequencies(),
        s.t0(),
        s.dt(),
        s.magnitude().view(),
    )
}

/// Time axis, frequency axis and row-major cells of a parsed matrix dump.
pub type MatrixAxes = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

/// Parses a matrix dump back into `(times, frequencies, data)`; the inverse
/// of [`dump_matrix_csv`] at serialized precision.
pub fn load_matrix_csv(path: &Path) -> Result<MatrixAxes> {
    let content = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file".into()))?;
    let times: Vec<f64> = header
        .split(',')
        .skip(1)
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|e| parse_err(path, 1, format!("'{x}': {e}")))
        })
        .collect::<Result<_>>()?;
    let mut frequencies = Vec::new();
    let mut data = Vec::new();
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let line_no = (k + 1) as u64;
        let f: f64 = fields
            .next()
            .unwrap()
            .trim()
            .parse()
            .map_err(|e| parse_err(path, line_no, format!("{e}")))?;
        let row: Vec<f64> = fields
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|e| parse_err(path, line_no, format!("'{x}': {e}")))
            })
            .collect::<Result<_>>()?;
        if row.len() != times.len() {
            return Err(parse_err(
                path,
                line_no,
                format!("expected {} cells, found {}", times.len(), row.len()),
            ));
        }
        frequencies.push(f);
        data.push(row);
    }
    Ok((times, frequencies, data))
}
