//! Voltage–current wavelet coherence and the derived band/slice statistics.
//!
//! Both scalogram magnitudes are min-max normalized over the whole
//! time–scale matrix, then subtracted elementwise. Low values mean the two
//! channels move together (normal operation); high values at high frequency
//! mark an inconsistency between voltage and current, the fault signature.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::signal::{TimeSeries, Unit};
use crate::spectral::{ScaleGrid, Scalogram};

/// Range below which a magnitude matrix counts as constant (no structure).
const DEGENERATE_EPS: f64 = 1e-15;

/// Scalogram magnitude scaled into `[0, 1]` by the global min/max.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedMap {
    data: Array2<f64>,
    grid: ScaleGrid,
    t0: f64,
    dt: f64,
}

impl NormalizedMap {
    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn grid(&self) -> &ScaleGrid {
        &self.grid
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// Elementwise `| normalized voltage - normalized current |`, in `[0, 1]`.
/// Low = coherent, high = fault candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceMap {
    data: Array2<f64>,
    grid: ScaleGrid,
    t0: f64,
    dt: f64,
}

impl CoherenceMap {
    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn grid(&self) -> &ScaleGrid {
        &self.grid
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    /// Time of column `c`.
    pub fn time_at(&self, c: usize) -> f64 {
        self.t0 + c as f64 * self.dt
    }

    /// Indices of grid rows with frequency `>= f_split`.
    pub fn band_rows(&self, split: BandSplit) -> Result<Vec<usize>> {
        let rows: Vec<usize> = self
            .grid
            .frequencies()
            .iter()
            .enumerate()
            .filter(|(_, &f)| f >= split.f_split() * (1.0 - 1e-12))
            .map(|(i, _)| i)
            .collect();
        if rows.is_empty() {
            return Err(Error::EmptyBand {
                f_split: split.f_split(),
            });
        }
        Ok(rows)
    }
}

/// Demarcation between the low-frequency region (incoherent even in normal
/// operation) and the high-frequency band the detector scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSplit {
    f_split: f64,
}

impl BandSplit {
    pub fn new(f_split: f64) -> Result<Self> {
        if f_split <= 0.0 || !f_split.is_finite() {
            return Err(Error::InvalidParameter("f_split must be positive"));
        }
        Ok(Self { f_split })
    }

    /// 0.1 Hz at 1 Hz sampling; scales with the sampling rate for other
    /// periods, since the "high frequency" region is relative to Nyquist.
    pub fn default_for_dt(dt: f64) -> Self {
        Self { f_split: 0.1 / dt }
    }

    pub fn f_split(&self) -> f64 {
        self.f_split
    }
}

impl Default for BandSplit {
    fn default() -> Self {
        Self { f_split: 0.1 }
    }
}

fn normalize(mag: Array2<f64>, s: &Scalogram) -> Result<NormalizedMap> {
    let min = mag.iter().copied().fold(f64::INFINITY, f64::min);
    let max = mag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if range < DEGENERATE_EPS || range.is_nan() {
        return Err(Error::DegenerateRange);
    }
    let data = mag.mapv(|v| (v - min) / range);
    Ok(NormalizedMap {
        data,
        grid: s.grid().clone(),
        t0: s.t0(),
        dt: s.dt(),
    })
}

/// Min-max normalization of `|W|` with the extrema taken globally over the
/// whole matrix. The output has minimum 0 and maximum 1 exactly; a
/// constant-magnitude scalogram (e.g. from a zero signal) is rejected as
/// [`Error::DegenerateRange`].
pub fn normalize_magnitude(s: &Scalogram) -> Result<NormalizedMap> {
    normalize(s.magnitude(), s)
}

/// Per-scale variant: each row is min-max normalized independently.
///
/// Not part of the detection pipeline (which normalizes globally); kept for
/// experimentation since it removes the cell's impedance shape across scales.
pub fn normalize_magnitude_per_scale(s: &Scalogram) -> Result<NormalizedMap> {
    let mut mag = s.magnitude();
    for mut row in mag.rows_mut() {
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = max - min;
        if range < DEGENERATE_EPS || range.is_nan() {
            return Err(Error::DegenerateRange);
        }
        row.mapv_inplace(|v| (v - min) / range);
    }
    let data = mag;
    Ok(NormalizedMap {
        data,
        grid: s.grid().clone(),
        t0: s.t0(),
        dt: s.dt(),
    })
}

/// Elementwise absolute difference of two normalized maps of identical shape
/// and grid.
pub fn coherence_map(v: &NormalizedMap, i: &NormalizedMap) -> Result<CoherenceMap> {
    if v.data.dim() != i.data.dim() {
        return Err(Error::ShapeMismatch("normalized maps differ in shape"));
    }
    if v.grid != i.grid {
        return Err(Error::ShapeMismatch("normalized maps differ in grid"));
    }
    if v.t0 != i.t0 || v.dt != i.dt {
        return Err(Error::ShapeMismatch("normalized maps differ in timeline"));
    }
    let data = ndarray::Zip::from(&v.data)
        .and(&i.data)
        .map_collect(|&a, &b| (a - b).abs());
    Ok(CoherenceMap {
        data,
        grid: v.grid.clone(),
        t0: v.t0,
        dt: v.dt,
    })
}

/// Mean coherence over the rows at or above the split frequency, per time
/// column. This is the detector's scalar score series.
pub fn band_score_over_time(m: &CoherenceMap, split: BandSplit) -> Result<TimeSeries> {
    let rows = m.band_rows(split)?;
    let inv = 1.0 / rows.len() as f64;
    let values: Vec<f64> = (0..m.cols())
        .map(|c| rows.iter().map(|&r| m.data[(r, c)]).sum::<f64>() * inv)
        .collect();
    TimeSeries::new(m.t0, m.dt, values, Unit::Dimensionless)
}

/// The map row whose grid frequency is nearest `f`, as a time series.
/// Returns the exact frequency of the chosen row alongside the series.
pub fn freq_slice(m: &CoherenceMap, f: f64) -> Result<(f64, TimeSeries)> {
    let row = m.grid.nearest_row(f)?;
    let chosen = m.grid.frequencies()[row];
    let series = TimeSeries::new(
        m.t0,
        m.dt,
        m.data.row(row).to_vec(),
        Unit::Dimensionless,
    )?;
    Ok((chosen, series))
}

/// The map column nearest `t`, paired with the grid frequencies
/// (descending, matching row order).
pub fn time_slice(m: &CoherenceMap, t: f64) -> Result<Vec<(f64, f64)>> {
    let last = m.time_at(m.cols() - 1);
    if !t.is_finite() || t < m.t0 - 1e-9 || t > last + 1e-9 {
        return Err(Error::OutOfWindow { t });
    }
    let c = (((t - m.t0) / m.dt).round().max(0.0) as usize).min(m.cols() - 1);
    Ok(m.grid
        .frequencies()
        .iter()
        .enumerate()
        .map(|(r, &f)| (f, m.data[(r, c)]))
        .collect())
}

/// Time-mean of each row, paired with grid frequencies: the per-window
/// average coherence spectrum.
pub fn mean_coherence_per_frequency(m: &CoherenceMap) -> Vec<(f64, f64)> {
    let inv = 1.0 / m.cols() as f64;
    m.grid
        .frequencies()
        .iter()
        .enumerate()
        .map(|(r, &f)| (f, m.data.row(r).sum() * inv))
        .collect()
}
