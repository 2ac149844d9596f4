//! Uniformly sampled time series, validation, windowing and reflection padding.
//!
//! Every downstream stage consumes [`TimeSeries`] values produced here, so the
//! invariants (positive sample period, finite samples, exact uniformity) are
//! enforced once at construction and never re-checked.

use crate::error::{Error, Result};

/// Physical unit carried by a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Volts,
    Amperes,
    Dimensionless,
}

/// Standard analysis window length in seconds (one FUDS cycle).
pub const DEFAULT_WINDOW_LEN: f64 = 1370.0;

/// Default timestamp tolerance used by [`validate_series`]: 1% of the sample
/// period, which covers typical BMS logger jitter.
pub fn default_tolerance(dt: f64) -> f64 {
    0.01 * dt
}

/// A uniformly sampled, finite, non-empty real signal.
///
/// Sample `k` corresponds to time `t0 + k * dt`, exactly. Instances are
/// immutable; all operations return new series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
    unit: Unit,
}

impl TimeSeries {
    /// Builds a series, checking `dt > 0`, non-emptiness and finiteness.
    pub fn new(t0: f64, dt: f64, values: Vec<f64>, unit: Unit) -> Result<Self> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(Error::InvalidParameter("dt must be positive and finite"));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidParameter("t0 must be finite"));
        }
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(Self {
            t0,
            dt,
            values,
            unit,
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Time of sample `k`.
    pub fn time_at(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// Time of the last sample.
    pub fn end_time(&self) -> f64 {
        self.time_at(self.len() - 1)
    }

    /// Index of the sample nearest to `t`, or `None` outside the span.
    pub fn nearest_index(&self, t: f64) -> Option<usize> {
        if t < self.t0 - 0.5 * self.dt || t > self.end_time() + 0.5 * self.dt {
            return None;
        }
        let k = ((t - self.t0) / self.dt).round();
        let k = k.max(0.0) as usize;
        Some(k.min(self.len() - 1))
    }

    /// Returns a copy with every sample multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.t0,
            self.dt,
            self.values.iter().map(|v| v * factor).collect(),
            self.unit,
        )
    }
}

/// A `[start, start + length)` analysis window in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    start: f64,
    length: f64,
}

impl WindowSpec {
    pub fn new(start: f64, length: f64) -> Result<Self> {
        if !start.is_finite() || !length.is_finite() || length <= 0.0 {
            return Err(Error::InvalidParameter(
                "window length must be positive and finite",
            ));
        }
        Ok(Self { start, length })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn length(&self) -> f64 {
        self.length
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            start: 0.0,
            length: DEFAULT_WINDOW_LEN,
        }
    }
}

/// Validates raw `(time, value)` pairs against an expected sample period.
///
/// Accepts the data iff there are at least two samples, every value is
/// finite, and every consecutive timestamp gap is within `tolerance` of
/// `expected_dt`. Missing or irregular samples are rejected rather than
/// interpolated: interpolation would fabricate exactly the transients the
/// detector hunts.
pub fn validate_series(
    raw: &[(f64, f64)],
    expected_dt: f64,
    tolerance: f64,
    unit: Unit,
) -> Result<TimeSeries> {
    if raw.len() < 2 {
        return Err(Error::TooShort {
            len: raw.len(),
            min: 2,
        });
    }
    if expected_dt <= 0.0 || !expected_dt.is_finite() {
        return Err(Error::InvalidParameter("expected_dt must be positive"));
    }
    if tolerance < 0.0 || !tolerance.is_finite() {
        return Err(Error::InvalidParameter("tolerance must be non-negative"));
    }
    let mut values = Vec::with_capacity(raw.len());
    for (index, &(t, v)) in raw.iter().enumerate() {
        if !t.is_finite() || !v.is_finite() {
            return Err(Error::NonFiniteValue { index });
        }
        if index > 0 {
            let gap = t - raw[index - 1].0;
            if (gap - expected_dt).abs() > tolerance {
                return Err(Error::NonUniformSampling {
                    index,
                    gap,
                    expected: expected_dt,
                    tolerance,
                });
            }
        }
        values.push(v);
    }
    TimeSeries::new(raw[0].0, expected_dt, values, unit)
}

/// Extracts the sub-series covered by `w`.
///
/// The result has `ceil(length / dt)` samples and starts at the first sample
/// with time `>= w.start`. The window must lie fully inside the series.
pub fn extract_window(ts: &TimeSeries, w: &WindowSpec) -> Result<TimeSeries> {
    let dt = ts.dt();
    // Slack of ~1e-9 samples absorbs float noise in start/length arithmetic.
    let rel = (w.start() - ts.t0()) / dt;
    if rel < -1e-9 {
        return Err(Error::WindowOutOfRange {
            start: w.start(),
            length: w.length(),
        });
    }
    let start_idx = rel.max(0.0).sub_eps_ceil();
    let count = (w.length() / dt).sub_eps_ceil().max(1);
    if start_idx + count > ts.len() {
        return Err(Error::WindowOutOfRange {
            start: w.start(),
            length: w.length(),
        });
    }
    TimeSeries::new(
        ts.time_at(start_idx),
        dt,
        ts.values()[start_idx..start_idx + count].to_vec(),
        ts.unit(),
    )
}

trait SubEpsCeil {
    fn sub_eps_ceil(self) -> usize;
}

impl SubEpsCeil for f64 {
    /// `ceil` that treats values within 1e-9 of an integer as that integer.
    fn sub_eps_ceil(self) -> usize {
        (self - 1e-9).ceil().max(0.0) as usize
    }
}

/// Mirrors `n` samples around each edge (edge samples not repeated), the
/// boundary treatment used before the wavelet transform. `[1,2,3]` with
/// `n = 2` becomes `[3,2,1,2,3,2,1]`; `t0` shifts by `-n * dt`.
pub fn pad_reflect(ts: &TimeSeries, n: usize) -> Result<TimeSeries> {
    let len = ts.len();
    if n == 0 {
        return Ok(ts.clone());
    }
    if n >= len {
        return Err(Error::PadTooLarge { n, len });
    }
    let x = ts.values();
    let mut out = Vec::with_capacity(len + 2 * n);
    for j in 0..n {
        out.push(x[n - j]);
    }
    out.extend_from_slice(x);
    for j in 0..n {
        out.push(x[len - 2 - j]);
    }
    TimeSeries::new(ts.t0() - n as f64 * ts.dt(), ts.dt(), out, ts.unit())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_accepts_uniform_input() {
        let raw = [(0.0, 3.7), (1.0, 3.69), (2.0, 3.7)];
        let ts = validate_series(&raw, 1.0, 0.01, Unit::Volts).unwrap();
        assert_eq!(ts.t0(), 0.0);
        assert_eq!(ts.dt(), 1.0);
        assert_eq!(ts.len(), 3);
        assert_eq!(ts.unit(), Unit::Volts);
    }

    #[test]
    fn validate_rejects_gap() {
        let raw = [(0.0, 3.7), (1.0, 3.69), (2.5, 3.7)];
        let err = validate_series(&raw, 1.0, 0.01, Unit::Volts).unwrap_err();
        match err {
            Error::NonUniformSampling { index, .. } => assert_eq!(index, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_nan_and_short_input() {
        let raw = [(0.0, 3.7), (1.0, f64::NAN)];
        assert_eq!(
            validate_series(&raw, 1.0, 0.01, Unit::Volts),
            Err(Error::NonFiniteValue { index: 1 })
        );
        assert_eq!(
            validate_series(&[(0.0, 1.0)], 1.0, 0.01, Unit::Volts),
            Err(Error::TooShort { len: 1, min: 2 })
        );
    }

    #[test]
    fn validate_is_idempotent() {
        let raw = [(10.0, 1.0), (11.0, 2.0), (12.0, 3.0), (13.0, 2.5)];
        let ts = validate_series(&raw, 1.0, 0.01, Unit::Amperes).unwrap();
        let pairs: Vec<(f64, f64)> = ts
            .values()
            .iter()
            .enumerate()
            .map(|(k, &v)| (ts.time_at(k), v))
            .collect();
        let again = validate_series(&pairs, ts.dt(), 0.01, ts.unit()).unwrap();
        assert_eq!(ts, again);
    }

    fn series(values: &[f64]) -> TimeSeries {
        TimeSeries::new(0.0, 1.0, values.to_vec(), Unit::Dimensionless).unwrap()
    }

    #[test]
    fn window_first_and_second_half() {
        let ts = series(&(0..2740).map(|k| k as f64).collect::<Vec<_>>());
        let w1 = extract_window(&ts, &WindowSpec::new(0.0, 1370.0).unwrap()).unwrap();
        assert_eq!(w1.len(), 1370);
        assert_eq!(w1.t0(), 0.0);
        let w2 = extract_window(&ts, &WindowSpec::new(1370.0, 1370.0).unwrap()).unwrap();
        assert_eq!(w2.len(), 1370);
        assert_eq!(w2.t0(), 1370.0);
        assert_eq!(w2.values()[0], 1370.0);
    }

    #[test]
    fn window_too_long_is_rejected() {
        let ts = series(&vec![0.0; 1000]);
        let w = WindowSpec::new(0.0, 1370.0).unwrap();
        assert!(matches!(
            extract_window(&ts, &w),
            Err(Error::WindowOutOfRange { .. })
        ));
    }

    #[test]
    fn window_before_series_start_is_rejected() {
        let ts = series(&[1.0, 2.0, 3.0, 4.0]);
        let w = WindowSpec::new(-2.0, 3.0).unwrap();
        assert!(matches!(
            extract_window(&ts, &w),
            Err(Error::WindowOutOfRange { .. })
        ));
    }

    #[test]
    fn pad_reflect_matches_mirror_definition() {
        let ts = series(&[1.0, 2.0, 3.0]);
        let padded = pad_reflect(&ts, 2).unwrap();
        assert_eq!(padded.values(), &[3.0, 2.0, 1.0, 2.0, 3.0, 2.0, 1.0]);
        assert_eq!(padded.t0(), -2.0);
    }

    #[test]
    fn pad_reflect_zero_is_identity() {
        let ts = series(&[4.0, 5.0, 6.0]);
        assert_eq!(pad_reflect(&ts, 0).unwrap(), ts);
    }

    #[test]
    fn pad_reflect_symmetric_input() {
        let ts = series(&[1.0, 2.0, 1.0]);
        let padded = pad_reflect(&ts, 1).unwrap();
        assert_eq!(padded.values(), &[2.0, 1.0, 2.0, 1.0, 2.0]);
    }

    #[test]
    fn pad_reflect_too_large() {
        let ts = series(&[1.0, 2.0, 3.0]);
        assert_eq!(
            pad_reflect(&ts, 3),
            Err(Error::PadTooLarge { n: 3, len: 3 })
        );
    }

    #[test]
    fn pad_then_unpad_roundtrips() {
        let ts = series(&[0.5, -1.25, 3.75, 2.0, 9.5]);
        for n in 0..ts.len() {
            let padded = pad_reflect(&ts, n).unwrap();
            assert_eq!(&padded.values()[n..n + ts.len()], ts.values());
        }
    }
}
