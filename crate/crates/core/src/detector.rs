//! End-to-end detection pipeline: window both channels, transform, normalize,
//! build the coherence map, score the high-frequency band, threshold, and
//! turn threshold crossings into fault events.

use crate::coherence::{
    band_score_over_time, coherence_map, mean_coherence_per_frequency, normalize_magnitude,
    BandSplit, CoherenceMap,
};
use crate::error::{Error, Result};
use crate::signal::{extract_window, TimeSeries, WindowSpec};
use crate::spectral::{build_scale_grid, cwt, MorletParams};

/// Scale factor turning a median absolute deviation into a consistent
/// estimate of the standard deviation for Gaussian data.
pub const MAD_SCALE: f64 = 1.4826;

/// How the detection threshold is derived from the band-score series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdPolicy {
    /// Use the given value directly (must lie in `(0, 1)`).
    Fixed(f64),
    /// `median + k · (1.4826 · MAD)` of the score series, self-calibrating
    /// per window. `k` must be positive.
    Robust(f64),
}

impl ThresholdPolicy {
    fn validate(&self) -> Result<()> {
        match *self {
            ThresholdPolicy::Fixed(v) if v > 0.0 && v < 1.0 => Ok(()),
            ThresholdPolicy::Robust(k) if k > 0.0 && k.is_finite() => Ok(()),
            ThresholdPolicy::Fixed(_) => {
                Err(Error::InvalidParameter("fixed threshold must be in (0, 1)"))
            }
            ThresholdPolicy::Robust(_) => {
                Err(Error::InvalidParameter("robust k must be positive"))
            }
        }
    }
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy::Robust(6.0)
    }
}

/// Full configuration of [`analyze`].
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Analysis window; defaults to `[0, 1370)` s.
    pub window: WindowSpec,
    /// Lowest analyzed pseudo-frequency (Hz).
    pub f_min: f64,
    /// Highest analyzed pseudo-frequency (Hz); must not exceed Nyquist.
    pub f_max: f64,
    /// Scale-grid resolution.
    pub voices_per_octave: u32,
    pub morlet: MorletParams,
    /// High/low frequency demarcation for the band score.
    pub split: BandSplit,
    pub threshold: ThresholdPolicy,
    /// Threshold crossings closer than this merge into one event (s).
    pub min_event_gap: f64,
}

impl DetectorConfig {
    pub fn validate(&self, dt: f64) -> Result<()> {
        if self.f_min <= 0.0 || !self.f_min.is_finite() || self.f_max <= self.f_min {
            return Err(Error::InvalidRange {
                f_min: self.f_min,
                f_max: self.f_max,
            });
        }
        if self.voices_per_octave < 1 {
            return Err(Error::InvalidParameter("voices_per_octave must be >= 1"));
        }
        self.threshold.validate()?;
        if self.min_event_gap < dt || self.min_event_gap.is_nan() {
            return Err(Error::InvalidParameter("min_event_gap must be >= dt"));
        }
        if self.split.f_split() >= self.f_max {
            return Err(Error::InvalidParameter("f_split must be below f_max"));
        }
        Ok(())
    }
}

impl Default for DetectorConfig {
    /// Defaults for 1 Hz telemetry: one 1370 s window, 0.0024–0.5 Hz grid at
    /// 12 voices per octave, 0.1 Hz band split, robust(6) threshold, 5 s
    /// event merge gap.
    fn default() -> Self {
        Self {
            window: WindowSpec::default(),
            f_min: 0.0024,
            f_max: 0.5,
            voices_per_octave: 12,
            morlet: MorletParams::default(),
            split: BandSplit::default(),
            threshold: ThresholdPolicy::default(),
            min_event_gap: 5.0,
        }
    }
}

/// Classification attached to detected events.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultLabel {
    TmscCandidate,
}

/// A detected anomaly: a maximal interval of above-threshold band score.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultEvent {
    /// First above-threshold sample time (s).
    pub t_start: f64,
    /// Last above-threshold sample time (s), inclusive.
    pub t_end: f64,
    /// Time of the score maximum inside the run (s).
    pub peak_time: f64,
    /// Score value at the peak; always above the applied threshold.
    pub peak_score: f64,
    /// Frequency (Hz) of the strongest coherence-map row within the scored
    /// band at the peak time.
    pub peak_frequency: f64,
    pub label: FaultLabel,
}

impl FaultEvent {
    /// True when `[t_start, t_end]` intersects `[lo, hi]`.
    pub fn intersects(&self, lo: f64, hi: f64) -> bool {
        self.t_start <= hi && self.t_end >= lo
    }
}

/// Everything needed to reproduce the analysis: configuration echo, applied
/// threshold, events, the score series, the per-frequency mean profile and
/// the coherence map itself.
#[derive(Debug, Clone)]
pub struct DetectionReport {
    pub config: DetectorConfig,
    pub threshold: f64,
    pub events: Vec<FaultEvent>,
    pub band_score: TimeSeries,
    pub mean_profile: Vec<(f64, f64)>,
    pub coherence: CoherenceMap,
}

fn median_of(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Derives the detection threshold from a score series per the policy.
pub fn compute_threshold(score: &TimeSeries, policy: &ThresholdPolicy) -> Result<f64> {
    policy.validate()?;
    if score.is_empty() {
        return Err(Error::EmptyScore);
    }
    match *policy {
        ThresholdPolicy::Fixed(v) => Ok(v),
        ThresholdPolicy::Robust(k) => {
            let mut sorted = score.values().to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("scores are finite"));
            let median = median_of(&sorted);
            let mut deviations: Vec<f64> =
                sorted.iter().map(|v| (v - median).abs()).collect();
            deviations.sort_by(|a, b| a.partial_cmp(b).expect("scores are finite"));
            let mad = median_of(&deviations);
            Ok(median + k * MAD_SCALE * mad)
        }
    }
}

/// Turns threshold crossings of the score series into fault events.
///
/// Maximal runs of samples with `score > threshold` become events; runs whose
/// start lies less than `min_event_gap` seconds after the previous run's end
/// merge into one. The peak frequency is read from the coherence-map column
/// at the peak time, restricted to the scored band.
pub fn detect_events(
    score: &TimeSeries,
    threshold: f64,
    min_event_gap: f64,
    map: &CoherenceMap,
    split: BandSplit,
) -> Result<Vec<FaultEvent>> {
    if !threshold.is_finite() {
        return Err(Error::InvalidParameter("threshold must be finite"));
    }
    let band = map.band_rows(split)?;

    // Index runs of strictly-above-threshold samples.
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    for (k, &v) in score.values().iter().enumerate() {
        if v > threshold {
            current = match current {
                Some((start, _)) => Some((start, k)),
                None => Some((k, k)),
            };
        } else if let Some(run) = current.take() {
            runs.push(run);
        }
    }
    if let Some(run) = current {
        runs.push(run);
    }

    // Merge runs separated by less than the gap.
    let dt = score.dt();
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for run in runs {
        match merged.last_mut() {
            Some(prev) if (run.0 - prev.1) as f64 * dt < min_event_gap => prev.1 = run.1,
            _ => merged.push(run),
        }
    }

    let events = merged
        .into_iter()
        .map(|(start, end)| {
            // First maximum wins on ties.
            let (peak_idx, peak_score) = (start..=end)
                .map(|k| (k, score.values()[k]))
                .fold((start, f64::NEG_INFINITY), |best, (k, v)| {
                    if v > best.1 {
                        (k, v)
                    } else {
                        best
                    }
                });
            let col = map
                .data()
                .column(peak_idx);
            let peak_row = band
                .iter()
                .copied()
                .max_by(|&a, &b| col[a].partial_cmp(&col[b]).expect("map is finite"))
                .expect("band is non-empty");
            FaultEvent {
                t_start: score.time_at(start),
                t_end: score.time_at(end),
                peak_time: score.time_at(peak_idx),
                peak_score,
                peak_frequency: map.grid().frequencies()[peak_row],
                label: FaultLabel::TmscCandidate,
            }
        })
        .collect();
    Ok(events)
}

/// Runs the whole pipeline on synchronized voltage and current channels.
///
/// Deterministic composition: window extraction, CWT of both channels,
/// global min-max normalization, coherence map, band score, threshold,
/// event extraction.
pub fn analyze(
    voltage: &TimeSeries,
    current: &TimeSeries,
    config: &DetectorConfig,
) -> Result<DetectionReport> {
    if voltage.t0() != current.t0()
        || voltage.dt() != current.dt()
        || voltage.len() != current.len()
    {
        return Err(Error::MismatchedChannels);
    }
    config.validate(voltage.dt())?;

    let v_win = extract_window(voltage, &config.window)?;
    let i_win = extract_window(current, &config.window)?;
    let grid = build_scale_grid(
        config.f_min,
        config.f_max,
        config.voices_per_octave,
        &config.morlet,
    )?;
    let v_scal = cwt(&v_win, &grid, &config.morlet)?;
    let i_scal = cwt(&i_win, &grid, &config.morlet)?;
    let v_norm = normalize_magnitude(&v_scal)?;
    let i_norm = normalize_magnitude(&i_scal)?;
    let coherence = coherence_map(&v_norm, &i_norm)?;
    let band_score = band_score_over_time(&coherence, config.split)?;
    let threshold = compute_threshold(&band_score, &config.threshold)?;
    let events = detect_events(
        &band_score,
        threshold,
        config.min_event_gap,
        &coherence,
        config.split,
    )?;
    let mean_profile = mean_coherence_per_frequency(&coherence);

    Ok(DetectionReport {
        config: config.clone(),
        threshold,
        events,
        band_score,
        mean_profile,
        coherence,
    })
}
