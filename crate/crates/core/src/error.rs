//! Error type shared by all pipeline stages.

/// Errors produced by series validation, the wavelet transforms, the
/// coherence/detection stages and the battery simulator.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("series too short: {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error(
        "non-uniform sampling at index {index}: gap {gap} s, expected {expected} s (tolerance {tolerance} s)"
    )]
    NonUniformSampling {
        index: usize,
        gap: f64,
        expected: f64,
        tolerance: f64,
    },

    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },

    #[error("window [{start} s, {start} + {length} s) does not lie inside the series")]
    WindowOutOfRange { start: f64, length: f64 },

    #[error("reflection pad of {n} samples too large for series of {len} samples")]
    PadTooLarge { n: usize, len: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid frequency range: f_min {f_min} Hz, f_max {f_max} Hz")]
    InvalidRange { f_min: f64, f_max: f64 },

    #[error("grid f_max {f_max} Hz exceeds Nyquist frequency {nyquist} Hz")]
    FrequencyAboveNyquist { f_max: f64, nyquist: f64 },

    #[error("scalogram magnitude range is degenerate; the window carries no usable structure")]
    DegenerateRange,

    #[error("matrix shapes or grids do not match: {0}")]
    ShapeMismatch(&'static str),

    #[error("no grid rows at or above the band split {f_split} Hz")]
    EmptyBand { f_split: f64 },

    #[error("frequency {f} Hz outside the grid range")]
    OutOfGridRange { f: f64 },

    #[error("time {t} s outside the analyzed window")]
    OutOfWindow { t: f64 },

    #[error("empty score series")]
    EmptyScore,

    #[error("voltage and current channels do not share t0/dt/length")]
    MismatchedChannels,

    #[error("state of charge left [0, 1] at t = {t} s (soc = {soc})")]
    SocOutOfRange { t: f64, soc: f64 },

    #[error("fault interval [{t_start} s, {t_end} s) outside the load span")]
    FaultOutsideSpan { t_start: f64, t_end: f64 },

    #[error("invalid duration {duration} s for sample period {dt} s")]
    InvalidDuration { duration: f64, dt: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
