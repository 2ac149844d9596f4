//! Morlet continuous wavelet transform.
//!
//! Two routes to the same scalogram are provided: [`cwt`] evaluates the
//! transform in the frequency domain (multiply the signal spectrum by the
//! scaled wavelet response, inverse-transform per scale), while
//! [`cwt_direct`] sums the time-domain correlation integral directly and is
//! intended as a slow reference for short inputs. Both use the analytic
//! (frequency-one-sided) Morlet so coefficient magnitudes are envelope-like,
//! and both apply the same reflection padding, so they agree wherever the
//! sampled wavelet resolves the Gaussian envelope (scales of a few samples
//! and up).
//!
//! Conventions, fixed once and shared by the two routes:
//!
//! * frequency response `Ψ(ω) = π^(-1/4) exp(-(ω - ω0)² / 2)` for `ω > 0`,
//!   zero otherwise ([`morlet_hat`]);
//! * time-domain kernel `ψ(t) = π^(-1/4) (2π)^(-1/2) exp(jω0 t - t²/2)`,
//!   the inverse transform of `Ψ` up to a negligible negative-frequency tail;
//! * coefficient at scale `λ`: `W(t, λ) = √λ · IDFT[ X(ω) Ψ*(λω) ](t)`,
//!   equivalently `(dt/√λ) Σ_τ x(τ) ψ*((τ - t)/λ)`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::{pad_reflect, TimeSeries, Unit};

/// Relative level at which the Gaussian envelope is treated as zero, both for
/// the time-domain truncation radius and for the padding length.
const ENVELOPE_CUTOFF: f64 = 1e-8;

/// Half-width of the effective wavelet support, in units of `λ`.
fn support_radius() -> f64 {
    (-2.0 * ENVELOPE_CUTOFF.ln()).sqrt()
}

/// Morlet mother-wavelet parameters.
///
/// `omega0` is the dimensionless center angular frequency. Values of 5 and up
/// keep the wavelet approximately admissible (the residual DC response is
/// `exp(-ω0²/2) ≈ 4e-6` at the minimum), which is what makes dropping the
/// zero-mean correction term safe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorletParams {
    omega0: f64,
}

impl MorletParams {
    pub const MIN_OMEGA0: f64 = 5.0;

    pub fn new(omega0: f64) -> Result<Self> {
        if !omega0.is_finite() || omega0 < Self::MIN_OMEGA0 {
            return Err(Error::InvalidParameter("omega0 must be at least 5"));
        }
        Ok(Self { omega0 })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Pseudo-frequency (Hz) associated with scale `λ` (s): `f = ω0 / (2πλ)`.
    pub fn scale_to_frequency(&self, scale: f64) -> f64 {
        self.omega0 / (2.0 * std::f64::consts::PI * scale)
    }

    /// Scale (s) associated with pseudo-frequency `f` (Hz).
    pub fn frequency_to_scale(&self, f: f64) -> f64 {
        self.omega0 / (2.0 * std::f64::consts::PI * f)
    }
}

impl Default for MorletParams {
    /// `ω0 = 6`, the standard balance between time and frequency resolution.
    fn default() -> Self {
        Self { omega0: 6.0 }
    }
}

/// Frequency response of the analytic Morlet wavelet at angular frequency
/// `omega`: `π^(-1/4) exp(-(omega - ω0)²/2)` for positive `omega`, zero for
/// `omega <= 0`. Real-valued and non-negative.
pub fn morlet_hat(omega: f64, params: &MorletParams) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    let d = omega - params.omega0();
    std::f64::consts::PI.powf(-0.25) * (-0.5 * d * d).exp()
}

/// Logarithmic scale/frequency grid for the transform.
///
/// Scales are strictly increasing, pseudo-frequencies strictly decreasing,
/// geometric with ratio `2^(1/voices_per_octave)` starting at `f_max`. The
/// grid holds `floor(voices · log2(f_max/f_min)) + 1` points, so the last
/// frequency lands within one voice step above `f_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid {
    scales: Vec<f64>,
    frequencies: Vec<f64>,
    voices_per_octave: u32,
}

impl ScaleGrid {
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn voices_per_octave(&self) -> u32 {
        self.voices_per_octave
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// Highest grid frequency (Hz).
    pub fn f_max(&self) -> f64 {
        self.frequencies[0]
    }

    /// Lowest grid frequency (Hz).
    pub fn f_min(&self) -> f64 {
        *self.frequencies.last().expect("grid is non-empty")
    }

    /// Largest (coarsest) scale in seconds.
    pub fn max_scale(&self) -> f64 {
        *self.scales.last().expect("grid is non-empty")
    }

    /// Row index whose frequency is nearest `f`. Requests up to half a voice
    /// step beyond either end still resolve to the edge row; anything
    /// farther out errors.
    pub fn nearest_row(&self, f: f64) -> Result<usize> {
        let half_step = 2f64.powf(0.5 / self.voices_per_octave as f64);
        if !f.is_finite() || f > self.f_max() * half_step || f < self.f_min() / half_step {
            return Err(Error::OutOfGridRange { f });
        }
        let row = self
            .frequencies
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (*a - f).abs().partial_cmp(&(*b - f).abs()).expect("finite")
            })
            .map(|(i, _)| i)
            .expect("grid is non-empty");
        Ok(row)
    }
}

/// Builds the grid of wavelet scales covering `[f_min, f_max]` with
/// `voices_per_octave` points per octave, `f_max` included exactly.
pub fn build_scale_grid(
    f_min: f64,
    f_max: f64,
    voices_per_octave: u32,
    params: &MorletParams,
) -> Result<ScaleGrid> {
    if f_min <= 0.0 || f_max <= f_min || !f_min.is_finite() || !f_max.is_finite() {
        return Err(Error::InvalidRange { f_min, f_max });
    }
    if voices_per_octave < 1 {
        return Err(Error::InvalidParameter("voices_per_octave must be >= 1"));
    }
    let octaves = (f_max / f_min).log2();
    let steps = (voices_per_octave as f64 * octaves + 1e-9).floor() as usize;
    let mut frequencies = Vec::with_capacity(steps + 1);
    let mut scales = Vec::with_capacity(steps + 1);
    for j in 0..=steps {
        let f = f_max * 2f64.powf(-(j as f64) / voices_per_octave as f64);
        frequencies.push(f);
        scales.push(params.frequency_to_scale(f));
    }
    Ok(ScaleGrid {
        scales,
        frequencies,
        voices_per_octave,
    })
}

/// Complex wavelet-coefficient matrix: rows are scales (finest first, i.e.
/// frequencies descending), columns are time samples of the source window.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalogram {
    data: ndarray::Array2<Complex64>,
    grid: ScaleGrid,
    t0: f64,
    dt: f64,
    source_unit: Unit,
}

impl Scalogram {
    pub fn data(&self) -> &ndarray::Array2<Complex64> {
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

    pub fn source_unit(&self) -> Unit {
        self.source_unit
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    /// Elementwise modulus `|W|`.
    pub fn magnitude(&self) -> ndarray::Array2<f64> {
        self.data.mapv(|z| z.norm())
    }
}

/// Unnormalized forward discrete Fourier transform, `X_k = Σ_n x_n e^(-2πikn/N)`.
pub fn dft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut buf = x.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    Ok(buf)
}

/// Inverse of [`dft`], including the `1/N` factor.
pub fn idft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut buf = x.to_vec();
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    let scale = 1.0 / buf.len() as f64;
    for z in &mut buf {
        *z *= scale;
    }
    Ok(buf)
}

/// Reflection-padding length for a transform over `len` samples at the
/// coarsest scale `max_scale`: half the wavelet support, capped at the
/// longest admissible pad.
fn pad_len(max_scale: f64, dt: f64, len: usize) -> usize {
    let wanted = (support_radius() * max_scale / dt).ceil() as usize;
    wanted.min(len - 1)
}

fn check_nyquist(grid: &ScaleGrid, dt: f64) -> Result<()> {
    let nyquist = 0.5 / dt;
    if grid.f_max() > nyquist * (1.0 + 1e-12) {
        return Err(Error::FrequencyAboveNyquist {
            f_max: grid.f_max(),
            nyquist,
        });
    }
    Ok(())
}

/// Fast frequency-domain CWT.
///
/// The input is reflection-padded, transformed once, multiplied per scale by
/// `√λ Ψ*(λω)` and inverse-transformed; the pad is stripped from each row.
pub fn cwt(ts: &TimeSeries, grid: &ScaleGrid, params: &MorletParams) -> Result<Scalogram> {
    check_nyquist(grid, ts.dt())?;
    let len = ts.len();
    let dt = ts.dt();
    let n_pad = pad_len(grid.max_scale(), dt, len);
    let padded = pad_reflect(ts, n_pad)?;
    let n = padded.len();

    let buf: Vec<Complex64> = padded
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    let spectrum = dft(&buf)?;

    // Angular frequency of DFT bin k, with bins above N/2 mapped to negative
    // frequencies (where the analytic wavelet response vanishes).
    let d_omega = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let omegas: Vec<f64> = (0..n)
        .map(|k| {
            let signed = if k <= n / 2 {
                k as f64
            } else {
                k as f64 - n as f64
            };
            signed * d_omega
        })
        .collect();

    let inverse = FftPlanner::new().plan_fft_inverse(n);
    let mut data = ndarray::Array2::<Complex64>::zeros((grid.len(), len));
    let mut row_buf = vec![Complex64::new(0.0, 0.0); n];
    for (r, &scale) in grid.scales().iter().enumerate() {
        let gain = scale.sqrt() / n as f64;
        for k in 0..n {
            row_buf[k] = spectrum[k] * (morlet_hat(scale * omegas[k], params) * gain);
        }
        inverse.process(&mut row_buf);
        for (c, value) in row_buf[n_pad..n_pad + len].iter().enumerate() {
            data[(r, c)] = *value;
        }
    }

    Ok(Scalogram {
        data,
        grid: grid.clone(),
        t0: ts.t0(),
        dt,
        source_unit: ts.unit(),
    })
}

/// Direct time-domain CWT, the slow reference route.
///
/// Sums `(dt/√λ) Σ_τ x(τ) ψ*((τ - t)/λ)` over the same reflection-padded
/// signal as [`cwt`], truncating the kernel where the Gaussian envelope
/// drops below `1e-8` of its peak. Quadratic cost; use on short inputs.
pub fn cwt_direct(ts: &TimeSeries, grid: &ScaleGrid, params: &MorletParams) -> Result<Scalogram> {
    check_nyquist(grid, ts.dt())?;
    let len = ts.len();
    let dt = ts.dt();
    let n_pad = pad_len(grid.max_scale(), dt, len);
    let padded = pad_reflect(ts, n_pad)?;
    let x = padded.values();
    let n = x.len();

    // ψ(t) = π^(-1/4) (2π)^(-1/2) e^{jω0 t} e^{-t²/2}; the kernel below is ψ*.
    let amp = std::f64::consts::PI.powf(-0.25) / (2.0 * std::f64::consts::PI).sqrt();
    let omega0 = params.omega0();
    let radius_scales = support_radius();

    let mut data = ndarray::Array2::<Complex64>::zeros((grid.len(), len));
    for (r, &scale) in grid.scales().iter().enumerate() {
        let radius = (radius_scales * scale / dt).ceil() as i64;
        let norm = dt / scale.sqrt();
        for c in 0..len {
            let center = (n_pad + c) as i64;
            let lo = (center - radius).max(0) as usize;
            let hi = ((center + radius) as usize).min(n - 1);
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, &sample) in x.iter().enumerate().take(hi + 1).skip(lo) {
                let s = (m as i64 - center) as f64 * dt / scale;
                let envelope = (-0.5 * s * s).exp();
                if envelope < ENVELOPE_CUTOFF {
                    continue;
                }
                let phase = -omega0 * s;
                acc += sample * envelope * Complex64::new(phase.cos(), phase.sin());
            }
            data[(r, c)] = acc * (amp * norm);
        }
    }

    Ok(Scalogram {
        data,
        grid: grid.clone(),
        t0: ts.t0(),
        dt,
        source_unit: ts.unit(),
    })
}
