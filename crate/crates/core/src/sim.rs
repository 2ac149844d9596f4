//! First-order Thevenin battery simulator with pseudo-FUDS load generation
//! and fault injection.
//!
//! The measured outputs mirror what a cycler/BMS would log: terminal voltage,
//! and the current through the external circuit's shunt. An external short
//! resistor is connected directly at the tabs and therefore bypasses the
//! shunt — its current sags the terminal voltage but never appears in the
//! measured current, which is exactly what breaks voltage–current coherence.
//!
//! Circuit model (discharge-positive internal convention):
//!
//! ```text
//! v = ocv(soc) - i_cell * r0 - v_rc
//! dv_rc/dt = i_cell / c1 - v_rc / (r1 * c1)
//! dsoc/dt  = -i_cell / capacity
//! ```
//!
//! integrated with forward Euler at the sample period. During an external
//! short, `i_cell` includes `i_sc = v / r_sc`, solved self-consistently
//! per step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::signal::{TimeSeries, Unit};

/// Seconds per ampere-hour.
const AH_TO_AS: f64 = 3600.0;

/// Monotone piecewise-linear open-circuit-voltage curve over SOC ∈ [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct OcvCurve {
    points: Vec<(f64, f64)>,
}

impl OcvCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter("ocv curve needs >= 2 points"));
        }
        if points.first().map(|p| p.0) != Some(0.0) || points.last().map(|p| p.0) != Some(1.0) {
            return Err(Error::InvalidParameter("ocv curve must span soc 0 to 1"));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 <= w[0].1 {
                return Err(Error::InvalidParameter("ocv curve must be strictly increasing"));
            }
        }
        if points.iter().any(|&(s, v)| !s.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidParameter("ocv curve must be finite"));
        }
        Ok(Self { points })
    }

    /// NMC-like 11-point table spanning 3.0–4.2 V, bundled with the crate.
    pub fn default_nmc() -> Self {
        let raw = include_str!("../data/ocv_nmc.csv");
        let points = raw
            .lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let mut parts = l.split(',');
                let soc: f64 = parts.next().unwrap().trim().parse().unwrap();
                let v: f64 = parts.next().unwrap().trim().parse().unwrap();
                (soc, v)
            })
            .collect();
        Self::new(points).expect("bundled OCV table is valid")
    }

    /// Interpolated OCV at `soc`, clamped to the table's span.
    pub fn voltage_at(&self, soc: f64) -> f64 {
        let s = soc.clamp(0.0, 1.0);
        let idx = self
            .points
            .windows(2)
            .position(|w| s <= w[1].0)
            .unwrap_or(self.points.len() - 2);
        let (s0, v0) = self.points[idx];
        let (s1, v1) = self.points[idx + 1];
        v0 + (v1 - v0) * (s - s0) / (s1 - s0)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// Equivalent-circuit cell parameters.
///
/// Defaults are calibrated, not measured physics: with `r0 = 3.5 mΩ`, a
/// 500 mΩ external short at typical NMC voltages sags the terminal by
/// 20–30 mV, the signature magnitude this detector targets. The
/// polarization branch keeps a 5 s settling time but a small resistance,
/// so the terminal voltage tracks the current near-proportionally across
/// the analyzed 0.1–0.5 Hz band, as a healthy cell does there.
#[derive(Debug, Clone, PartialEq)]
pub struct CellParams {
    /// Capacity in ampere-hours.
    pub capacity_ah: f64,
    /// Ohmic resistance (Ω).
    pub r0: f64,
    /// Polarization resistance (Ω).
    pub r1: f64,
    /// Polarization capacitance (F).
    pub c1: f64,
    pub ocv: OcvCurve,
    /// Initial state of charge in `[0, 1]`.
    pub soc0: f64,
    /// Voltage measurement resolution (V per count). The logged voltage is
    /// rounded to this step, mirroring the cycler's 1 mV accuracy; zero
    /// disables quantization.
    pub v_lsb: f64,
    /// Current measurement resolution (A per count); zero disables.
    pub i_lsb: f64,
    /// RMS of the voltage channel's electrical measurement noise (V). Drawn
    /// from a fixed internal dither stream so runs stay bit-reproducible
    /// and the noise is independent of load and faults; zero disables.
    pub v_noise: f64,
    /// RMS of the current channel's measurement noise (A); zero disables.
    pub i_noise: f64,
}

impl CellParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.capacity_ah)
            || !positive(self.r0)
            || !positive(self.r1)
            || !positive(self.c1)
        {
            return Err(Error::InvalidParameter(
                "capacity, r0, r1, c1 must all be positive",
            ));
        }
        if !(0.0..=1.0).contains(&self.soc0) {
            return Err(Error::InvalidParameter("soc0 must lie in [0, 1]"));
        }
        let non_negative = |x: f64| x.is_finite() && x >= 0.0;
        if !non_negative(self.v_lsb)
            || !non_negative(self.i_lsb)
            || !non_negative(self.v_noise)
            || !non_negative(self.i_noise)
        {
            return Err(Error::InvalidParameter(
                "measurement resolutions and noise levels must be non-negative",
            ));
        }
        Ok(())
    }

    /// Capacity in ampere-seconds.
    pub fn capacity_as(&self) -> f64 {
        self.capacity_ah * AH_TO_AS
    }

    /// Defaults with measurement quantization and noise switched off;
    /// useful when a test wants the exact circuit solution.
    pub fn ideal() -> Self {
        Self {
            v_lsb: 0.0,
            i_lsb: 0.0,
            v_noise: 0.0,
            i_noise: 0.0,
            ..Self::default()
        }
    }
}

impl Default for CellParams {
    fn default() -> Self {
        Self {
            capacity_ah: 38.2,
            r0: 0.0035,
            r1: 5e-4,
            c1: 10_000.0,
            ocv: OcvCurve::default_nmc(),
            soc0: 0.9,
            v_lsb: 1e-3,
            i_lsb: 1e-2,
            v_noise: 6e-4,
            i_noise: 5e-1,
        }
    }
}

fn quantize(x: f64, lsb: f64) -> f64 {
    if lsb > 0.0 {
        (x / lsb).round() * lsb
    } else {
        x
    }
}

/// Per-sample standard-normal dither pairs for the two measurement channels.
/// The stream is keyed by a fixed constant, not by the experiment seed:
/// instrument noise does not change when the drive profile does, and faults
/// must not perturb it either (the short-invisibility contract compares
/// runs sample by sample).
struct Dither {
    rng: ChaCha8Rng,
}

impl Dither {
    fn new() -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(0x7a11_ad17_5eed_0001),
        }
    }

    /// Box-Muller pair.
    fn next_pair(&mut self) -> (f64, f64) {
        let u1: f64 = self.rng.random_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = self.rng.random_range(0.0..std::f64::consts::TAU);
        let r = (-2.0 * u1.ln()).sqrt();
        (r * u2.cos(), r * u2.sin())
    }
}

/// Sign of an injected current pulse, in the measured (charge-positive)
/// convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseDirection {
    Charge,
    Discharge,
}

/// What a fault does to the circuit while active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaultKind {
    /// Resistor across the tabs; bypasses the current sensor.
    ExternalShort { r_sc: f64 },
    /// Step change of the external load current; fully visible to the
    /// sensor and to the cell.
    CurrentPulse { amps: f64, direction: PulseDirection },
    /// Both at once — the "hidden fault" construction.
    ShortPlusPulse {
        r_sc: f64,
        amps: f64,
        direction: PulseDirection,
    },
}

/// A fault active over `[t_start, t_end)` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultSpec {
    pub kind: FaultKind,
    pub t_start: f64,
    pub t_end: f64,
}

impl FaultSpec {
    pub fn new(kind: FaultKind, t_start: f64, t_end: f64) -> Result<Self> {
        if t_start >= t_end || !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::InvalidParameter("fault needs t_start < t_end"));
        }
        let r_ok = match kind {
            FaultKind::ExternalShort { r_sc } => r_sc > 0.0,
            FaultKind::ShortPlusPulse { r_sc, amps, .. } => r_sc > 0.0 && amps >= 0.0,
            FaultKind::CurrentPulse { amps, .. } => amps >= 0.0,
        };
        if !r_ok {
            return Err(Error::InvalidParameter(
                "short resistance must be positive and pulse amps non-negative",
            ));
        }
        Ok(Self {
            kind,
            t_start,
            t_end,
        })
    }

    fn active_at(&self, t: f64) -> bool {
        t >= self.t_start && t < self.t_end
    }
}

/// What the instruments record, plus the injected ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    /// Terminal voltage (V) as measured at the tabs.
    pub voltage: TimeSeries,
    /// Shunt current (A), charge-positive. External-short current does NOT
    /// flow through the shunt and is absent here.
    pub current: TimeSeries,
    /// Injected faults, sorted by start time.
    pub truth: Vec<FaultSpec>,
}

/// [`SimOutput`] plus internal state traces, for bookkeeping checks.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub output: SimOutput,
    /// State of charge per sample.
    pub soc: Vec<f64>,
    /// Total cell current per sample (A, discharge-positive), including
    /// short-circuit current.
    pub cell_current: Vec<f64>,
}

/// Runs the circuit model against a load profile with the given faults and
/// returns only the instrument-visible channels.
pub fn simulate(params: &CellParams, load: &TimeSeries, faults: &[FaultSpec]) -> Result<SimOutput> {
    simulate_trace(params, load, faults).map(|t| t.output)
}

/// As [`simulate`], but also exposes the SOC and total-cell-current traces.
pub fn simulate_trace(
    params: &CellParams,
    load: &TimeSeries,
    faults: &[FaultSpec],
) -> Result<SimTrace> {
    params.validate()?;
    let dt = load.dt();
    let t_last = load.end_time();
    for f in faults {
        if f.t_start < load.t0() || f.t_end > t_last + dt {
            return Err(Error::FaultOutsideSpan {
                t_start: f.t_start,
                t_end: f.t_end,
            });
        }
    }

    let capacity = params.capacity_as();
    let mut soc = params.soc0;
    let mut v_rc = 0.0;
    let mut dither = Dither::new();
    let n = load.len();
    let mut voltage = Vec::with_capacity(n);
    let mut current = Vec::with_capacity(n);
    let mut soc_trace = Vec::with_capacity(n);
    let mut cell_trace = Vec::with_capacity(n);

    for k in 0..n {
        let t = load.time_at(k);

        // Measured current: external load plus injected pulses (charge-positive).
        let mut i_meas = load.values()[k];
        // Conductance of any active external short (parallel if several).
        let mut g_sc = 0.0;
        for f in faults.iter().filter(|f| f.active_at(t)) {
            match f.kind {
                FaultKind::ExternalShort { r_sc } => g_sc += 1.0 / r_sc,
                FaultKind::CurrentPulse { amps, direction } => {
                    i_meas += signed(amps, direction);
                }
                FaultKind::ShortPlusPulse {
                    r_sc,
                    amps,
                    direction,
                } => {
                    g_sc += 1.0 / r_sc;
                    i_meas += signed(amps, direction);
                }
            }
        }

        // Internal discharge-positive current through the cell, excluding the
        // short; the short current follows from the terminal voltage.
        let i_dis = -i_meas;
        // v = ocv - v_rc - (i_dis + v*g_sc) * r0  =>  solve for v.
        let v = (params.ocv.voltage_at(soc) - v_rc - i_dis * params.r0)
            / (1.0 + params.r0 * g_sc);
        let i_sc = v * g_sc;
        let i_cell = i_dis + i_sc;

        let (nv, ni) = dither.next_pair();
        voltage.push(quantize(v + params.v_noise * nv, params.v_lsb));
        current.push(quantize(i_meas + params.i_noise * ni, params.i_lsb));
        soc_trace.push(soc);
        cell_trace.push(i_cell);

        soc -= dt * i_cell / capacity;
        if !(0.0..=1.0).contains(&soc) {
            return Err(Error::SocOutOfRange { t, soc });
        }
        v_rc += dt * (i_cell / params.c1 - v_rc / (params.r1 * params.c1));
    }

    let mut truth = faults.to_vec();
    truth.sort_by(|a, b| a.t_start.partial_cmp(&b.t_start).expect("finite times"));

    Ok(SimTrace {
        output: SimOutput {
            voltage: TimeSeries::new(load.t0(), dt, voltage, Unit::Volts)?,
            current: TimeSeries::new(load.t0(), dt, current, Unit::Amperes)?,
            truth,
        },
        soc: soc_trace,
        cell_current: cell_trace,
    })
}

fn signed(amps: f64, direction: PulseDirection) -> f64 {
    match direction {
        PulseDirection::Charge => amps,
        PulseDirection::Discharge => -amps,
    }
}

/// One drive cycle lasts this long (s).
pub const FUDS_CYCLE_SECONDS: f64 = 1370.0;

// Pseudo-FUDS shape constants. These are calibrated jointly so that, with the
// default cell, the wavelet-coherence background of a fault-free window stays
// inside the robust threshold while a 20-30 mV incoherent dip clears it:
//
// * the stochastic drive (the main body of the profile, like the rolling
//   speed variations of a drive schedule) is band-limited to 0.015-0.04 Hz,
//   comfortably below the 0.1 Hz demarcation, so its wavelet skirts do not
//   reach the scored band;
// * discharge pulses are trapezoids with 8 s ramps: they add realistic load
//   excursions without planting step edges in the scored band, where even a
//   coherent edge leaves a small residue because the cell's impedance is
//   not perfectly flat;
// * pulse spacing is irregular (minimum separation, no fixed period) —
//   a periodic train would stack its repetition-rate harmonics into one
//   coarse-scale line tall enough to capture the normalization anchor.
const FUDS_BIAS_AMPS: f64 = -2.0;
const FUDS_HARMONIC_MIN: u32 = 7; // 7/1370 s ≈ 0.0051 Hz
const FUDS_HARMONIC_MAX: u32 = 21; // 21/1370 s ≈ 0.0153 Hz
const FUDS_HARMONIC_RMS: f64 = 0.3;
const FUDS_PULSES_PER_CYCLE: usize = 5;
const FUDS_PULSE_AMPS: (f64, f64) = (4.0, 9.0);
const FUDS_PULSE_WIDTH: (f64, f64) = (3.0, 6.0);
const FUDS_PULSE_RAMP: f64 = 6.0;
const FUDS_PULSE_MIN_SEPARATION: f64 = 60.0;
// Ordinary pulses keep clear of the peak event's placement window.
const FUDS_PULSE_REGION: (f64, f64) = (60.0, 1040.0);
// One strong, short "peak acceleration" event per cycle, late in the cycle.
// Every real drive schedule has one dominant transient; here it also pins
// the scalogram maximum of BOTH channels (the normalization anchors) to the
// same in-band feature on every seed, which keeps coherent load steps
// self-canceling.
const FUDS_PEAK_EVENT_AMPS: f64 = 40.0;
const FUDS_PEAK_EVENT_WIDTH: f64 = 3.0;
const FUDS_PEAK_EVENT_WINDOW: (f64, f64) = (1050.0, 1200.0);

/// Deterministic pseudo-FUDS load: band-limited stochastic drive below
/// 0.05 Hz plus sparse rectangular discharge pulses, repeating every 1370 s.
/// Charge-positive convention; the mean is a net discharge and the peak
/// magnitude stays below 60 A.
pub fn gen_pseudo_fuds(duration: f64, dt: f64, seed: u64) -> Result<TimeSeries> {
    if dt <= 0.0 || !dt.is_finite() || !duration.is_finite() || duration < dt {
        return Err(Error::InvalidDuration { duration, dt });
    }
    let n_total = (duration / dt).round().max(1.0) as usize;
    let per_cycle = (FUDS_CYCLE_SECONDS / dt).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Harmonics of the cycle period keep the profile exactly periodic.
    let mut harmonics = Vec::new();
    for k in FUDS_HARMONIC_MIN..=FUDS_HARMONIC_MAX {
        let f = k as f64 / FUDS_CYCLE_SECONDS;
        let amp = rng.random_range(0.4..1.6);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        harmonics.push((f, amp, phase));
    }
    let raw_rms = (harmonics.iter().map(|h| h.1 * h.1).sum::<f64>() / 2.0).sqrt();
    let gain = FUDS_HARMONIC_RMS / raw_rms;

    // Irregularly spaced pulses: rejection-sample start times, keep margins
    // from the cycle edges so the mirrored boundary sees no transient.
    let full_width = |w: f64| w + 2.0 * FUDS_PULSE_RAMP;
    let mut pulses: Vec<(f64, f64, f64)> = Vec::new();
    while pulses.len() < FUDS_PULSES_PER_CYCLE {
        let width = rng.random_range(FUDS_PULSE_WIDTH.0..FUDS_PULSE_WIDTH.1);
        let start =
            rng.random_range(FUDS_PULSE_REGION.0..FUDS_PULSE_REGION.1 - full_width(width));
        let clear = pulses.iter().all(|&(s, w, _)| {
            start + full_width(width) + FUDS_PULSE_MIN_SEPARATION < s
                || s + full_width(w) + FUDS_PULSE_MIN_SEPARATION < start
        });
        if clear {
            let amps = rng.random_range(FUDS_PULSE_AMPS.0..FUDS_PULSE_AMPS.1);
            pulses.push((start, width, amps));
        }
    }

    let peak_start =
        rng.random_range(FUDS_PEAK_EVENT_WINDOW.0..FUDS_PEAK_EVENT_WINDOW.1);

    let cycle: Vec<f64> = (0..per_cycle)
        .map(|k| {
            let t = k as f64 * dt;
            let mut v = FUDS_BIAS_AMPS;
            for &(f, amp, phase) in &harmonics {
                v += gain * amp * (std::f64::consts::TAU * f * t + phase).cos();
            }
            for &(start, width, amps) in &pulses {
                v -= amps * trapezoid(t, start, width, FUDS_PULSE_RAMP);
            }
            if t >= peak_start && t < peak_start + FUDS_PEAK_EVENT_WIDTH {
                v -= FUDS_PEAK_EVENT_AMPS;
            }
            v
        })
        .collect();
    debug_assert!(cycle.iter().all(|v| v.abs() <= 60.0));

    let values: Vec<f64> = (0..n_total).map(|k| cycle[k % per_cycle]).collect();
    TimeSeries::new(0.0, dt, values, Unit::Amperes)
}

/// Trapezoidal pulse shape: ramp up over `ramp` seconds from `start`, hold
/// for `width`, ramp back down. Returns the dimensionless level in `[0, 1]`.
fn trapezoid(t: f64, start: f64, width: f64, ramp: f64) -> f64 {
    let up_end = start + ramp;
    let hold_end = up_end + width;
    let down_end = hold_end + ramp;
    if t <= start || t >= down_end {
        0.0
    } else if t < up_end {
        (t - start) / ramp
    } else if t <= hold_end {
        1.0
    } else {
        (down_end - t) / ramp
    }
}

/// The experiment's five fault cases; cycle 1 carries the three micro-shorts,
/// cycle 2 the false and hidden faults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Fault-free baseline run.
    None,
    /// 500 mΩ external short, 501–503 s.
    Fault1,
    /// 500 mΩ external short, 903–906 s.
    Fault2,
    /// 500 mΩ external short, 1002–1005 s.
    Fault3,
    /// 60 A discharge pulse, 621–625 s of cycle 2 (a "false" fault).
    Fault4,
    /// 100 mΩ short plus 40 A charge pulse, 1021–1024 s of cycle 2 (a
    /// "hidden" fault).
    Fault5,
    /// All five.
    All,
}

/// Resistance used for the micro-short faults (Ω).
pub const TMSC_SHORT_OHMS: f64 = 0.5;

fn scenario_fault(case: Scenario) -> Option<FaultSpec> {
    let cycle2 = FUDS_CYCLE_SECONDS;
    match case {
        Scenario::None | Scenario::All => None,
        Scenario::Fault1 => Some(
            FaultSpec::new(
                FaultKind::ExternalShort {
                    r_sc: TMSC_SHORT_OHMS,
                },
                501.0,
                503.0,
            )
            .expect("static fault spec"),
        ),
        Scenario::Fault2 => Some(
            FaultSpec::new(
                FaultKind::ExternalShort {
                    r_sc: TMSC_SHORT_OHMS,
                },
                903.0,
                906.0,
            )
            .expect("static fault spec"),
        ),
        Scenario::Fault3 => Some(
            FaultSpec::new(
                FaultKind::ExternalShort {
                    r_sc: TMSC_SHORT_OHMS,
                },
                1002.0,
                1005.0,
            )
            .expect("static fault spec"),
        ),
        Scenario::Fault4 => Some(
            FaultSpec::new(
                FaultKind::CurrentPulse {
                    amps: 60.0,
                    direction: PulseDirection::Discharge,
                },
                cycle2 + 621.0,
                cycle2 + 625.0,
            )
            .expect("static fault spec"),
        ),
        Scenario::Fault5 => Some(
            FaultSpec::new(
                FaultKind::ShortPlusPulse {
                    r_sc: 0.1,
                    amps: 40.0,
                    direction: PulseDirection::Charge,
                },
                cycle2 + 1021.0,
                cycle2 + 1024.0,
            )
            .expect("static fault spec"),
        ),
    }
}

/// Faults injected by a scenario, at their absolute trigger times.
pub fn scenario_faults(case: Scenario) -> Vec<FaultSpec> {
    match case {
        Scenario::None => Vec::new(),
        Scenario::All => [
            Scenario::Fault1,
            Scenario::Fault2,
            Scenario::Fault3,
            Scenario::Fault4,
            Scenario::Fault5,
        ]
        .into_iter()
        .filter_map(scenario_fault)
        .collect(),
        single => scenario_fault(single).into_iter().collect(),
    }
}

/// Two pseudo-FUDS cycles (2740 samples at 1 Hz) through the default cell
/// with the selected faults injected at their experiment trigger times.
pub fn make_scenario(case: Scenario, seed: u64) -> Result<SimOutput> {
    make_scenario_with(&CellParams::default(), case, seed)
}

/// As [`make_scenario`], but through a caller-supplied cell.
pub fn make_scenario_with(params: &CellParams, case: Scenario, seed: u64) -> Result<SimOutput> {
    let load = gen_pseudo_fuds(2.0 * FUDS_CYCLE_SECONDS, 1.0, seed)?;
    simulate(params, &load, &scenario_faults(case))
}
