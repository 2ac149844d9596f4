//! Cross-module pipeline invariants on simulated scenarios, plus proptest
//! checks of the small algebraic contracts.

use proptest::prelude::*;
use tmsc_core::coherence::{
    band_score_over_time, coherence_map, mean_coherence_per_frequency, normalize_magnitude,
    time_slice, BandSplit,
};
use tmsc_core::detector::{analyze, compute_threshold, detect_events, ThresholdPolicy};
use tmsc_core::signal::{extract_window, pad_reflect, validate_series, TimeSeries, Unit};
use tmsc_core::sim::{gen_pseudo_fuds, make_scenario, simulate, CellParams, Scenario};
use tmsc_core::spectral::{build_scale_grid, cwt};
use tmsc_core::{DetectorConfig, WindowSpec};

const SEED: u64 = 0;

fn cycle1_config() -> DetectorConfig {
    DetectorConfig {
        window: WindowSpec::new(0.0, 1370.0).unwrap(),
        ..DetectorConfig::default()
    }
}

#[test]
fn analyze_is_deterministic() {
    let out = make_scenario(Scenario::All, SEED).unwrap();
    let cfg = cycle1_config();
    let a = analyze(&out.voltage, &out.current, &cfg).unwrap();
    let b = analyze(&out.voltage, &out.current, &cfg).unwrap();
    assert_eq!(a.threshold, b.threshold);
    assert_eq!(a.events, b.events);
    assert_eq!(a.band_score, b.band_score);
    assert_eq!(a.coherence.data(), b.coherence.data());
}

#[test]
fn event_list_is_invariant_under_channel_scaling() {
    let out = make_scenario(Scenario::All, SEED).unwrap();
    let cfg = cycle1_config();
    let base = analyze(&out.voltage, &out.current, &cfg).unwrap();
    // Different positive gains per channel, as if the loggers used other
    // units or calibrations.
    let v_scaled = out.voltage.scaled(3.0).unwrap();
    let i_scaled = out.current.scaled(0.25).unwrap();
    let scaled = analyze(&v_scaled, &i_scaled, &cfg).unwrap();

    assert_eq!(base.events.len(), scaled.events.len());
    for (a, b) in base.events.iter().zip(&scaled.events) {
        assert_eq!(a.t_start, b.t_start);
        assert_eq!(a.t_end, b.t_end);
        assert_eq!(a.peak_time, b.peak_time);
        assert_eq!(a.peak_frequency, b.peak_frequency);
        assert!((a.peak_score - b.peak_score).abs() < 1e-9);
    }
}

#[test]
fn coherence_map_is_invariant_under_signal_scaling() {
    let out = make_scenario(Scenario::Fault1, SEED).unwrap();
    let cfg = cycle1_config();
    let params = cfg.morlet;
    let grid = build_scale_grid(cfg.f_min, cfg.f_max, cfg.voices_per_octave, &params).unwrap();
    let v = extract_window(&out.voltage, &cfg.window).unwrap();
    let i = extract_window(&out.current, &cfg.window).unwrap();
    let co_a = coherence_map(
        &normalize_magnitude(&cwt(&v, &grid, &params).unwrap()).unwrap(),
        &normalize_magnitude(&cwt(&i, &grid, &params).unwrap()).unwrap(),
    )
    .unwrap();
    let co_b = coherence_map(
        &normalize_magnitude(&cwt(&v.scaled(10.0).unwrap(), &grid, &params).unwrap()).unwrap(),
        &normalize_magnitude(&cwt(&i.scaled(10.0).unwrap(), &grid, &params).unwrap()).unwrap(),
    )
    .unwrap();
    for (a, b) in co_a.data().iter().zip(co_b.data().iter()) {
        assert!((a - b).abs() <= 1e-10);
    }
}

#[test]
fn fault_free_window_has_low_band_coherence_above_split() {
    let out = make_scenario(Scenario::None, SEED).unwrap();
    let report = analyze(&out.voltage, &out.current, &cycle1_config()).unwrap();
    assert!(report.events.is_empty(), "events: {:?}", report.events);

    // Fault threshold exceeds every score sample.
    let max_score = report
        .band_score
        .values()
        .iter()
        .fold(0.0f64, |m, &v| m.max(v));
    assert!(max_score < report.threshold);

    // High-frequency region is coherent relative to the low-frequency one.
    let (band, low): (Vec<_>, Vec<_>) = report
        .mean_profile
        .iter()
        .partition(|(f, _)| *f >= 0.1);
    let band_mean = band.iter().map(|(_, v)| v).sum::<f64>() / band.len() as f64;
    let low_mean = low.iter().map(|(_, v)| v).sum::<f64>() / low.len() as f64;
    assert!(
        band_mean < low_mean,
        "band mean {band_mean} vs low mean {low_mean}"
    );
}

#[test]
fn band_score_stays_in_unit_interval_on_real_data() {
    let out = make_scenario(Scenario::All, SEED).unwrap();
    let report = analyze(&out.voltage, &out.current, &cycle1_config()).unwrap();
    assert!(report
        .band_score
        .values()
        .iter()
        .all(|&v| (0.0..=1.0).contains(&v)));
    assert!(report.coherence.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
}

#[test]
fn threshold_monotonicity_on_pipeline_scores() {
    let out = make_scenario(Scenario::All, SEED).unwrap();
    let report = analyze(&out.voltage, &out.current, &cycle1_config()).unwrap();
    let mut last = usize::MAX;
    for threshold in [0.02, 0.05, 0.08, 0.1, 0.2, 0.9] {
        let n = detect_events(
            &report.band_score,
            threshold,
            5.0,
            &report.coherence,
            BandSplit::default(),
        )
        .unwrap()
        .len();
        assert!(n <= last, "threshold {threshold}: {n} events > {last}");
        last = n;
    }
}

#[test]
fn mean_profile_agrees_with_global_mean() {
    let out = make_scenario(Scenario::Fault2, SEED).unwrap();
    let report = analyze(&out.voltage, &out.current, &cycle1_config()).unwrap();
    let profile_mean = report.mean_profile.iter().map(|(_, v)| v).sum::<f64>()
        / report.mean_profile.len() as f64;
    let global = report.coherence.data().iter().sum::<f64>()
        / report.coherence.data().len() as f64;
    assert!((profile_mean - global).abs() < 1e-12);
}

#[test]
fn robust_threshold_on_fault_free_score_allows_no_alarm() {
    let out = make_scenario(Scenario::None, SEED).unwrap();
    let report = analyze(&out.voltage, &out.current, &cycle1_config()).unwrap();
    let threshold =
        compute_threshold(&report.band_score, &ThresholdPolicy::Robust(6.0)).unwrap();
    let alarms = report
        .band_score
        .values()
        .iter()
        .filter(|&&v| v > threshold)
        .count();
    assert_eq!(alarms, 0);
}

#[test]
fn simulator_composes_with_validate_series() {
    // A 2740-sample 1 Hz simulator output passes telemetry validation.
    let out = make_scenario(Scenario::All, SEED).unwrap();
    for (ts, unit) in [(&out.voltage, Unit::Volts), (&out.current, Unit::Amperes)] {
        let raw: Vec<(f64, f64)> = ts
            .values()
            .iter()
            .enumerate()
            .map(|(k, &v)| (ts.time_at(k), v))
            .collect();
        let validated = validate_series(&raw, 1.0, 0.01, unit).unwrap();
        assert_eq!(validated.len(), 2740);
        assert_eq!(validated.values(), ts.values());
    }
}

#[test]
fn degenerate_window_is_rejected_not_scored() {
    // Constant channels carry no usable structure; analyze must surface
    // DegenerateRange instead of emitting a fake report.
    let v = TimeSeries::new(0.0, 1.0, vec![3.7; 100], Unit::Volts).unwrap();
    let i = TimeSeries::new(0.0, 1.0, vec![0.0; 100], Unit::Amperes).unwrap();
    let cfg = DetectorConfig {
        window: WindowSpec::new(0.0, 100.0).unwrap(),
        ..DetectorConfig::default()
    };
    assert!(matches!(
        analyze(&v, &i, &cfg),
        Err(tmsc_core::Error::DegenerateRange)
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pad_reflect_center_is_exact(values in prop::collection::vec(-1e3f64..1e3, 2..80), n in 0usize..40) {
        let len = values.len();
        let ts = TimeSeries::new(0.0, 0.5, values, Unit::Dimensionless).unwrap();
        prop_assume!(n < len);
        let padded = pad_reflect(&ts, n).unwrap();
        prop_assert_eq!(padded.len(), len + 2 * n);
        prop_assert_eq!(&padded.values()[n..n + len], ts.values());
        // Left and right pads mirror without repeating the edge samples.
        for j in 0..n {
            prop_assert_eq!(padded.values()[j], ts.values()[n - j]);
            prop_assert_eq!(padded.values()[n + len + j], ts.values()[len - 2 - j]);
        }
    }

    #[test]
    fn validate_series_roundtrips_uniform_input(
        t0 in -1e3f64..1e3,
        dt in prop::sample::select(vec![0.25f64, 0.5, 1.0, 2.0]),
        values in prop::collection::vec(-1e2f64..1e2, 2..60),
    ) {
        let raw: Vec<(f64, f64)> = values
            .iter()
            .enumerate()
            .map(|(k, &v)| (t0 + k as f64 * dt, v))
            .collect();
        let ts = validate_series(&raw, dt, 0.01 * dt, Unit::Volts).unwrap();
        prop_assert_eq!(ts.values(), &values[..]);
        // Idempotent: validating the reconstruction gives the same series.
        let raw2: Vec<(f64, f64)> = ts
            .values()
            .iter()
            .enumerate()
            .map(|(k, &v)| (ts.time_at(k), v))
            .collect();
        let again = validate_series(&raw2, dt, 0.01 * dt, Unit::Volts).unwrap();
        prop_assert_eq!(ts, again);
    }

    #[test]
    fn window_then_pad_then_unpad_is_identity(
        start in 0usize..50,
        count in 2usize..60,
        n in 0usize..30,
    ) {
        let total = 150;
        let values: Vec<f64> = (0..total).map(|k| (k as f64 * 0.7).sin()).collect();
        let ts = TimeSeries::new(0.0, 1.0, values, Unit::Volts).unwrap();
        prop_assume!(start + count <= total && n < count);
        let w = WindowSpec::new(start as f64, count as f64).unwrap();
        let win = extract_window(&ts, &w).unwrap();
        prop_assert_eq!(win.len(), count);
        let padded = pad_reflect(&win, n).unwrap();
        prop_assert_eq!(&padded.values()[n..n + count], win.values());
    }

    #[test]
    fn fuds_determinism_and_budget(seed in 0u64..500) {
        let a = gen_pseudo_fuds(1370.0, 1.0, seed).unwrap();
        let b = gen_pseudo_fuds(1370.0, 1.0, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let mean = a.values().iter().sum::<f64>() / a.len() as f64;
        prop_assert!(mean < 0.0);
        prop_assert!(a.values().iter().all(|v| v.abs() <= 60.0));
    }

    #[test]
    fn short_is_invisible_in_measured_current(seed in 0u64..40) {
        let load = gen_pseudo_fuds(600.0, 1.0, seed).unwrap();
        let fault = tmsc_core::FaultSpec::new(
            tmsc_core::FaultKind::ExternalShort { r_sc: 0.5 },
            200.0,
            203.0,
        )
        .unwrap();
        let base = simulate(&CellParams::default(), &load, &[]).unwrap();
        let faulty = simulate(&CellParams::default(), &load, &[fault]).unwrap();
        prop_assert_eq!(base.current.values(), faulty.current.values());
        prop_assert!(base.voltage.values() != faulty.voltage.values());
    }
}

#[test]
fn faulty_instant_has_higher_band_coherence_than_normal_instant() {
    // Scenario with one micro-short at 501-503 s: the frequency profile at
    // 502 s carries far more high-band energy than the quiet instant 430 s.
    let out = make_scenario(Scenario::Fault1, SEED).unwrap();
    let report = analyze(&out.voltage, &out.current, &cycle1_config()).unwrap();
    let band_mean = |t: f64| {
        let profile = time_slice(&report.coherence, t).unwrap();
        let band: Vec<f64> = profile
            .iter()
            .filter(|(f, _)| *f >= 0.1)
            .map(|(_, v)| *v)
            .collect();
        band.iter().sum::<f64>() / band.len() as f64
    };
    let faulty = band_mean(502.0);
    let normal = band_mean(430.0);
    assert!(
        faulty > 3.0 * normal,
        "band mean at 502 s ({faulty}) vs 430 s ({normal})"
    );
}

#[test]
fn events_are_sorted_and_well_formed() {
    let out = make_scenario(Scenario::All, SEED).unwrap();
    let report = analyze(&out.voltage, &out.current, &cycle1_config()).unwrap();
    assert!(!report.events.is_empty());
    for pair in report.events.windows(2) {
        assert!(pair[0].t_end < pair[1].t_start, "events overlap");
    }
    for e in &report.events {
        assert!(e.t_start <= e.peak_time && e.peak_time <= e.t_end);
        assert!(e.peak_score > report.threshold);
        assert!(e.peak_frequency >= 0.1);
    }
}

#[test]
fn band_score_series_shares_map_timeline() {
    let out = make_scenario(Scenario::Fault1, SEED).unwrap();
    let cfg = cycle1_config();
    let params = cfg.morlet;
    let grid = build_scale_grid(cfg.f_min, cfg.f_max, cfg.voices_per_octave, &params).unwrap();
    let v = extract_window(&out.voltage, &cfg.window).unwrap();
    let i = extract_window(&out.current, &cfg.window).unwrap();
    let co = coherence_map(
        &normalize_magnitude(&cwt(&v, &grid, &params).unwrap()).unwrap(),
        &normalize_magnitude(&cwt(&i, &grid, &params).unwrap()).unwrap(),
    )
    .unwrap();
    let score = band_score_over_time(&co, BandSplit::default()).unwrap();
    assert_eq!(score.t0(), co.t0());
    assert_eq!(score.dt(), co.dt());
    assert_eq!(score.len(), co.cols());
    let profile = mean_coherence_per_frequency(&co);
    assert_eq!(profile.len(), grid.len());
}
