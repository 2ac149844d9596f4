//! JSON serialization of detection reports and simulator ground truth.
//!
//! Key order follows struct declaration order (deterministic) and every
//! number is rounded to 9 significant digits before encoding, so identical
//! reports produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Serialize, Serializer};
use tmsc_core::detector::{DetectionReport, FaultLabel, ThresholdPolicy};
use tmsc_core::sim::{FaultKind, FaultSpec, PulseDirection};

use crate::error::{CliError, Result};

/// Rounds to 9 significant digits; the JSON value then prints with at most
/// those digits (shortest representation of the rounded double).
fn sig9(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        format!("{x:.8e}").parse().expect("rounded float reparses")
    }
}

fn ser_f9<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(sig9(*x))
}

fn ser_f9_vec<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|&x| sig9(x)))
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum ThresholdDoc {
    Fixed {
        #[serde(serialize_with = "ser_f9")]
        value: f64,
    },
    Robust {
        #[serde(serialize_with = "ser_f9")]
        k: f64,
    },
}

impl From<ThresholdPolicy> for ThresholdDoc {
    fn from(policy: ThresholdPolicy) -> Self {
        match policy {
            ThresholdPolicy::Fixed(value) => ThresholdDoc::Fixed { value },
            ThresholdPolicy::Robust(k) => ThresholdDoc::Robust { k },
        }
    }
}

#[derive(Serialize)]
struct ConfigDoc {
    #[serde(serialize_with = "ser_f9")]
    window_start_s: f64,
    #[serde(serialize_with = "ser_f9")]
    window_length_s: f64,
    #[serde(serialize_with = "ser_f9")]
    f_min_hz: f64,
    #[serde(serialize_with = "ser_f9")]
    f_max_hz: f64,
    voices_per_octave: u32,
    #[serde(serialize_with = "ser_f9")]
    omega0: f64,
    #[serde(serialize_with = "ser_f9")]
    f_split_hz: f64,
    threshold_policy: ThresholdDoc,
    #[serde(serialize_with = "ser_f9")]
    min_event_gap_s: f64,
}

#[derive(Serialize)]
struct EventDoc {
    #[serde(serialize_with = "ser_f9")]
    t_start_s: f64,
    #[serde(serialize_with = "ser_f9")]
    t_end_s: f64,
    #[serde(serialize_with = "ser_f9")]
    peak_time_s: f64,
    #[serde(serialize_with = "ser_f9")]
    peak_score: f64,
    #[serde(serialize_with = "ser_f9")]
    peak_frequency_hz: f64,
    label: &'static str,
}

#[derive(Serialize)]
struct SeriesDoc {
    #[serde(serialize_with = "ser_f9")]
    t0_s: f64,
    #[serde(serialize_with = "ser_f9")]
    dt_s: f64,
    #[serde(serialize_with = "ser_f9_vec")]
    values: Vec<f64>,
}

#[derive(Serialize)]
struct ProfileDoc {
    #[serde(serialize_with = "ser_f9_vec")]
    frequencies_hz: Vec<f64>,
    #[serde(serialize_with = "ser_f9_vec")]
    values: Vec<f64>,
}

#[derive(Serialize)]
struct ReportDoc {
    config: ConfigDoc,
    #[serde(serialize_with = "ser_f9")]
    threshold: f64,
    events: Vec<EventDoc>,
    band_score: SeriesDoc,
    mean_coherence_per_frequency: ProfileDoc,
}

fn label_str(label: FaultLabel) -> &'static str {
    match label {
        FaultLabel::TmscCandidate => "tmsc_candidate",
    }
}

fn doc_from(report: &DetectionReport) -> ReportDoc {
    ReportDoc {
        config: ConfigDoc {
            window_start_s: report.config.window.start(),
            window_length_s: report.config.window.length(),
            f_min_hz: report.config.f_min,
            f_max_hz: report.config.f_max,
            voices_per_octave: report.config.voices_per_octave,
            omega0: report.config.morlet.omega0(),
            f_split_hz: report.config.split.f_split(),
            threshold_policy: report.config.threshold.into(),
            min_event_gap_s: report.config.min_event_gap,
        },
        threshold: report.threshold,
        events: report
            .events
            .iter()
            .map(|e| EventDoc {
                t_start_s: e.t_start,
                t_end_s: e.t_end,
                peak_time_s: e.peak_time,
                peak_score: e.peak_score,
                peak_frequency_hz: e.peak_frequency,
                label: label_str(e.label),
            })
            .collect(),
        band_score: SeriesDoc {
            t0_s: report.band_score.t0(),
            dt_s: report.band_score.dt(),
            values: report.band_score.values().to_vec(),
        },
        mean_coherence_per_frequency: ProfileDoc {
            frequencies_hz: report.mean_profile.iter().map(|(f, _)| *f).collect(),
            values: report.mean_profile.iter().map(|(_, v)| *v).collect(),
        },
    }
}

fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, doc).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Writes the full detection report (config echo, threshold, events, score
/// series, per-frequency mean profile).
pub fn write_report_json(report: &DetectionReport, path: &Path) -> Result<()> {
    write_json(path, &doc_from(report))
}

#[derive(Serialize)]
struct FaultDoc {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(serialize_with = "ser_opt_f9")]
    r_sc_ohms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(serialize_with = "ser_opt_f9")]
    pulse_amps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pulse_direction: Option<&'static str>,
    #[serde(serialize_with = "ser_f9")]
    t_start_s: f64,
    #[serde(serialize_with = "ser_f9")]
    t_end_s: f64,
}

fn ser_opt_f9<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_f64(sig9(*v)),
        None => s.serialize_none(),
    }
}

fn direction_str(d: PulseDirection) -> &'static str {
    match d {
        PulseDirection::Charge => "charge",
        PulseDirection::Discharge => "discharge",
    }
}

/// Writes the injected ground-truth fault list.
pub fn write_truth_json(truth: &[FaultSpec], path: &Path) -> Result<()> {
    let docs: Vec<FaultDoc> = truth
        .iter()
        .map(|f| {
            let (kind, r_sc, amps, dir) = match f.kind {
                FaultKind::ExternalShort { r_sc } => {
                    ("external_short", Some(r_sc), None, None)
                }
                FaultKind::CurrentPulse { amps, direction } => {
                    ("current_pulse", None, Some(amps), Some(direction))
                }
                FaultKind::ShortPlusPulse {
                    r_sc,
                    amps,
                    direction,
                } => ("short_plus_pulse", Some(r_sc), Some(amps), Some(direction)),
            };
            FaultDoc {
                kind,
                r_sc_ohms: r_sc,
                pulse_amps: amps,
                pulse_direction: dir.map(direction_str),
                t_start_s: f.t_start,
                t_end_s: f.t_end,
            }
        })
        .collect();
    write_json(path, &docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tmsc_core::detector::analyze;
    use tmsc_core::sim::{make_scenario, Scenario};
    use tmsc_core::{DetectorConfig, WindowSpec};

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("tmsc-report-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(format!("{}-{name}", std::process::id()))
    }

    #[test]
    fn sig9_rounds_to_nine_significant_digits() {
        assert_eq!(sig9(0.123456789123), 0.123456789);
        assert_eq!(sig9(3.7), 3.7);
        assert_eq!(sig9(0.0), 0.0);
        assert_eq!(sig9(-1234567891.23), -1234567890.0);
    }

    #[test]
    fn report_json_is_deterministic_and_keeps_empty_events() {
        let out = make_scenario(Scenario::None, 5).unwrap();
        let cfg = DetectorConfig {
            window: WindowSpec::new(0.0, 1370.0).unwrap(),
            ..DetectorConfig::default()
        };
        let report = analyze(&out.voltage, &out.current, &cfg).unwrap();
        assert!(report.events.is_empty());
        let a = tmp("report-a.json");
        let b = tmp("report-b.json");
        write_report_json(&report, &a).unwrap();
        write_report_json(&report, &b).unwrap();
        let text_a = std::fs::read(&a).unwrap();
        let text_b = std::fs::read(&b).unwrap();
        assert_eq!(text_a, text_b, "identical reports serialize identically");
        let text = String::from_utf8(text_a).unwrap();
        assert!(text.contains("\"events\": []"), "empty list present");
        assert!(text.contains("\"threshold_policy\""));
        std::fs::remove_file(&a).ok();
        std::fs::remove_file(&b).ok();
    }

    #[test]
    fn truth_json_lists_table_faults() {
        let out = make_scenario(Scenario::All, 5).unwrap();
        let path = tmp("truth.json");
        write_truth_json(&out.truth, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.as_array().unwrap().len(), 5);
        assert_eq!(parsed[0]["kind"], "external_short");
        assert_eq!(parsed[3]["kind"], "current_pulse");
        assert_eq!(parsed[3]["pulse_direction"], "discharge");
        assert_eq!(parsed[4]["kind"], "short_plus_pulse");
        assert_eq!(parsed[4]["t_start_s"], 2391.0);
        std::fs::remove_file(&path).ok();
    }
}
