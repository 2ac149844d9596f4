//! Detection of transient micro short-circuit (TMSC) faults in lithium-ion
//! battery telemetry.
//!
//! A TMSC briefly sags the terminal voltage by a few tens of millivolts
//! without any matching change in the measured current. Under dynamic load
//! that dip hides inside normal voltage pulsation, but it is an *incoherent*
//! feature: every legitimate voltage transient is driven by a current
//! transient the sensor also sees. The pipeline therefore computes Morlet
//! scalograms of both channels, min-max normalizes them, takes the
//! elementwise magnitude difference as a coherence map, and flags windows of
//! time where the high-frequency band of that map lights up.
//!
//! Modules:
//!
//! * [`signal`] — validated uniform time series, windowing, padding;
//! * [`spectral`] — Morlet CWT (fast frequency-domain path and a direct
//!   time-domain reference), scale grid;
//! * [`coherence`] — normalization, coherence map, band/slice statistics;
//! * [`detector`] — threshold policies, event extraction, the end-to-end
//!   [`detector::analyze`] pipeline;
//! * [`sim`] — first-order Thevenin cell simulator with pseudo-FUDS load
//!   generation and fault injection for the five experiment scenarios.

pub mod coherence;
pub mod detector;
pub mod error;
pub mod signal;
pub mod sim;
pub mod spectral;

pub use coherence::{BandSplit, CoherenceMap, NormalizedMap};
pub use detector::{DetectionReport, DetectorConfig, FaultEvent, FaultLabel, ThresholdPolicy};
pub use error::{Error, Result};
pub use signal::{TimeSeries, Unit, WindowSpec};
pub use sim::{CellParams, FaultKind, FaultSpec, OcvCurve, Scenario, SimOutput};
pub use spectral::{MorletParams, ScaleGrid, Scalogram};
