//! Simulation workbench for continuous phase modulation (CPM) detection in
//! aeronautical telemetry.
//!
//! The crate covers the full physical-layer chain at complex baseband:
//!
//! - [`waveforms`] — PCM/FM and ARTM CPM schemes, frequency/phase pulse
//!   tables and the constant-envelope modulator.
//! - [`channel`] — calibrated complex AWGN with a known, explicit or
//!   per-frame random carrier phase.
//! - [`frontend`] — the bank of `M^L` matched filters and per-symbol
//!   correlations that feed every trellis detector.
//! - [`detectors`] — coherent MLSD, the low-complexity noncoherent
//!   survived-phase Viterbi detector (with K-survivor extension), a classic
//!   multi-symbol detection baseline, and exhaustive oracles for both
//!   decision criteria.
//! - [`analysis`] — operation/storage accounting for the detectors,
//!   brute-force distance spectra and the union bound.
//!
//! All time is expressed in symbol durations `T`, with `k` samples per
//! symbol. Modulated samples have unit magnitude, so the discrete symbol
//! energy is `Es = k` and `Eb = k / log2(M)`.

pub mod analysis;
pub mod channel;
pub mod detectors;
mod error;
pub mod frontend;
pub mod waveforms;

pub use error::{CpmError, Result};
pub use waveforms::{IqFrame, ModIndex, Modulator, PulseKind, PulseTable, Scheme, SchemeKind};
