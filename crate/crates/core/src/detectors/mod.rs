//! Sequence detectors for CPM frames.
//!
//! Every detector consumes frames built with the pilot convention: `L - 1`
//! known `+1` pilots are prepended and appended to the data. The head
//! pilots give each trellis a single known starting state; the tail pilots
//! terminate the frame so that every data symbol's pulse completes inside
//! it (without them the last data symbols expose only a small fraction of
//! their phase signature and their error rate floors the whole frame).
//! Decisions cover only the data symbols. Four detectors are provided:
//!
//! - [`CoherentMlsd`] — classic Viterbi MLSD over `p * M^(L-1)` states,
//!   maximizing the real part of the full-frame correlation for a given
//!   carrier-phase estimate.
//! - [`NoncoherentMlsd`] — the low-complexity noncoherent detector: a
//!   Viterbi search over only `M^L` states where the cumulative phase rides
//!   along each survivor as a parameter instead of expanding the state
//!   space. Maximizes the magnitude of the full-frame correlation and is
//!   exactly invariant to any global phase rotation of the input. Supports
//!   keeping several survivors per state.
//! - [`MultiSymbolDetector`] — a classic exhaustive-window noncoherent MSD
//!   baseline that decides the middle symbol of a sliding window.
//! - [`oracle_coherent`] / [`oracle_noncoherent`] — brute-force references
//!   evaluating the two decision criteria over every candidate sequence.

mod coherent;
mod msd;
mod oracle;
mod proposed;

pub use coherent::{mlsd_coherent, CoherentMlsd};
pub use msd::{msd_noncoherent, MultiSymbolDetector};
pub use oracle::{oracle_coherent, oracle_noncoherent, ORACLE_MAX_SYMBOLS};
pub use proposed::{
    merging_diagnosis, nc_mlsd_proposed, update_state, MergingDiagnosis, NoncoherentMlsd, Survivor,
    TransitionCandidate,
};

use crate::waveforms::Scheme;

/// A decided symbol sequence with the metric of the winning path. The
/// metric is the accumulated real correlation for coherent detection and
/// the correlation magnitude for noncoherent detection.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub symbols: Vec<i8>,
    pub final_metric: f64,
}

/// The `L - 1` known pilot symbols prepended to every frame.
pub fn pilot_prefix(scheme: &Scheme) -> Vec<i8> {
    vec![1; scheme.pilot_len()]
}

/// Wraps a data sequence in the frame convention: `L - 1` head pilots and
/// `L - 1` tail pilots, all `+1`.
pub fn with_pilots(scheme: &Scheme, data: &[i8]) -> Vec<i8> {
    let mut symbols = pilot_prefix(scheme);
    symbols.extend_from_slice(data);
    symbols.extend(std::iter::repeat(1).take(scheme.pilot_len()));
    symbols
}

/// Total pilot symbols per frame (head plus tail).
pub fn pilot_overhead(scheme: &Scheme) -> usize {
    2 * scheme.pilot_len()
}
