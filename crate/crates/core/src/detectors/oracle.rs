//! Exhaustive-search references for both detection criteria.
//!
//! The oracles synthesize the full waveform of every candidate data
//! sequence (head and tail pilots fixed), correlate it against the whole
//! received frame and return the argmax of the coherent or noncoherent
//! criterion.
//! Cost is `M^(n_data)` full-frame correlations, so frames are capped at
//! [`ORACLE_MAX_SYMBOLS`] symbols and longer frames are refused outright.

use num_complex::Complex64;

use crate::waveforms::{IqFrame, Modulator};
use crate::{CpmError, Result};

use super::{with_pilots, Decision};

/// Longest frame (pilots included) the oracles accept.
pub const ORACLE_MAX_SYMBOLS: usize = 12;

fn search(
    frame: &IqFrame,
    modulator: &Modulator,
    score: impl Fn(Complex64) -> f64,
) -> Result<(Vec<i8>, Complex64, f64)> {
    let scheme = modulator.scheme();
    if frame.n_symbols > ORACLE_MAX_SYMBOLS {
        return Err(CpmError::TooLarge {
            what: "frame symbols for exhaustive search",
            requested: frame.n_symbols,
            max: ORACLE_MAX_SYMBOLS,
        });
    }
    if frame.k != modulator.k() {
        return Err(CpmError::Mismatch(format!(
            "frame sampled at k = {}, oracle modulator at k = {}",
            frame.k,
            modulator.k()
        )));
    }
    let m = scheme.order();
    let n_data = frame.n_symbols - 2 * scheme.pilot_len();
    let mut data = vec![0i8; n_data];
    let mut best_score = f64::NEG_INFINITY;
    let mut best_corr = Complex64::new(0.0, 0.0);
    let mut best_data = data.clone();
    for idx in 0..m.pow(n_data as u32) {
        let mut rest = idx;
        for slot in data.iter_mut().rev() {
            *slot = scheme.alphabet()[rest % m];
            rest /= m;
        }
        let symbols = with_pilots(scheme, &data);
        let (wave, _) = modulator.modulate(&symbols, 0)?;
        let mut corr = Complex64::new(0.0, 0.0);
        for (r, s) in frame.samples.iter().zip(&wave.samples) {
            corr += r * s.conj();
        }
        let s = score(corr);
        if s > best_score {
            best_score = s;
            best_corr = corr;
            best_data.copy_from_slice(&data);
        }
    }
    Ok((best_data, best_corr, best_score))
}

/// Brute-force coherent ML: maximizes `Re[e^{-j assumed_phase} * corr]` over
/// every candidate sequence.
pub fn oracle_coherent(
    frame: &IqFrame,
    modulator: &Modulator,
    assumed_phase: f64,
) -> Result<Decision> {
    let rot = Complex64::from_polar(1.0, -assumed_phase);
    let (symbols, _, score) = search(frame, modulator, |corr| (rot * corr).re)?;
    Ok(Decision {
        symbols,
        final_metric: score,
    })
}

/// Brute-force noncoherent ML: maximizes `|corr|` over every candidate
/// sequence.
pub fn oracle_noncoherent(frame: &IqFrame, modulator: &Modulator) -> Result<Decision> {
    let (symbols, corr, _) = search(frame, modulator, |corr| corr.norm_sqr())?;
    Ok(Decision {
        symbols,
        final_metric: corr.norm(),
    })
}
