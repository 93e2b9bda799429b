//! Low-complexity noncoherent MLSD with survived phases.
//!
//! With an unknown carrier phase the ML criterion maximizes the magnitude of
//! the full-frame correlation instead of its real part, which makes the
//! decision invariant to any global rotation of the received signal. The
//! cumulative phase of completed symbols is then no longer an independent
//! state coordinate: it follows the survivor recursively, one exact integer
//! step per completed symbol. Dropping it from the state vector shrinks the
//! trellis from `p * M^(L-1)` states to `M^L` and from `p * M^L` to
//! `M^(L+1)` branch metrics per symbol.
//!
//! Each state keeps up to `n_survivors` entries of (complex path metric,
//! survived phase, back-pointer). A candidate transition rotates the
//! matched-filter output by the predecessor's survived phase, adds it to the
//! predecessor's complex metric, and advances the survived phase by the
//! symbol whose pulse completes during the interval (the symbol leaving the
//! matched-filter window). Keeping more than one survivor per state recovers
//! the loss from early path merges on high-order alphabets.

use num_complex::Complex64;

use crate::frontend::{build_banks, correlate_into, FilterBank};
use crate::waveforms::{IqFrame, Modulator, Scheme};
use crate::{CpmError, Result};

use super::Decision;

/// Largest supported survivor list per state.
pub const MAX_SURVIVORS: usize = 4;

/// One candidate transition into a trellis state.
#[derive(Clone, Copy, Debug)]
pub struct TransitionCandidate {
    /// Survived phase index of the predecessor.
    pub prev_phase: usize,
    /// Complex path metric of the predecessor.
    pub prev_metric: Complex64,
    /// Symbol whose pulse completes during this interval; its phase step
    /// moves from the matched-filter window into the survived phase.
    pub completing_symbol: i8,
    /// Matched-filter output for the destination's symbol window.
    pub correlation: Complex64,
}

/// A kept survivor after add-compare-select.
#[derive(Clone, Copy, Debug)]
pub struct Survivor {
    pub metric: Complex64,
    pub phase: usize,
    /// Index of the winning entry in the candidate list.
    pub candidate_index: usize,
}

#[inline]
fn insert_ranked(
    best: &mut [(f64, Complex64, usize, u32)],
    len: &mut usize,
    cap: usize,
    cand: (f64, Complex64, usize, u32),
) {
    let mut pos = *len;
    while pos > 0 && cand.0 > best[pos - 1].0 {
        pos -= 1;
    }
    if pos >= cap {
        return;
    }
    if *len < cap {
        *len += 1;
    }
    for i in (pos + 1..*len).rev() {
        best[i] = best[i - 1];
    }
    best[pos] = cand;
}

/// Add-compare-select for one state: rotates each candidate's correlation by
/// its predecessor phase, accumulates the complex metric, advances the
/// survived phase by the completing symbol's step (modulation index taken
/// from cycle position `h_index`), and keeps the `n_survivors` candidates
/// with the largest metric magnitude. Exact magnitude ties resolve to the
/// earliest candidate, so callers listing candidates by ascending
/// predecessor state index get the documented tie-break.
pub fn update_state(
    candidates: &[TransitionCandidate],
    scheme: &Scheme,
    h_index: usize,
    n_survivors: usize,
) -> Vec<Survivor> {
    assert!(!candidates.is_empty(), "need at least one candidate");
    assert!((1..=MAX_SURVIVORS).contains(&n_survivors));
    let p = scheme.phase_modulus();
    let mut best = [(f64::NEG_INFINITY, Complex64::new(0.0, 0.0), 0usize, 0u32); MAX_SURVIVORS];
    let mut len = 0usize;
    for (i, cand) in candidates.iter().enumerate() {
        let rot = Complex64::from_polar(
            1.0,
            -2.0 * std::f64::consts::PI * cand.prev_phase as f64 / p as f64,
        );
        let metric = cand.prev_metric + rot * cand.correlation;
        let phase =
            (cand.prev_phase + scheme.phase_step_units(h_index, cand.completing_symbol)) % p;
        insert_ranked(
            &mut best,
            &mut len,
            n_survivors,
            (metric.norm_sqr(), metric, phase, i as u32),
        );
    }
    best[..len]
        .iter()
        .map(|&(_, metric, phase, idx)| Survivor {
            metric,
            phase,
            candidate_index: idx as usize,
        })
        .collect()
}

/// Structural view of the branches entering the reduced trellis states: the
/// predecessors of any state differ exactly in the symbol they drop, so the
/// sign pattern of those dropped symbols decides how far apart competing
/// phase trajectories stay.
#[derive(Clone, Copy, Debug)]
pub struct MergingDiagnosis {
    /// Every pair of branches entering a common state drops symbols of
    /// opposite sign (binary alphabets).
    pub opposite_sign_only: bool,
    /// Number of entering-branch pairs (per state) dropping symbols of the
    /// same sign.
    pub same_sign_pairs_per_state: usize,
}

/// Enumerates the reduced trellis transitions and classifies the dropped
/// symbols of branches that enter a common state.
pub fn merging_diagnosis(scheme: &Scheme) -> MergingDiagnosis {
    let m = scheme.order();
    let l = scheme.pulse_len();
    let n_states = m.pow(l as u32);
    let mut opposite_only = true;
    let mut same_sign = 0usize;
    for dest in 0..n_states {
        // predecessors (x, dest div M) for every alphabet rank x
        let dropped: Vec<i8> = (0..m).map(|x| scheme.alphabet()[x]).collect();
        let mut per_state = 0usize;
        for i in 0..m {
            for j in i + 1..m {
                if i32::from(dropped[i]) * i32::from(dropped[j]) > 0 {
                    per_state += 1;
                    opposite_only = false;
                }
            }
        }
        if dest == 0 {
            same_sign = per_state;
        }
        debug_assert_eq!(per_state, same_sign);
    }
    MergingDiagnosis {
        opposite_sign_only: opposite_only,
        same_sign_pairs_per_state: same_sign,
    }
}

/// Noncoherent survived-phase Viterbi detector for one scheme at a fixed
/// oversampling factor.
#[derive(Clone, Debug)]
pub struct NoncoherentMlsd {
    scheme: Scheme,
    k: usize,
    n_survivors: usize,
    banks: Vec<FilterBank>,
    /// `exp(-j 2 pi u / p)`.
    phasor_conj: Vec<Complex64>,
    /// Reference samples of the pilot prefix (initial phase index 0).
    pilot_ref: Vec<Complex64>,
    /// [h-cycle position of the step][rank of the completing symbol].
    step_units: Vec<Vec<usize>>,
}

impl NoncoherentMlsd {
    pub fn new(scheme: Scheme, k: usize, n_survivors: usize) -> Result<Self> {
        if !(1..=MAX_SURVIVORS).contains(&n_survivors) {
            return Err(CpmError::param(
                "n_survivors",
                format!("must be in 1..={MAX_SURVIVORS}"),
            ));
        }
        let modulator = Modulator::new(scheme.clone(), k)?;
        let banks = build_banks(&scheme, modulator.pulse())?;
        let (pilot_frame, _) = modulator.modulate(&super::pilot_prefix(&scheme), 0)?;
        let p = scheme.phase_modulus();
        let phasor_conj = (0..p)
            .map(|u| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * u as f64 / p as f64))
            .collect();
        let cycle = scheme.h_cycle().len();
        let back = scheme.pulse_len() - 1;
        let step_units = (0..cycle)
            .map(|par| {
                let h_idx = (par + cycle - back % cycle) % cycle;
                scheme
                    .alphabet()
                    .iter()
                    .map(|&a| scheme.phase_step_units(h_idx, a))
                    .collect()
            })
            .collect();
        Ok(NoncoherentMlsd {
            scheme,
            k,
            n_survivors,
            banks,
            phasor_conj,
            pilot_ref: pilot_frame.samples,
            step_units,
        })
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn n_survivors(&self) -> usize {
        self.n_survivors
    }

    /// Trellis size `M^L`.
    pub fn n_states(&self) -> usize {
        self.scheme.order().pow(self.scheme.pulse_len() as u32)
    }

    /// Branch metrics evaluated per received symbol, `M^(L+1)`.
    pub fn branches_per_step(&self) -> usize {
        self.n_states() * self.scheme.order()
    }

    /// Decodes a pilot-prefixed frame. The decision depends only on
    /// correlation magnitudes, so any global phase rotation of `frame`
    /// yields the identical symbol sequence.
    pub fn detect(&self, frame: &IqFrame) -> Result<Decision> {
        let scheme = &self.scheme;
        let m = scheme.order();
        let p = scheme.phase_modulus();
        let np = self.n_survivors;
        let n_states = self.n_states();
        let start = scheme.pilot_len();
        if frame.k != self.k {
            return Err(CpmError::Mismatch(format!(
                "frame sampled at k = {}, detector built for k = {}",
                frame.k, self.k
            )));
        }
        if frame.n_symbols < 2 * start {
            return Err(CpmError::Mismatch(format!(
                "frame holds {} symbols but the pilot convention needs {}",
                frame.n_symbols,
                2 * start
            )));
        }
        let n_sym = frame.n_symbols;
        let n_steps = n_sym - start;

        // Path metrics start from the correlation of the known pilot
        // prefix, so every survivor's metric stays exactly the full-frame
        // correlation of its traced sequence.
        let mut pilot_corr = Complex64::new(0.0, 0.0);
        for (r, s) in frame.samples[..start * self.k].iter().zip(&self.pilot_ref) {
            pilot_corr += r * s.conj();
        }

        let slots = n_states * np;
        let mut metric = vec![Complex64::new(0.0, 0.0); slots];
        let mut phase = vec![0u16; slots];
        let mut count = vec![0u8; n_states];
        let mut next_metric = vec![Complex64::new(0.0, 0.0); slots];
        let mut next_phase = vec![0u16; slots];
        let mut next_count = vec![0u8; n_states];
        let mut back_pointers = vec![u32::MAX; n_steps * slots];
        let mut z: Vec<Complex64> = Vec::new();

        let r1 = scheme.symbol_rank(1).expect("+1 in every alphabet");

        for n in start..n_sym {
            let parity = n % self.banks.len();
            correlate_into(frame, n, &self.banks[parity], &mut z)?;
            let steps = &self.step_units[parity];
            let bp = &mut back_pointers[(n - start) * slots..(n + 1 - start) * slots];
            next_count.iter_mut().for_each(|c| *c = 0);

            // tail steps are terminated: the new symbol must be the pilot
            let pinned = n >= n_sym - start;
            if n == start {
                // Single virtual predecessor: phase index 0, metric = pilot
                // correlation, destination states (+1, +1, c).
                for c in 0..m {
                    if pinned && c != r1 {
                        continue;
                    }
                    let dest = (r1 * m + r1) * m + c;
                    next_metric[dest * np] = pilot_corr + z[dest];
                    next_phase[dest * np] = steps[r1] as u16;
                    next_count[dest] = 1;
                    bp[dest * np] = u32::MAX;
                }
            } else {
                for dest in 0..n_states {
                    if pinned && dest % m != r1 {
                        next_count[dest] = 0;
                        continue;
                    }
                    let oldest = dest / (m * m);
                    let step = steps[oldest];
                    let zc = z[dest];
                    let mut best = [(f64::NEG_INFINITY, Complex64::new(0.0, 0.0), 0usize, 0u32);
                        MAX_SURVIVORS];
                    let mut len = 0usize;
                    for x in 0..m {
                        let src = x * m * m + dest / m;
                        for srv in 0..count[src] as usize {
                            let slot = src * np + srv;
                            let prev_phase = phase[slot] as usize;
                            let cand = metric[slot] + self.phasor_conj[prev_phase] * zc;
                            insert_ranked(
                                &mut best,
                                &mut len,
                                np,
                                (cand.norm_sqr(), cand, (prev_phase + step) % p, slot as u32),
                            );
                        }
                    }
                    for (srv, &(_, cand, ph, src_slot)) in best[..len].iter().enumerate() {
                        next_metric[dest * np + srv] = cand;
                        next_phase[dest * np + srv] = ph as u16;
                        bp[dest * np + srv] = src_slot;
                    }
                    next_count[dest] = len as u8;
                }
            }
            std::mem::swap(&mut metric, &mut next_metric);
            std::mem::swap(&mut phase, &mut next_phase);
            std::mem::swap(&mut count, &mut next_count);
        }

        let mut best_slot = 0usize;
        let mut best_key = f64::NEG_INFINITY;
        for state in 0..n_states {
            for srv in 0..count[state] as usize {
                let slot = state * np + srv;
                let key = metric[slot].norm_sqr();
                if key > best_key {
                    best_key = key;
                    best_slot = slot;
                }
            }
        }

        let mut symbols = vec![0i8; n_steps];
        let mut cur = best_slot;
        for step in (0..n_steps).rev() {
            symbols[step] = scheme.alphabet()[(cur / np) % m];
            let prev = back_pointers[step * slots + cur];
            if prev != u32::MAX {
                cur = prev as usize;
            }
        }
        // tail pilots terminate the frame; only data symbols are reported
        symbols.truncate(n_steps - start);
        Ok(Decision {
            symbols,
            final_metric: metric[best_slot].norm(),
        })
    }
}

/// Single-call form of [`NoncoherentMlsd`].
pub fn nc_mlsd_proposed(frame: &IqFrame, scheme: &Scheme, n_survivors: usize) -> Result<Decision> {
    NoncoherentMlsd::new(scheme.clone(), frame.k, n_survivors)?.detect(frame)
}
