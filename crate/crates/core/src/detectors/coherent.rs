//! Coherent maximum-likelihood sequence detection.
//!
//! The Viterbi state pairs the cumulative phase of completed symbols with
//! the `L - 1` most recent symbols, giving `p * M^(L-1)` states and
//! `p * M^L` branch metrics per received symbol. The branch metric is the
//! real part of the matched-filter output rotated by the state's cumulative
//! phase and by the receiver's carrier-phase estimate; path metrics add as
//! real numbers and the decision is a full-frame traceback from the best
//! terminal state.

use num_complex::Complex64;

use crate::frontend::{build_banks, correlate_into, FilterBank};
use crate::waveforms::{IqFrame, PulseTable, Scheme};
use crate::{CpmError, Result};

use super::Decision;

/// Coherent Viterbi MLSD for one scheme at a fixed oversampling factor.
#[derive(Clone, Debug)]
pub struct CoherentMlsd {
    scheme: Scheme,
    k: usize,
    banks: Vec<FilterBank>,
    /// `exp(-j 2 pi u / p)` for u in `[0, p)`.
    phasor_conj: Vec<Complex64>,
    /// Per h-cycle position of the current step: phase-index increment of
    /// the symbol whose pulse completes during the step, by symbol rank.
    step_units: Vec<Vec<usize>>,
}

impl CoherentMlsd {
    pub fn new(scheme: Scheme, k: usize) -> Result<Self> {
        let pulse = PulseTable::for_scheme(&scheme, k)?;
        let banks = build_banks(&scheme, &pulse)?;
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
        Ok(CoherentMlsd {
            scheme,
            k,
            banks,
            phasor_conj,
            step_units,
        })
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    /// Trellis size `p * M^(L-1)`.
    pub fn n_states(&self) -> usize {
        let m = self.scheme.order();
        self.scheme.phase_modulus() * m.pow(self.scheme.pulse_len() as u32 - 1)
    }

    /// Branch metrics evaluated per received symbol, `p * M^L`.
    pub fn branches_per_step(&self) -> usize {
        self.n_states() * self.scheme.order()
    }

    /// Decodes a pilot-prefixed frame. `assumed_phase` is the receiver's
    /// carrier-phase estimate in radians; pass 0 when the channel phase is
    /// known to be zero.
    pub fn detect(&self, frame: &IqFrame, assumed_phase: f64) -> Result<Decision> {
        let scheme = &self.scheme;
        let m = scheme.order();
        let p = scheme.phase_modulus();
        let pair_states = m * m;
        let n_states = p * pair_states;
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

        let r1 = scheme.symbol_rank(1).expect("+1 in every alphabet");
        let mut metrics = vec![f64::NEG_INFINITY; n_states];
        let mut next = vec![f64::NEG_INFINITY; n_states];
        metrics[r1 * m + r1] = 0.0;

        let rot = Complex64::from_polar(1.0, -assumed_phase);
        let mut back_pointers = vec![0u32; n_steps * n_states];
        let mut z: Vec<Complex64> = Vec::new();
        let mut rotated: Vec<Complex64> = Vec::new();

        for n in start..n_sym {
            let parity = n % self.banks.len();
            correlate_into(frame, n, &self.banks[parity], &mut z)?;
            rotated.clear();
            rotated.extend(z.iter().map(|v| rot * v));
            let steps = &self.step_units[parity];
            let bp = &mut back_pointers[(n - start) * n_states..(n + 1 - start) * n_states];
            // tail steps are terminated: the new symbol must be the pilot
            let pinned = n >= n_sym - start;

            for (dest, slot) in next.iter_mut().enumerate() {
                let phase_dest = dest / pair_states;
                let pair = dest % pair_states;
                let b = pair / m;
                let c = pair % m;
                if pinned && c != r1 {
                    *slot = f64::NEG_INFINITY;
                    bp[dest] = 0;
                    continue;
                }
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0u32;
                for a in 0..m {
                    let phase_src = (phase_dest + p - steps[a]) % p;
                    let src = phase_src * pair_states + a * m + b;
                    let metric = metrics[src];
                    if metric == f64::NEG_INFINITY {
                        continue;
                    }
                    let combo = (a * m + b) * m + c;
                    let cand = metric + (self.phasor_conj[phase_src] * rotated[combo]).re;
                    if cand > best {
                        best = cand;
                        arg = src as u32;
                    }
                }
                *slot = best;
                bp[dest] = arg;
            }
            std::mem::swap(&mut metrics, &mut next);
        }

        let mut best_state = 0usize;
        let mut best_metric = f64::NEG_INFINITY;
        for (s, &metric) in metrics.iter().enumerate() {
            if metric > best_metric {
                best_metric = metric;
                best_state = s;
            }
        }

        let mut symbols = vec![0i8; n_steps];
        let mut cur = best_state;
        for step in (0..n_steps).rev() {
            symbols[step] = scheme.alphabet()[cur % m];
            cur = back_pointers[step * n_states + cur] as usize;
        }
        // tail pilots terminate the frame; only data symbols are reported
        symbols.truncate(n_steps - start);
        Ok(Decision {
            symbols,
            final_metric: best_metric,
        })
    }
}

/// Single-call form of [`CoherentMlsd`]: builds the detector and decodes one
/// frame.
pub fn mlsd_coherent(frame: &IqFrame, scheme: &Scheme, assumed_phase: f64) -> Result<Decision> {
    CoherentMlsd::new(scheme.clone(), frame.k)?.detect(frame, assumed_phase)
}
