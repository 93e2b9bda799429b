//! Classic exhaustive-window noncoherent multi-symbol detection.
//!
//! The detector slides an odd window over the frame, correlates the received
//! samples against every candidate waveform of the window (phase-continuous
//! inside the window, unknown absolute phase handled by taking the
//! magnitude) and decides the middle symbol of the winner. Window positions
//! overlapping the pilots at either end keep those symbols fixed; positions
//! past the frame end truncate the window.
//!
//! Because the pulses span `L` symbols, the first window intervals carry
//! tails of symbols before the window. Those are filled in by decision
//! feedback: the symbols left of the window are already decided, and the
//! candidate waveforms carry their pulse tails.

use num_complex::Complex64;

use crate::waveforms::{IqFrame, Modulator, Scheme, SchemeKind};
use crate::{CpmError, Result};

use super::Decision;

struct WindowHypothesis {
    middle: i8,
    wave: Vec<Complex64>,
}

/// Sliding-window noncoherent MSD baseline (PCM/FM only).
pub struct MultiSymbolDetector {
    modulator: Modulator,
    window: usize,
    /// Full-width window hypotheses, one set per feedback-history pair
    /// (the `L - 1` decided symbols left of the window).
    interior: Vec<Vec<WindowHypothesis>>,
}

impl MultiSymbolDetector {
    pub fn new(scheme: Scheme, k: usize, window: usize) -> Result<Self> {
        if window % 2 == 0 {
            return Err(CpmError::param("window", "must be odd"));
        }
        if scheme.kind() != SchemeKind::PcmFm {
            return Err(CpmError::UnsupportedCombination(
                "the MSD baseline is defined for PCM/FM only".into(),
            ));
        }
        let m = scheme.order();
        let hypotheses = m.pow(window as u32);
        if hypotheses > 4096 {
            return Err(CpmError::TooLarge {
                what: "window hypotheses M^window",
                requested: hypotheses,
                max: 4096,
            });
        }
        let modulator = Modulator::new(scheme, k)?;
        let scheme = modulator.scheme();
        let tail = scheme.pilot_len();
        let mut interior = Vec::with_capacity(m.pow(tail as u32));
        let mut symbols = vec![0i8; window];
        let mut history = vec![0i8; tail];
        for hist_code in 0..m.pow(tail as u32) {
            decode_symbols(scheme, hist_code, &mut history);
            let mut set = Vec::with_capacity(hypotheses);
            for idx in 0..hypotheses {
                decode_symbols(scheme, idx, &mut symbols);
                let (frame, _) = modulator.modulate_continued(&symbols, 0, &history, tail)?;
                set.push(WindowHypothesis {
                    middle: symbols[window / 2],
                    wave: frame.samples,
                });
            }
            interior.push(set);
        }
        Ok(MultiSymbolDetector {
            modulator,
            window,
            interior,
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn scheme(&self) -> &Scheme {
        self.modulator.scheme()
    }

    /// Decides every data symbol of a pilot-prefixed frame. The metric of a
    /// window is the magnitude of its correlation, so decisions are
    /// invariant to a global phase rotation of the frame.
    pub fn detect(&self, frame: &IqFrame) -> Result<Decision> {
        let scheme = self.modulator.scheme();
        let k = self.modulator.k();
        if frame.k != k {
            return Err(CpmError::Mismatch(format!(
                "frame sampled at k = {}, detector built for k = {}",
                frame.k, k
            )));
        }
        let start = scheme.pilot_len();
        let m = scheme.order();
        let half = self.window / 2;
        let n_sym = frame.n_symbols;
        if n_sym < 2 * start {
            return Err(CpmError::Mismatch(format!(
                "frame holds {n_sym} symbols but the pilot convention needs {}",
                2 * start
            )));
        }
        let data_end = n_sym - start;
        // decisions so far, pilots included, used as pulse-tail feedback
        let mut decided = vec![1i8; start];
        let mut metric_sum = 0.0;
        let mut scratch = vec![0i8; self.window];

        for n in start..data_end {
            let lo = n.saturating_sub(half);
            let hi = (n + half).min(n_sym - 1);
            let received = &frame.samples[lo * k..(hi + 1) * k];
            let interior = n >= half && lo >= start && hi == n + half && hi < data_end;
            let (decision, best) = if interior {
                let hist_code = (0..start).fold(0usize, |acc, i| {
                    acc * m + scheme.symbol_rank(decided[lo - start + i]).unwrap()
                });
                self.decide_interior(received, &self.interior[hist_code])
            } else {
                self.decide_edge(received, lo, hi, n, data_end, &decided, &mut scratch)?
            };
            decided.push(decision);
            metric_sum += best.sqrt();
        }
        Ok(Decision {
            symbols: decided.split_off(start),
            final_metric: metric_sum,
        })
    }

    fn decide_interior(
        &self,
        received: &[Complex64],
        hypotheses: &[WindowHypothesis],
    ) -> (i8, f64) {
        let mut best = f64::NEG_INFINITY;
        let mut decision = 0i8;
        for hyp in hypotheses {
            let key = correlation_power(received, &hyp.wave);
            if key > best {
                best = key;
                decision = hyp.middle;
            }
        }
        (decision, best)
    }

    /// Window overlapping the pilots at either end: those positions stay
    /// fixed at +1 and positions past the frame end drop out, so only the
    /// remaining data positions are enumerated.
    #[allow(clippy::too_many_arguments)]
    fn decide_edge(
        &self,
        received: &[Complex64],
        lo: usize,
        hi: usize,
        n: usize,
        data_end: usize,
        decided: &[i8],
        scratch: &mut [i8],
    ) -> Result<(i8, f64)> {
        let scheme = self.modulator.scheme();
        let m = scheme.order();
        let span = hi - lo + 1;
        let first_free = lo.max(scheme.pilot_len());
        let last_free = hi.min(data_end - 1);
        let free = last_free + 1 - first_free;
        let window = &mut scratch[..span];
        for (i, slot) in window.iter_mut().enumerate() {
            let pos = lo + i;
            if pos < first_free || pos > last_free {
                *slot = 1;
            }
        }
        let history = &decided[lo.saturating_sub(scheme.pilot_len())..lo];
        let mut best = f64::NEG_INFINITY;
        let mut decision = 0i8;
        for idx in 0..m.pow(free as u32) {
            let mut rest = idx;
            for pos in (first_free - lo..=last_free - lo).rev() {
                window[pos] = scheme.alphabet()[rest % m];
                rest /= m;
            }
            let (wave, _) =
                self.modulator
                    .modulate_continued(window, 0, history, lo.max(history.len()))?;
            let key = correlation_power(received, &wave.samples);
            if key > best {
                best = key;
                decision = window[n - lo];
            }
        }
        Ok((decision, best))
    }
}

fn correlation_power(received: &[Complex64], wave: &[Complex64]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (r, s) in received.iter().zip(wave) {
        acc += r * s.conj();
    }
    acc.norm_sqr()
}

fn decode_symbols(scheme: &Scheme, mut idx: usize, out: &mut [i8]) {
    let m = scheme.order();
    for slot in out.iter_mut().rev() {
        *slot = scheme.alphabet()[idx % m];
        idx /= m;
    }
}

/// Single-call form of [`MultiSymbolDetector`].
pub fn msd_noncoherent(frame: &IqFrame, scheme: &Scheme, window: usize) -> Result<Decision> {
    MultiSymbolDetector::new(scheme.clone(), frame.k, window)?.detect(frame)
}
