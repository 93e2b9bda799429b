//! Matched-filter bank and per-symbol correlations.
//!
//! The receiver correlates each symbol interval against `M^L` unit-magnitude
//! local waveforms, one per combination of the `L` symbols whose pulses are
//! still running. Trellis detectors rotate these raw correlations by the
//! cumulative phase of completed symbols; the bank itself applies no
//! rotation and no normalization.
//!
//! For multi-h schemes the local waveforms depend on the symbol index's
//! position in the modulation-index cycle, so one bank per cycle position is
//! precomputed instead of rebuilding filters every symbol.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::waveforms::{IqFrame, PulseTable, Scheme};
use crate::{CpmError, Result};

/// A bank of `M^L` local waveforms of one symbol interval for one h-cycle
/// position. Entry `c` is indexed mixed-radix over the symbol ranks, oldest
/// symbol in the highest digit:
/// `c = (rank(a[n-2]) * M + rank(a[n-1])) * M + rank(a[n])`.
#[derive(Clone, Debug)]
pub struct FilterBank {
    parity: usize,
    k: usize,
    order: usize,
    pulse_len: usize,
    locals: Vec<Complex64>,
}

/// Raw complex correlations of one symbol interval against a full bank.
#[derive(Clone, Debug)]
pub struct CorrelationRow {
    pub symbol_index: usize,
    pub values: Vec<Complex64>,
}

/// Builds the bank for symbol indices congruent to `parity` modulo the
/// h-cycle length.
pub fn build_filter_bank(scheme: &Scheme, pulse: &PulseTable, parity: usize) -> Result<FilterBank> {
    let cycle = scheme.h_cycle().len();
    if parity >= cycle {
        return Err(CpmError::param(
            "parity",
            format!("must be < h-cycle length {cycle}"),
        ));
    }
    let m = scheme.order();
    let l = scheme.pulse_len();
    let k = pulse.k();
    let n_locals = m.pow(l as u32);
    let mut locals = Vec::with_capacity(n_locals * k);
    for combo in 0..n_locals {
        // digit(0) is the current symbol a[n], digit(L-1) the oldest a[n-L+1].
        let mut digits = [0usize; 8];
        let mut rest = combo;
        for d in digits.iter_mut().take(l) {
            *d = rest % m;
            rest /= m;
        }
        for j in 0..k {
            let mut frac = 0.0;
            for (offset, &rank) in digits.iter().enumerate().take(l) {
                let h_idx = (parity + cycle - offset % cycle) % cycle;
                let h = scheme.h_cycle()[h_idx].value();
                let a = f64::from(scheme.alphabet()[rank]);
                frac += h * a * pulse.q()[offset * k + j];
            }
            locals.push(Complex64::from_polar(1.0, 2.0 * PI * frac));
        }
    }
    Ok(FilterBank {
        parity,
        k,
        order: m,
        pulse_len: l,
        locals,
    })
}

/// One bank per h-cycle position (a single bank for single-h schemes).
pub fn build_banks(scheme: &Scheme, pulse: &PulseTable) -> Result<Vec<FilterBank>> {
    (0..scheme.h_cycle().len())
        .map(|parity| build_filter_bank(scheme, pulse, parity))
        .collect()
}

impl FilterBank {
    pub fn parity(&self) -> usize {
        self.parity
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of locals, `M^L`.
    pub fn len(&self) -> usize {
        self.locals.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.locals.is_empty()
    }

    /// Samples of one local waveform.
    pub fn local(&self, combo: usize) -> &[Complex64] {
        &self.locals[combo * self.k..(combo + 1) * self.k]
    }

    /// Mixed-radix combo index from symbol ranks, oldest first.
    pub fn combo_index(&self, ranks: &[usize]) -> usize {
        debug_assert_eq!(ranks.len(), self.pulse_len);
        ranks.iter().fold(0, |acc, &r| acc * self.order + r)
    }
}

/// Correlates one symbol interval of `frame` against every bank entry:
/// `z_c = sum_j r[n*k + j] * conj(local_c[j])`, a plain sample sum.
pub fn correlate_symbol(
    frame: &IqFrame,
    symbol_index: usize,
    bank: &FilterBank,
) -> Result<CorrelationRow> {
    let mut values = Vec::new();
    correlate_into(frame, symbol_index, bank, &mut values)?;
    Ok(CorrelationRow {
        symbol_index,
        values,
    })
}

/// Buffer-reusing form of [`correlate_symbol`] for detector inner loops.
pub fn correlate_into(
    frame: &IqFrame,
    symbol_index: usize,
    bank: &FilterBank,
    out: &mut Vec<Complex64>,
) -> Result<()> {
    if symbol_index >= frame.n_symbols {
        return Err(CpmError::IndexOutOfRange {
            index: symbol_index,
            n_symbols: frame.n_symbols,
        });
    }
    if frame.k != bank.k {
        return Err(CpmError::Mismatch(format!(
            "frame has {} samples per symbol, bank has {}",
            frame.k, bank.k
        )));
    }
    let k = bank.k;
    let received = frame.symbol(symbol_index);
    out.clear();
    out.reserve(bank.len());
    for combo in 0..bank.len() {
        let local = &bank.locals[combo * k..(combo + 1) * k];
        let mut acc = Complex64::new(0.0, 0.0);
        for (r, l) in received.iter().zip(local) {
            acc += r * l.conj();
        }
        out.push(acc);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveforms::{boundary_phases, Modulator};
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bank_sizes_match_the_schemes() {
        let pcmfm = Scheme::pcmfm();
        let pulse = PulseTable::for_scheme(&pcmfm, 4).unwrap();
        let banks = build_banks(&pcmfm, &pulse).unwrap();
        assert_eq!(banks.len(), 1);
        assert_eq!(banks[0].len(), 8);

        let artm = Scheme::artm_cpm();
        let pulse = PulseTable::for_scheme(&artm, 4).unwrap();
        let banks = build_banks(&artm, &pulse).unwrap();
        assert_eq!(banks.len(), 2);
        assert!(banks.iter().all(|b| b.len() == 64));

        assert!(build_filter_bank(&artm, &pulse, 2).is_err());
    }

    #[test]
    fn locals_have_unit_magnitude() {
        for scheme in [Scheme::pcmfm(), Scheme::artm_cpm()] {
            let pulse = PulseTable::for_scheme(&scheme, 4).unwrap();
            for bank in build_banks(&scheme, &pulse).unwrap() {
                for combo in 0..bank.len() {
                    for s in bank.local(combo) {
                        assert!((s.norm() - 1.0).abs() < 1e-9);
                    }
                }
            }
        }
    }

    /// With the true cumulative phase compensated, the correlation of the
    /// transmitted combination is exactly the number of summed unit samples.
    #[test]
    fn self_correlation_equals_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for scheme in [Scheme::pcmfm(), Scheme::artm_cpm()] {
            let k = 4;
            let modulator = Modulator::new(scheme.clone(), k).unwrap();
            let banks = build_banks(&scheme, modulator.pulse()).unwrap();
            let p = scheme.phase_modulus() as f64;
            for _ in 0..20 {
                let symbols: Vec<i8> = (0..12)
                    .map(|_| *scheme.alphabet().choose(&mut rng).unwrap())
                    .collect();
                let (frame, _) = modulator.modulate(&symbols, 0).unwrap();
                let phases = boundary_phases(&scheme, &symbols);
                for n in 2..symbols.len() {
                    let bank = &banks[n % banks.len()];
                    let row = correlate_symbol(&frame, n, bank).unwrap();
                    let ranks: Vec<usize> = symbols[n - 2..=n]
                        .iter()
                        .map(|&s| scheme.symbol_rank(s).unwrap())
                        .collect();
                    let combo = bank.combo_index(&ranks);
                    let theta = if n >= 3 { phases[n - 3] } else { 0 };
                    let rot =
                        Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * theta as f64 / p);
                    let compensated = rot * row.values[combo];
                    assert!((compensated.re - k as f64).abs() < 1e-6);
                    assert!(compensated.im.abs() < 1e-6);
                }
            }
        }
    }

    /// On noiseless PCM/FM data the true combination is the unique maximum
    /// of the correlation magnitudes, and every magnitude is bounded by k.
    #[test]
    fn true_entry_uniquely_attains_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let scheme = Scheme::pcmfm();
        let k = 4;
        let modulator = Modulator::new(scheme.clone(), k).unwrap();
        let banks = build_banks(&scheme, modulator.pulse()).unwrap();
        for _ in 0..100 {
            let symbols: Vec<i8> = (0..8)
                .map(|_| *scheme.alphabet().choose(&mut rng).unwrap())
                .collect();
            let (frame, _) = modulator.modulate(&symbols, 0).unwrap();
            for n in 2..symbols.len() {
                let bank = &banks[0];
                let row = correlate_symbol(&frame, n, bank).unwrap();
                let ranks: Vec<usize> = symbols[n - 2..=n]
                    .iter()
                    .map(|&s| scheme.symbol_rank(s).unwrap())
                    .collect();
                let truth = bank.combo_index(&ranks);
                for (combo, z) in row.values.iter().enumerate() {
                    assert!(z.norm() <= k as f64 + 1e-9);
                    if combo == truth {
                        assert!((z.norm() - k as f64).abs() < 1e-9);
                    } else {
                        assert!(z.norm() < k as f64 - 1e-6, "combo {combo}: {}", z.norm());
                    }
                }
            }
        }
    }

    #[test]
    fn correlation_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let scheme = Scheme::pcmfm();
        let pulse = PulseTable::for_scheme(&scheme, 4).unwrap();
        let bank = build_filter_bank(&scheme, &pulse, 0).unwrap();
        let random_frame = |rng: &mut ChaCha8Rng| {
            let samples = (0..12)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            IqFrame::new(samples, 4, 3)
        };
        let f1 = random_frame(&mut rng);
        let f2 = random_frame(&mut rng);
        let a = Complex64::new(0.7, -1.3);
        let mixed = IqFrame::new(
            f1.samples
                .iter()
                .zip(&f2.samples)
                .map(|(x, y)| a * x + y)
                .collect(),
            4,
            3,
        );
        let z1 = correlate_symbol(&f1, 2, &bank).unwrap();
        let z2 = correlate_symbol(&f2, 2, &bank).unwrap();
        let zm = correlate_symbol(&mixed, 2, &bank).unwrap();
        for ((x, y), m) in z1.values.iter().zip(&z2.values).zip(&zm.values) {
            assert!((a * x + y - m).norm() < 1e-9);
        }
    }

    #[test]
    fn out_of_range_index_is_an_error() {
        let scheme = Scheme::pcmfm();
        let modulator = Modulator::new(scheme.clone(), 4).unwrap();
        let pulse = PulseTable::for_scheme(&scheme, 4).unwrap();
        let bank = build_filter_bank(&scheme, &pulse, 0).unwrap();
        let (frame, _) = modulator.modulate(&[1, 1, 1], 0).unwrap();
        assert!(matches!(
            correlate_symbol(&frame, 3, &bank),
            Err(CpmError::IndexOutOfRange { .. })
        ));
    }
}
