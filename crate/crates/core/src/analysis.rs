//! Complexity accounting, distance spectra and the union bound.
//!
//! The per-symbol operation counts follow
//!
//! ```text
//! N_mul = 4*N_mf*k + 4*N_s*N_p*M + 2*N_s*N_p*M*delta
//! N_add = N_mf*(5k - 2) + 3*N_s*N_p*M + N_s*N_p*M*(1 + 2*delta)
//! ```
//!
//! with `delta = 0` for coherent MLSD and `delta = 1` for the MSD baseline
//! and the survived-phase detector (whose magnitude comparison costs the
//! extra squaring work). The MSD column has no trellis states; its branch
//! work is fixed at `N_s*N_p*M = 128`.
//!
//! Distances use the convention `d^2 = log2(M)/(2k) * sum |s1 - s2|^2`, so
//! one bit of binary antipodal signalling gives `d^2 = 2` and the union
//! bound reads `Pb <= sum_l C_l Q(sqrt(d_l^2 * Eb/N0))`. The multiplicity
//! `C_l` is approximated by the merge-event count, which makes the bound an
//! estimate (labelled as such wherever it is reported).

use std::f64::consts::PI;

use crate::waveforms::{PulseTable, Scheme, SchemeKind};
use crate::{CpmError, Result};

/// Detector families compared throughout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectionMethod {
    /// Block-wise noncoherent multi-symbol detection.
    Msd,
    /// Coherent Viterbi MLSD over the full `p * M^(L-1)` trellis.
    Mlsd,
    /// Noncoherent survived-phase Viterbi over `M^L` states.
    Proposed,
}

impl DetectionMethod {
    pub fn label(self) -> &'static str {
        match self {
            DetectionMethod::Msd => "MSD",
            DetectionMethod::Mlsd => "MLSD",
            DetectionMethod::Proposed => "PROPOSED",
        }
    }
}

/// Per-symbol multiplication and addition counts of one detector setup.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComplexityRecord {
    pub method: DetectionMethod,
    pub scheme: SchemeKind,
    pub k: usize,
    pub n_mf: u64,
    /// Trellis states; the MSD baseline has none.
    pub n_s: Option<u64>,
    pub n_p: u64,
    pub n_mul: u64,
    pub n_add: u64,
    pub delta: u8,
}

/// Fixed branch work `N_s * N_p * M` of the MSD baseline.
const MSD_BRANCH_WORK: u64 = 128;

/// Evaluates the operation-count model for one method/scheme combination.
pub fn complexity(
    method: DetectionMethod,
    scheme: &Scheme,
    k: usize,
    n_p: usize,
) -> Result<ComplexityRecord> {
    let m = scheme.order() as u64;
    let l = scheme.pulse_len() as u32;
    let n_mf = m.pow(l);
    let (n_s, branch_work, delta) = match method {
        DetectionMethod::Msd => {
            if scheme.kind() != SchemeKind::PcmFm {
                return Err(CpmError::UnsupportedCombination(
                    "the MSD baseline is modelled for PCM/FM only".into(),
                ));
            }
            if n_p != 1 {
                return Err(CpmError::UnsupportedCombination(
                    "MSD keeps no survivor lists; n_p must be 1".into(),
                ));
            }
            (None, MSD_BRANCH_WORK, 1u8)
        }
        DetectionMethod::Mlsd => {
            if n_p != 1 {
                return Err(CpmError::UnsupportedCombination(
                    "coherent MLSD keeps a single survivor per state".into(),
                ));
            }
            let n_s = scheme.phase_modulus() as u64 * m.pow(l - 1);
            (Some(n_s), n_s * m, 0u8)
        }
        DetectionMethod::Proposed => {
            if !(1..=4).contains(&n_p) {
                return Err(CpmError::UnsupportedCombination(
                    "the survived-phase detector supports 1..=4 survivors".into(),
                ));
            }
            let n_s = n_mf;
            (Some(n_s), n_s * n_p as u64 * m, 1u8)
        }
    };
    let k64 = k as u64;
    let d = u64::from(delta);
    let n_mul = 4 * n_mf * k64 + 4 * branch_work + 2 * branch_work * d;
    let n_add = n_mf * (5 * k64 - 2) + 3 * branch_work + branch_work * (1 + 2 * d);
    Ok(ComplexityRecord {
        method,
        scheme: scheme.kind(),
        k,
        n_mf,
        n_s,
        n_p: n_p as u64,
        n_mul,
        n_add,
        delta,
    })
}

/// Storage footprint of one detector setup, in units of one sample value.
/// The survivor-path term grows with the traceback length `N` and is kept
/// symbolic as a coefficient of `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StorageRecord {
    pub method: DetectionMethod,
    pub scheme: SchemeKind,
    pub local_signal: u64,
    pub rotation_angle: u64,
    /// Coefficient of `N`; `None` renders as "-" (no trellis history).
    pub survived_path_per_symbol: Option<u64>,
    /// `None` for detectors without survived phases.
    pub survived_phase: Option<u64>,
}

impl StorageRecord {
    /// The survivor-path cell in `80N` style.
    pub fn survived_path_symbolic(&self) -> String {
        match self.survived_path_per_symbol {
            Some(c) => format!("{c}N"),
            None => "-".into(),
        }
    }

    pub fn survived_phase_symbolic(&self) -> String {
        match self.survived_phase {
            Some(v) => v.to_string(),
            None => "-".into(),
        }
    }

    /// Total units for a concrete traceback length.
    pub fn total_units(&self, traceback_n: usize) -> u64 {
        self.local_signal
            + self.rotation_angle
            + self.survived_path_per_symbol.unwrap_or(0) * traceback_n as u64
            + self.survived_phase.unwrap_or(0)
    }
}

/// Storage model: complex local waveforms (`2 * N_mf * k`), complex rotation
/// phasors (`2p`, or the five window phases of the MSD baseline), survivor
/// history per traceback step and survived phases.
pub fn storage(
    method: DetectionMethod,
    scheme: &Scheme,
    k: usize,
    n_p: usize,
) -> Result<StorageRecord> {
    let record = complexity(method, scheme, k, n_p)?;
    let local_signal = 2 * record.n_mf * k as u64;
    let p = scheme.phase_modulus() as u64;
    let (rotation_angle, path, phase) = match method {
        DetectionMethod::Msd => (2 * 5, None, None),
        DetectionMethod::Mlsd => {
            let n_s = record.n_s.unwrap();
            (2 * p, Some(n_s), Some(0))
        }
        DetectionMethod::Proposed => {
            let n_s = record.n_s.unwrap();
            (2 * p, Some(2 * n_s * n_p as u64), Some(n_s))
        }
    };
    Ok(StorageRecord {
        method,
        scheme: scheme.kind(),
        local_signal,
        rotation_angle,
        survived_path_per_symbol: path,
        survived_phase: phase,
    })
}

/// Pairwise distance spectrum of merge events in the coherent trellis.
#[derive(Clone, Debug)]
pub struct DistanceSpectrum {
    /// `(d^2, multiplicity)` sorted ascending in `d^2`, multiplicities
    /// counting unordered sequence pairs.
    pub entries: Vec<(f64, u64)>,
}

impl DistanceSpectrum {
    pub fn min_distance_sq(&self) -> Option<f64> {
        self.entries.first().map(|e| e.0)
    }
}

/// Normalized squared Euclidean distance between the CPM waveforms of two
/// equal-length symbol sequences that share a starting state:
/// `d^2 = log2(M)/(2k) * sum_m |s1[m] - s2[m]|^2` over the sequences' span.
/// Only the difference sequence enters, so a common history cancels.
pub fn pair_distance_sq(scheme: &Scheme, k: usize, a: &[i8], b: &[i8]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(CpmError::param("b", "sequences must have equal length"));
    }
    for &s in a.iter().chain(b) {
        scheme.symbol_rank(s)?;
    }
    let pulse = PulseTable::for_scheme(scheme, k)?;
    Ok(accumulate_distance(scheme, &pulse, a, b, a.len()))
}

fn accumulate_distance(
    scheme: &Scheme,
    pulse: &PulseTable,
    a: &[i8],
    b: &[i8],
    span: usize,
) -> f64 {
    let k = pulse.k();
    let l = scheme.pulse_len();
    let p = scheme.phase_modulus();
    let mut completed = 0usize; // exact phase-index difference mod p
    let mut acc = 0.0;
    for n in 0..span {
        if n >= l {
            let i = n - l;
            let step = scheme.phase_step_units(i, a[i]) + p - scheme.phase_step_units(i, b[i]);
            completed = (completed + step) % p;
        }
        let base = 2.0 * PI * completed as f64 / p as f64;
        let lo = n.saturating_sub(l - 1);
        for j in 0..k {
            let mut frac = 0.0;
            for i in lo..=n {
                let q = pulse.q()[(n - i) * k + j];
                frac += scheme.h(i).value() * f64::from(a[i] - b[i]) * q;
            }
            let delta = base + 2.0 * PI * frac;
            acc += 2.0 - 2.0 * delta.cos();
        }
    }
    scheme.bits_per_symbol() as f64 / (2.0 * k as f64) * acc
}

/// Enumerates unordered pairs of symbol sequences that split from a common
/// state at position 0 and whose coherent trellis states first coincide
/// again after exactly `span <= depth` symbols, accumulating `(d^2,
/// multiplicity)`. The h-cycle is anchored at position 0. Cost grows as
/// `M^(2*depth)`, so oversized requests are refused.
pub fn distance_spectrum(scheme: &Scheme, depth: usize, k: usize) -> Result<DistanceSpectrum> {
    if depth > 8 {
        return Err(CpmError::param("depth", "bounded at 8"));
    }
    let m = scheme.order();
    let pairs = m.pow(depth as u32).saturating_mul(m.pow(depth as u32));
    if pairs > 1 << 28 {
        return Err(CpmError::TooLarge {
            what: "sequence pairs M^(2*depth)",
            requested: pairs,
            max: 1 << 28,
        });
    }
    let pulse = PulseTable::for_scheme(scheme, k)?;
    let l = scheme.pulse_len();
    let p = scheme.phase_modulus();
    let n_seq = m.pow(depth as u32);
    let decode = |mut idx: usize, out: &mut [i8]| {
        for slot in out.iter_mut().rev() {
            *slot = scheme.alphabet()[idx % m];
            idx /= m;
        }
    };

    // States merge after n symbols when the last L-1 symbols agree and the
    // completed phases of everything older coincide.
    let merged_at = |a: &[i8], b: &[i8], n: usize| -> bool {
        if a[n + 1 - l..n] != b[n + 1 - l..n] {
            return false;
        }
        let mut diff = 0usize;
        for i in 0..n + 1 - l {
            diff = (diff + scheme.phase_step_units(i, a[i]) + p - scheme.phase_step_units(i, b[i]))
                % p;
        }
        diff == 0
    };

    let mut raw: Vec<f64> = Vec::new();
    let mut a = vec![0i8; depth];
    let mut b = vec![0i8; depth];
    for ia in 0..n_seq {
        decode(ia, &mut a);
        for ib in ia + 1..n_seq {
            decode(ib, &mut b);
            if a[0] == b[0] {
                continue;
            }
            let mut first_merge = None;
            for n in l..=depth {
                if merged_at(&a, &b, n) {
                    first_merge = Some(n);
                    break;
                }
            }
            // Elementary events close exactly at the end of the span;
            // shorter events are collected by the recursion below, which
            // keeps each one counted exactly once.
            if first_merge != Some(depth) {
                continue;
            }
            raw.push(accumulate_distance(scheme, &pulse, &a, &b, depth));
        }
    }
    // Shorter elementary events are found by recursing on smaller depths;
    // doing it this way keeps each event counted exactly once.
    let mut entries: Vec<(f64, u64)> = Vec::new();
    if depth > l {
        entries = distance_spectrum(scheme, depth - 1, k)?.entries;
    }
    raw.sort_by(f64::total_cmp);
    for d2 in raw {
        match entries
            .iter_mut()
            .find(|(existing, _)| (existing - d2).abs() < 1e-9)
        {
            Some(entry) => entry.1 += 1,
            None => entries.push((d2, 1)),
        }
    }
    entries.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(DistanceSpectrum { entries })
}

/// Gaussian tail probability `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Estimated union bound: sum over the first `terms` spectrum entries of
/// `multiplicity * Q(sqrt(d^2 * Eb/N0))`.
pub fn union_bound(spectrum: &DistanceSpectrum, ebn0_db: f64, terms: usize) -> f64 {
    assert!(terms >= 1);
    let snr = 10f64.powf(ebn0_db / 10.0);
    spectrum
        .entries
        .iter()
        .take(terms)
        .map(|&(d2, mult)| mult as f64 * q_function((d2 * snr).sqrt()))
        .sum()
}

/// BER point estimate with a 95% confidence interval. Uses the normal
/// approximation, the rule of three for zero errors and its mirror for the
/// all-errors boundary.
pub fn ber_confint(errors: u64, bits: u64) -> Result<(f64, f64, f64)> {
    if bits == 0 {
        return Err(CpmError::param("bits", "must be >= 1"));
    }
    if errors > bits {
        return Err(CpmError::param("errors", "cannot exceed bits"));
    }
    let n = bits as f64;
    if errors == 0 {
        return Ok((0.0, 0.0, 3.0 / n));
    }
    if errors == bits {
        return Ok((1.0, 1.0 - 3.0 / n, 1.0));
    }
    let p = errors as f64 / n;
    let half = 1.96 * (p * (1.0 - p) / n).sqrt();
    Ok((p, (p - half).max(0.0), (p + half).min(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complexity_reproduces_every_table_cell() {
        let pcmfm = Scheme::pcmfm();
        let artm = Scheme::artm_cpm();

        let msd = complexity(DetectionMethod::Msd, &pcmfm, 4, 1).unwrap();
        assert_eq!((msd.n_mf, msd.n_s), (8, None));
        assert_eq!((msd.n_mul, msd.n_add), (896, 912));

        let mlsd_p = complexity(DetectionMethod::Mlsd, &pcmfm, 4, 1).unwrap();
        assert_eq!((mlsd_p.n_mf, mlsd_p.n_s), (8, Some(80)));
        assert_eq!((mlsd_p.n_mul, mlsd_p.n_add), (768, 784));
        assert_eq!(mlsd_p.delta, 0);

        let mlsd_a = complexity(DetectionMethod::Mlsd, &artm, 4, 1).unwrap();
        assert_eq!((mlsd_a.n_mf, mlsd_a.n_s), (64, Some(512)));
        assert_eq!((mlsd_a.n_mul, mlsd_a.n_add), (9216, 9344));

        let prop_p = complexity(DetectionMethod::Proposed, &pcmfm, 4, 1).unwrap();
        assert_eq!((prop_p.n_mf, prop_p.n_s), (8, Some(8)));
        assert_eq!((prop_p.n_mul, prop_p.n_add), (224, 240));
        assert_eq!(prop_p.delta, 1);

        let prop_a1 = complexity(DetectionMethod::Proposed, &artm, 4, 1).unwrap();
        assert_eq!((prop_a1.n_mf, prop_a1.n_s), (64, Some(64)));
        assert_eq!((prop_a1.n_mul, prop_a1.n_add), (2560, 2688));

        let prop_a2 = complexity(DetectionMethod::Proposed, &artm, 4, 2).unwrap();
        assert_eq!((prop_a2.n_mul, prop_a2.n_add), (4096, 4224));
    }

    #[test]
    fn unsupported_combinations_are_rejected() {
        let artm = Scheme::artm_cpm();
        let pcmfm = Scheme::pcmfm();
        assert!(complexity(DetectionMethod::Msd, &artm, 4, 1).is_err());
        assert!(complexity(DetectionMethod::Msd, &pcmfm, 4, 2).is_err());
        assert!(complexity(DetectionMethod::Mlsd, &pcmfm, 4, 2).is_err());
        assert!(complexity(DetectionMethod::Proposed, &artm, 4, 5).is_err());
        assert!(complexity(DetectionMethod::Proposed, &artm, 4, 0).is_err());
    }

    #[test]
    fn storage_reproduces_the_table() {
        let pcmfm = Scheme::pcmfm();
        let artm = Scheme::artm_cpm();

        let msd = storage(DetectionMethod::Msd, &pcmfm, 4, 1).unwrap();
        assert_eq!((msd.local_signal, msd.rotation_angle), (64, 10));
        assert_eq!(msd.survived_path_symbolic(), "-");
        assert_eq!(msd.survived_phase_symbolic(), "-");

        let mlsd_p = storage(DetectionMethod::Mlsd, &pcmfm, 4, 1).unwrap();
        assert_eq!((mlsd_p.local_signal, mlsd_p.rotation_angle), (64, 40));
        assert_eq!(mlsd_p.survived_path_symbolic(), "80N");
        assert_eq!(mlsd_p.survived_phase, Some(0));

        let mlsd_a = storage(DetectionMethod::Mlsd, &artm, 4, 1).unwrap();
        assert_eq!((mlsd_a.local_signal, mlsd_a.rotation_angle), (512, 64));
        assert_eq!(mlsd_a.survived_path_symbolic(), "512N");

        let prop_p = storage(DetectionMethod::Proposed, &pcmfm, 4, 1).unwrap();
        assert_eq!((prop_p.local_signal, prop_p.rotation_angle), (64, 40));
        assert_eq!(prop_p.survived_path_symbolic(), "16N");
        assert_eq!(prop_p.survived_phase, Some(8));

        let prop_a1 = storage(DetectionMethod::Proposed, &artm, 4, 1).unwrap();
        assert_eq!(prop_a1.survived_path_symbolic(), "128N");
        assert_eq!(prop_a1.survived_phase, Some(64));

        let prop_a2 = storage(DetectionMethod::Proposed, &artm, 4, 2).unwrap();
        assert_eq!((prop_a2.local_signal, prop_a2.rotation_angle), (512, 64));
        assert_eq!(prop_a2.survived_path_symbolic(), "256N");
        assert_eq!(prop_a2.survived_phase, Some(64));

        assert_eq!(prop_a2.total_units(10), 512 + 64 + 2560 + 64);
    }

    #[test]
    fn identical_sequences_have_zero_distance() {
        let scheme = Scheme::pcmfm();
        let d2 = pair_distance_sq(&scheme, 4, &[1, -1, 1, 1], &[1, -1, 1, 1]).unwrap();
        assert!(d2.abs() < 1e-12);
    }

    /// The difference-phase route must agree with distances measured on
    /// waveforms synthesized independently by the modulator.
    #[test]
    fn pair_distance_matches_direct_waveform_distance() {
        use crate::waveforms::Modulator;
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        for scheme in [Scheme::pcmfm(), Scheme::artm_cpm()] {
            let k = 4;
            let modulator = Modulator::new(scheme.clone(), k).unwrap();
            for _ in 0..20 {
                let n = rng.random_range(3..9);
                let pick = |rng: &mut ChaCha8Rng| -> Vec<i8> {
                    (0..n)
                        .map(|_| *scheme.alphabet().choose(rng).unwrap())
                        .collect()
                };
                let a = pick(&mut rng);
                let b = pick(&mut rng);
                let d2 = pair_distance_sq(&scheme, k, &a, &b).unwrap();
                let swapped = pair_distance_sq(&scheme, k, &b, &a).unwrap();
                assert!((d2 - swapped).abs() < 1e-12);
                let (wa, _) = modulator.modulate(&a, 0).unwrap();
                let (wb, _) = modulator.modulate(&b, 0).unwrap();
                let direct: f64 = wa
                    .samples
                    .iter()
                    .zip(&wb.samples)
                    .map(|(x, y)| (x - y).norm_sqr())
                    .sum();
                let direct = scheme.bits_per_symbol() as f64 / (2.0 * k as f64) * direct;
                assert!(
                    (d2 - direct).abs() < 1e-9,
                    "{}: {d2} vs {direct}",
                    scheme.name()
                );
            }
        }
    }

    #[test]
    fn spectrum_has_no_zero_distance_pairs() {
        let scheme = Scheme::pcmfm();
        let spectrum = distance_spectrum(&scheme, 6, 4).unwrap();
        assert!(!spectrum.entries.is_empty());
        assert!(spectrum.entries.iter().all(|&(d2, _)| d2 > 1e-9));
        let sorted: Vec<f64> = spectrum.entries.iter().map(|e| e.0).collect();
        assert!(sorted.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn oversized_spectrum_requests_are_refused() {
        assert!(distance_spectrum(&Scheme::pcmfm(), 9, 4).is_err());
        assert!(distance_spectrum(&Scheme::artm_cpm(), 8, 4).is_err());
    }

    #[test]
    fn q_function_values() {
        assert!((q_function(2f64.sqrt()) - 0.07865).abs() < 5e-5);
        assert!(q_function(40.0) < 1e-300);
        assert!((q_function(0.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn union_bound_basics() {
        let spectrum = DistanceSpectrum {
            entries: vec![(2.0, 1)],
        };
        assert!((union_bound(&spectrum, 0.0, 1) - 0.0786).abs() < 1e-3);
        assert!(union_bound(&spectrum, 60.0, 1) < 1e-100);
        let mut prev = f64::INFINITY;
        for ebn0 in [0.0, 2.0, 4.0, 6.0, 8.0] {
            let b = union_bound(&spectrum, ebn0, 1);
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn ber_confint_cases() {
        assert_eq!(ber_confint(0, 1_000_000).unwrap(), (0.0, 0.0, 3e-6));
        let (p, lo, hi) = ber_confint(100, 1_000_000).unwrap();
        assert_eq!(p, 1e-4);
        let half = 1.96 * (p * (1.0 - p) / 1e6).sqrt();
        assert!((lo - (p - half)).abs() < 1e-12);
        assert!((hi - (p + half)).abs() < 1e-12);
        let (p, lo, hi) = ber_confint(50, 50).unwrap();
        assert_eq!((p, hi), (1.0, 1.0));
        assert!(lo < 1.0);
        assert!(ber_confint(2, 1).is_err());
        assert!(ber_confint(0, 0).is_err());
    }
}
