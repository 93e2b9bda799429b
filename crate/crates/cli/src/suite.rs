//! Detector-versus-oracle equivalence runs.

use cpm_core::channel::{
    apply_channel, frame_rng, ChannelConfig, NoiseSpec, PhaseMode, StreamLane,
};
use cpm_core::detectors::{
    oracle_coherent, oracle_noncoherent, with_pilots, CoherentMlsd, NoncoherentMlsd,
    ORACLE_MAX_SYMBOLS,
};
use cpm_core::{Modulator, Scheme};
use rand::prelude::*;
use rayon::prelude::*;
use serde::Serialize;

/// Agreement counts of the equivalence suite.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OracleReport {
    pub trials: u64,
    /// Coherent VA decisions equal to the exhaustive coherent search.
    pub coherent_agreements: u64,
    /// Survived-phase VA decisions equal to the exhaustive noncoherent
    /// search.
    pub noncoherent_agreements: u64,
    /// Trials where the VA terminal metric exceeded the exhaustive maximum
    /// (must stay zero: the VA searches a subset of the oracle's space).
    pub dominance_violations: u64,
}

impl OracleReport {
    /// Coherent equivalence is exact; noncoherent agreement may lose a few
    /// trials to survivor pruning.
    pub fn passed(&self) -> bool {
        self.trials == 0
            || (self.coherent_agreements == self.trials
                && self.dominance_violations == 0
                && self.noncoherent_agreements as f64 >= 0.95 * self.trials as f64)
    }
}

/// Runs `trials` random noisy frames of random length up to `max_len` data
/// symbols through both detector/oracle pairs.
pub fn run_oracle_suite(
    scheme: &Scheme,
    trials: u64,
    max_len: usize,
    ebn0_db: f64,
    seed: u64,
) -> anyhow::Result<OracleReport> {
    anyhow::ensure!(
        max_len + 2 * scheme.pilot_len() <= ORACLE_MAX_SYMBOLS,
        "max_len {max_len} exceeds the exhaustive-search budget"
    );
    let modulator = Modulator::new(scheme.clone(), 4)?;
    let coherent = CoherentMlsd::new(scheme.clone(), 4)?;
    let proposed = NoncoherentMlsd::new(scheme.clone(), 4, 1)?;

    let outcomes: Vec<anyhow::Result<(bool, bool, bool)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = frame_rng(seed, trial, StreamLane::Data);
            let n_data = rng.random_range(2..=max_len.max(2));
            let data: Vec<i8> = (0..n_data)
                .map(|_| *scheme.alphabet().choose(&mut rng).unwrap())
                .collect();
            let (clean, _) = modulator.modulate(&with_pilots(scheme, &data), 0)?;

            let (frame_known, _) = apply_channel(
                &clean,
                &ChannelConfig {
                    noise: NoiseSpec::EbN0Db(ebn0_db),
                    phase: PhaseMode::KnownZero,
                    seed,
                    frame_index: trial,
                },
                scheme,
            );
            let va = coherent.detect(&frame_known, 0.0)?;
            let brute = oracle_coherent(&frame_known, &modulator, 0.0)?;
            let coherent_ok = va.symbols == brute.symbols;

            let (frame_rot, _) = apply_channel(
                &clean,
                &ChannelConfig {
                    noise: NoiseSpec::EbN0Db(ebn0_db),
                    phase: PhaseMode::UniformRandom,
                    seed,
                    frame_index: trial,
                },
                scheme,
            );
            let va = proposed.detect(&frame_rot)?;
            let brute = oracle_noncoherent(&frame_rot, &modulator)?;
            let dominated = va.final_metric <= brute.final_metric * (1.0 + 1e-12) + 1e-9;
            let agree = va.symbols == brute.symbols;
            Ok((coherent_ok, agree, dominated))
        })
        .collect();

    let mut report = OracleReport {
        trials,
        coherent_agreements: 0,
        noncoherent_agreements: 0,
        dominance_violations: 0,
    };
    for outcome in outcomes {
        let (coherent_ok, agree, dominated) = outcome?;
        report.coherent_agreements += u64::from(coherent_ok);
        report.noncoherent_agreements += u64::from(agree);
        report.dominance_violations += u64::from(!dominated);
    }
    Ok(report)
}
