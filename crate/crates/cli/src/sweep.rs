//! Monte-Carlo BER sweeps.
//!
//! Frames are independent work items: each one derives its data, phase and
//! noise from `(master_seed, frame_index)` streams, so results are
//! bit-identical no matter how many workers run or in which order frames
//! finish. Frames are processed in fixed-size batches; after every batch the
//! accumulated error count is checked against the early-stop target.

use std::io::Write;
use std::time::Instant;

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;

use cpm_core::analysis::ber_confint;
use cpm_core::channel::{
    apply_channel, frame_rng, ChannelConfig, NoiseSpec, PhaseMode, StreamLane,
};
use cpm_core::detectors::{with_pilots, CoherentMlsd, MultiSymbolDetector, NoncoherentMlsd};
use cpm_core::{IqFrame, Modulator, Scheme};
use rand::prelude::*;

use crate::config::{DetectorChoice, ExperimentConfig};

/// One Monte-Carlo result point. `elapsed_seconds` is informational and is
/// reported in the run summary only; the records CSV stays byte-identical
/// across reruns of the same config and seed.
#[derive(Clone, Debug, Serialize)]
pub struct BerRecord {
    pub scheme: String,
    pub detector: String,
    pub ebn0_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub elapsed_seconds: f64,
    pub seed: u64,
}

/// Frames per early-stop check. Fixed so that results do not depend on the
/// worker count.
const FRAMES_PER_BATCH: u64 = 32;

enum Detector {
    Coherent(CoherentMlsd),
    Proposed(NoncoherentMlsd),
    Msd(MultiSymbolDetector),
}

impl Detector {
    fn decide(&self, frame: &IqFrame) -> anyhow::Result<Vec<i8>> {
        let decision = match self {
            Detector::Coherent(d) => d.detect(frame, 0.0)?,
            Detector::Proposed(d) => d.detect(frame)?,
            Detector::Msd(d) => d.detect(frame)?,
        };
        Ok(decision.symbols)
    }
}

/// Counts bit errors between two symbol sequences under the natural binary
/// mapping of alphabet ranks (1 bit per symbol for M = 2, 2 bits for M = 4).
pub fn bit_errors(scheme: &Scheme, decided: &[i8], sent: &[i8]) -> u64 {
    decided
        .iter()
        .zip(sent)
        .map(|(&a, &b)| {
            let ra = scheme.symbol_rank(a).expect("decided symbol in alphabet");
            let rb = scheme.symbol_rank(b).expect("sent symbol in alphabet");
            u64::from((ra ^ rb).count_ones())
        })
        .sum()
}

fn build_detector(choice: DetectorChoice, scheme: &Scheme, k: usize) -> anyhow::Result<Detector> {
    Ok(match choice {
        DetectorChoice::MlsdCoherent | DetectorChoice::MlsdPhaseDeviation => {
            Detector::Coherent(CoherentMlsd::new(scheme.clone(), k)?)
        }
        DetectorChoice::Proposed { survivors } => {
            Detector::Proposed(NoncoherentMlsd::new(scheme.clone(), k, survivors)?)
        }
        DetectorChoice::Msd { window } => {
            Detector::Msd(MultiSymbolDetector::new(scheme.clone(), k, window)?)
        }
    })
}

fn phase_mode(choice: DetectorChoice) -> PhaseMode {
    match choice {
        // Only the reference detector gets a known zero phase; every other
        // configuration sees a fresh random phase per frame.
        DetectorChoice::MlsdCoherent => PhaseMode::KnownZero,
        _ => PhaseMode::UniformRandom,
    }
}

fn run_frame(
    modulator: &Modulator,
    detector: &Detector,
    scheme: &Scheme,
    frame_len: usize,
    noise: NoiseSpec,
    phase: PhaseMode,
    seed: u64,
    frame_index: u64,
) -> anyhow::Result<(u64, u64)> {
    let mut data_rng = frame_rng(seed, frame_index, StreamLane::Data);
    let data: Vec<i8> = (0..frame_len)
        .map(|_| *scheme.alphabet().choose(&mut data_rng).unwrap())
        .collect();
    let (clean, _) = modulator.modulate(&with_pilots(scheme, &data), 0)?;
    let cfg = ChannelConfig {
        noise,
        phase,
        seed,
        frame_index,
    };
    let (received, _) = apply_channel(&clean, &cfg, scheme);
    let decided = detector.decide(&received)?;
    let errors = bit_errors(scheme, &decided, &data);
    let bits = (frame_len * scheme.bits_per_symbol()) as u64;
    Ok((errors, bits))
}

/// Runs one Eb/N0 point until the frame budget or the early-stop target is
/// reached. Returns `(errors, bits)`.
pub fn run_point(
    config: &ExperimentConfig,
    scheme: &Scheme,
    modulator: &Modulator,
    detector: &Detector,
    noise: NoiseSpec,
    phase: PhaseMode,
) -> anyhow::Result<(u64, u64)> {
    let mut errors = 0u64;
    let mut bits = 0u64;
    let mut next = 0u64;
    while next < config.n_frames {
        let end = (next + FRAMES_PER_BATCH).min(config.n_frames);
        let batch: Vec<anyhow::Result<(u64, u64)>> = (next..end)
            .into_par_iter()
            .map(|frame_index| {
                run_frame(
                    modulator,
                    detector,
                    scheme,
                    config.frame_len,
                    noise,
                    phase,
                    config.master_seed,
                    frame_index,
                )
            })
            .collect();
        for result in batch {
            let (e, b) = result?;
            errors += e;
            bits += b;
        }
        next = end;
        if let Some(target) = config.min_errors {
            if errors >= target {
                break;
            }
        }
    }
    Ok((errors, bits))
}

/// Runs the configured sweep and returns one record per grid point.
pub fn run_sweep(config: &ExperimentConfig) -> anyhow::Result<Vec<BerRecord>> {
    config.validate()?;
    let scheme = config.scheme()?;
    let choice = config.detector()?;
    let modulator = Modulator::new(scheme.clone(), config.oversample)?;
    let detector = build_detector(choice, &scheme, config.oversample)?;
    let phase = phase_mode(choice);

    let points: Vec<(f64, NoiseSpec)> = if config.noiseless {
        vec![(f64::INFINITY, NoiseSpec::Noiseless)]
    } else {
        config
            .ebn0_grid
            .iter()
            .map(|&db| (db, NoiseSpec::EbN0Db(db)))
            .collect()
    };

    let mut records = Vec::with_capacity(points.len());
    for (ebn0_db, noise) in points {
        let started = Instant::now();
        let (errors, bits) = run_point(config, &scheme, &modulator, &detector, noise, phase)?;
        let (ber, ci_low, ci_high) = ber_confint(errors, bits)?;
        records.push(BerRecord {
            scheme: config.scheme.clone(),
            detector: choice.label(),
            ebn0_db,
            bits,
            errors,
            ber,
            ci_low,
            ci_high,
            elapsed_seconds: started.elapsed().as_secs_f64(),
            seed: config.master_seed,
        });
    }
    Ok(records)
}

pub const BER_CSV_HEADER: &str = "scheme,detector,ebn0_db,bits,errors,ber,ci_low,ci_high,seed";

/// Writes records as CSV. Timing is deliberately left out so identical
/// configs and seeds produce identical bytes.
pub fn write_ber_csv<W: Write>(records: &[BerRecord], mut w: W) -> anyhow::Result<()> {
    writeln!(w, "{BER_CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.scheme, r.detector, r.ebn0_db, r.bits, r.errors, r.ber, r.ci_low, r.ci_high, r.seed
        )?;
    }
    Ok(())
}

/// Parses a CSV produced by [`write_ber_csv`].
pub fn parse_ber_csv(text: &str) -> anyhow::Result<Vec<BerRecord>> {
    let mut lines = text.lines();
    let header = lines.next().context("empty BER csv")?;
    anyhow::ensure!(
        header == BER_CSV_HEADER,
        "unexpected BER csv header: {header}"
    );
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        anyhow::ensure!(fields.len() == 9, "line {}: expected 9 fields", i + 2);
        let parse_f = |s: &str| -> anyhow::Result<f64> {
            s.parse().with_context(|| format!("bad float `{s}`"))
        };
        records.push(BerRecord {
            scheme: fields[0].into(),
            detector: fields[1].into(),
            ebn0_db: parse_f(fields[2])?,
            bits: fields[3].parse()?,
            errors: fields[4].parse()?,
            ber: parse_f(fields[5])?,
            ci_low: parse_f(fields[6])?,
            ci_high: parse_f(fields[7])?,
            elapsed_seconds: 0.0,
            seed: fields[8].parse()?,
        });
    }
    Ok(records)
}

/// Run provenance written next to the records CSV.
#[derive(Serialize)]
pub struct RunSummary<'a> {
    pub version: &'static str,
    pub elapsed_seconds: f64,
    pub records: usize,
    pub config: &'a ExperimentConfig,
}

pub fn version_string() -> &'static str {
    concat!("cpmsim ", env!("CARGO_PKG_VERSION"))
}
