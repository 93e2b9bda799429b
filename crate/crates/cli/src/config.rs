//! Experiment configuration: a TOML file plus command-line overrides.

use std::fmt;
use std::path::PathBuf;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use cpm_core::{Scheme, SchemeKind};

/// Which detector a sweep exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectorChoice {
    /// Coherent MLSD with the channel phase known to be zero.
    MlsdCoherent,
    /// Coherent MLSD fed frames with a per-frame random phase it does not
    /// know about (assumed phase stays zero).
    MlsdPhaseDeviation,
    /// Noncoherent survived-phase detector with `survivors` per state.
    Proposed { survivors: usize },
    /// Noncoherent multi-symbol detection baseline.
    Msd { window: usize },
}

impl DetectorChoice {
    pub fn label(self) -> String {
        match self {
            DetectorChoice::MlsdCoherent => "mlsd-coherent".into(),
            DetectorChoice::MlsdPhaseDeviation => "mlsd-phase-deviation".into(),
            DetectorChoice::Proposed { survivors } => format!("proposed-{survivors}"),
            DetectorChoice::Msd { window } => format!("msd-{window}"),
        }
    }
}

impl fmt::Display for DetectorChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// On-disk and command-line experiment description. Field semantics match
/// the CLI flags of `cpmsim sweep`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// "pcmfm" or "artm-cpm".
    pub scheme: String,
    /// "mlsd-coherent", "mlsd-phase-deviation", "proposed" or "msd".
    pub detector: String,
    /// Survivors per state for the proposed detector.
    pub survivors: usize,
    /// Window length for the MSD baseline.
    pub window: usize,
    /// Eb/N0 grid in dB. Ignored when `noiseless` is set.
    pub ebn0_grid: Vec<f64>,
    /// Run without noise (smoke tests); records one point at infinite Eb/N0.
    pub noiseless: bool,
    /// Frame budget per grid point.
    pub n_frames: u64,
    /// Data symbols per frame (pilots come on top).
    pub frame_len: usize,
    /// Samples per symbol.
    pub oversample: usize,
    pub master_seed: u64,
    /// Early-stop target: a point finishes once it has seen this many bit
    /// errors. `None` disables early stopping (paper-scale runs).
    pub min_errors: Option<u64>,
    /// Where the BER records CSV goes; stdout when absent.
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        // Paper-shaped defaults: 6..10 dB, 10^4 frames of 10^3 symbols,
        // desk-scale early stop at 200 errors per point.
        ExperimentConfig {
            scheme: "pcmfm".into(),
            detector: "proposed".into(),
            survivors: 1,
            window: 5,
            ebn0_grid: vec![6.0, 7.0, 8.0, 9.0, 10.0],
            noiseless: false,
            n_frames: 10_000,
            frame_len: 1_000,
            oversample: 4,
            master_seed: 1,
            min_errors: Some(200),
            output_path: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).context("failed to parse experiment config")?;
        Ok(config)
    }

    pub fn scheme(&self) -> anyhow::Result<Scheme> {
        match self.scheme.as_str() {
            "pcmfm" | "pcm-fm" | "pcm/fm" => Ok(Scheme::pcmfm()),
            "artm-cpm" | "artm" | "artm_cpm" => Ok(Scheme::artm_cpm()),
            other => bail!("unknown scheme `{other}` (expected `pcmfm` or `artm-cpm`)"),
        }
    }

    pub fn detector(&self) -> anyhow::Result<DetectorChoice> {
        match self.detector.as_str() {
            "mlsd-coherent" => Ok(DetectorChoice::MlsdCoherent),
            "mlsd-phase-deviation" => Ok(DetectorChoice::MlsdPhaseDeviation),
            "proposed" => Ok(DetectorChoice::Proposed {
                survivors: self.survivors,
            }),
            "msd" => Ok(DetectorChoice::Msd {
                window: self.window,
            }),
            other => bail!(
                "unknown detector `{other}` (expected `mlsd-coherent`, \
                 `mlsd-phase-deviation`, `proposed` or `msd`)"
            ),
        }
    }

    /// Checks every field and reports all violations at once.
    pub fn validate(&self) -> anyhow::Result<()> {
        let mut problems = Vec::new();
        let scheme = match self.scheme() {
            Ok(s) => Some(s),
            Err(e) => {
                problems.push(format!("scheme: {e}"));
                None
            }
        };
        match self.detector() {
            Ok(DetectorChoice::Proposed { survivors }) if !(1..=4).contains(&survivors) => {
                problems.push("survivors: must be in 1..=4".into());
            }
            Ok(DetectorChoice::Msd { window }) => {
                if window % 2 == 0 {
                    problems.push("window: must be odd".into());
                }
                if let Some(s) = &scheme {
                    if s.kind() != SchemeKind::PcmFm {
                        problems.push("detector: msd supports pcmfm only".into());
                    }
                }
            }
            Ok(_) => {}
            Err(e) => problems.push(format!("detector: {e}")),
        }
        if self.ebn0_grid.is_empty() && !self.noiseless {
            problems.push("ebn0_grid: must not be empty".into());
        }
        if let Some(s) = &scheme {
            if self.frame_len < s.pulse_len() + 1 {
                problems.push(format!(
                    "frame_len: must be >= L + 1 = {}",
                    s.pulse_len() + 1
                ));
            }
        }
        if self.n_frames == 0 {
            problems.push("n_frames: must be >= 1".into());
        }
        if self.oversample < 2 {
            problems.push("oversample: must be >= 2".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            bail!("invalid config:\n  {}", problems.join("\n  "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_the_reference_setup() {
        let config = ExperimentConfig::default();
        assert_eq!(config.ebn0_grid, vec![6.0, 7.0, 8.0, 9.0, 10.0]);
        assert_eq!(config.n_frames, 10_000);
        assert_eq!(config.frame_len, 1_000);
        assert_eq!(config.oversample, 4);
        assert_eq!(config.min_errors, Some(200));
        config.validate().unwrap();
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            scheme = "artm-cpm"
            detector = "proposed"
            survivors = 2
            ebn0_grid = [8.0, 9.0]
            n_frames = 10
            frame_len = 100
            master_seed = 7
        "#;
        let config = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(
            config.detector().unwrap(),
            DetectorChoice::Proposed { survivors: 2 }
        );
        assert_eq!(config.scheme().unwrap().name(), "ARTM CPM");
        assert_eq!(config.n_frames, 10);
        config.validate().unwrap();
    }

    #[test]
    fn validation_reports_every_problem() {
        let config = ExperimentConfig {
            scheme: "qam".into(),
            detector: "nope".into(),
            ebn0_grid: vec![],
            n_frames: 0,
            frame_len: 2,
            oversample: 1,
            ..Default::default()
        };
        let err = config.validate().unwrap_err().to_string();
        for needle in [
            "scheme:",
            "detector:",
            "ebn0_grid:",
            "n_frames:",
            "oversample:",
        ] {
            assert!(err.contains(needle), "missing `{needle}` in: {err}");
        }
    }

    #[test]
    fn msd_on_artm_is_rejected() {
        let config = ExperimentConfig {
            scheme: "artm-cpm".into(),
            detector: "msd".into(),
            ..Default::default()
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_toml("frames = 10").is_err());
    }
}
