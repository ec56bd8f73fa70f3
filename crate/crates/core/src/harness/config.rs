//! Experiment configuration.
//!
//! A config file is flat TOML; every key is optional and falls back to the
//! default listed in [`ConfigFile::default`]. Example:
//!
//! ```toml
//! scenario = "A-2,SC-12"
//! tap_powers = [0.5, 0.5]
//! snr_db = [0.0, 2.0, 4.0, 6.0, 8.0, 10.0]
//! eps_frac = 1.0
//! delta_th = 0.5     # 1.0 by default beyond two taps
//! max_bits = 1000000
//! seed = 7
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scenario::{parse_scenario, CombineMode, Scenario};
use crate::attacker::AttackerConfig;
use crate::channel::PowerDelayProfile;
use crate::receiver::{PolarityReference, ReceiverStrategy};
use crate::rng::{SeedMap, Stream};
use crate::turbo::TurboConfig;
use crate::{Error, Result};

/// Replaces the strategy implied by the scenario id.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyOverride {
    /// `C` combines naively, `SC` combines smartly.
    #[default]
    Scenario,
    CombineAll,
    MainTap,
    DropDetected,
}

/// How finger outputs are produced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservationMode {
    /// Per-finger observations `g x + CN(0, sigma2)` directly.
    #[default]
    Symbol,
    /// Spread to chips, add chip noise, despread.
    Chip,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceChoice {
    #[default]
    Known,
    PilotEstimate,
}

/// On-disk schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: String,
    pub tap_powers: Vec<f64>,
    /// SNR points `1 / sigma2` in dB.
    pub snr_db: Vec<f64>,
    pub min_errors: u64,
    /// Information-bit budget per SNR point.
    pub max_bits: u64,
    pub spreading_factor: usize,
    pub frame_len: usize,
    pub num_pilots: usize,
    /// Smart-combining threshold; 0.5 for up to two taps, 1.0 beyond.
    pub delta_th: Option<f64>,
    pub eps_frac: f64,
    pub flip_prob: f64,
    pub pilot_aware: bool,
    pub strategy: StrategyOverride,
    pub polarity_reference: ReferenceChoice,
    pub mode: ObservationMode,
    pub block_length: usize,
    pub iterations: usize,
    pub seed: u64,
    pub seed_channel: Option<u64>,
    pub seed_noise: Option<u64>,
    pub seed_attacker: Option<u64>,
    pub seed_pilot: Option<u64>,
    pub seed_data: Option<u64>,
    pub seed_interleaver: Option<u64>,
    pub seed_code: Option<u64>,
    /// Pilot counts for the detection sweep.
    pub lp_grid: Vec<usize>,
    /// Per-pilot polarity error probabilities for the detection sweep.
    pub q_grid: Vec<f64>,
    pub detect_trials: u64,
    pub mi_samples: usize,
    pub mi_bins: usize,
    pub mi_flip_probs: Vec<f64>,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            scenario: "A-none,C-12".into(),
            tap_powers: vec![0.5, 0.5],
            snr_db: (0..=14).map(f64::from).collect(),
            min_errors: 100,
            max_bits: 10_000_000,
            spreading_factor: 128,
            frame_len: 100,
            num_pilots: 20,
            delta_th: None,
            eps_frac: 0.0,
            flip_prob: 0.5,
            pilot_aware: false,
            strategy: StrategyOverride::Scenario,
            polarity_reference: ReferenceChoice::Known,
            mode: ObservationMode::Symbol,
            block_length: crate::turbo::DEFAULT_BLOCK_LENGTH,
            iterations: crate::turbo::DEFAULT_ITERATIONS,
            seed: 1,
            seed_channel: None,
            seed_noise: None,
            seed_attacker: None,
            seed_pilot: None,
            seed_data: None,
            seed_interleaver: None,
            seed_code: None,
            lp_grid: (1..=20).collect(),
            q_grid: vec![1e-3, 1e-2, 1e-1],
            detect_trials: 10_000,
            mi_samples: 100_000,
            mi_bins: 16,
            mi_flip_probs: vec![0.0, 0.5],
        }
    }
}

impl ConfigFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// A checked experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub pdp: PowerDelayProfile,
    pub snr_grid_db: Vec<f64>,
    pub min_errors: u64,
    pub max_bits: u64,
    pub attacker: AttackerConfig,
    pub strategy: ReceiverStrategy,
    pub reference: PolarityReference,
    pub turbo: TurboConfig,
    pub seeds: SeedMap,
    pub spreading_factor: usize,
    pub frame_len: usize,
    pub num_pilots: usize,
    pub delta_th: f64,
    pub mode: ObservationMode,
    pub lp_grid: Vec<usize>,
    pub q_grid: Vec<f64>,
    pub detect_trials: u64,
    pub mi_samples: usize,
    pub mi_bins: usize,
    pub mi_flip_probs: Vec<f64>,
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl ExperimentConfig {
    /// Validates a parsed file. Every failure is reported as
    /// [`Error::Config`].
    pub fn from_file(file: &ConfigFile) -> Result<Self> {
        Self::build(file).map_err(config_err)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_file(&ConfigFile::from_toml_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_file(&ConfigFile::load(path)?)
    }

    fn build(f: &ConfigFile) -> Result<Self> {
        let pdp = PowerDelayProfile::with_consecutive_delays(f.tap_powers.clone())?;
        let scenario = parse_scenario(&f.scenario, pdp.num_taps())?;
        if f.snr_db.is_empty() || f.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr_db must be a non-empty list of finite values".into()));
        }
        if f.max_bits == 0 {
            return Err(Error::Config("max_bits must be positive".into()));
        }
        if f.spreading_factor == 0 {
            return Err(Error::Config("spreading_factor must be positive".into()));
        }
        if f.num_pilots == 0 || f.num_pilots >= f.frame_len {
            return Err(Error::Config(format!(
                "need 1 <= num_pilots < frame_len, got {} and {}",
                f.num_pilots, f.frame_len
            )));
        }
        if f.lp_grid.iter().any(|&lp| lp == 0 || lp > f.frame_len) {
            return Err(Error::Config("lp_grid entries must be in 1..=frame_len".into()));
        }
        if f.q_grid.iter().any(|&q| !(q > 0.0 && q < 0.5)) {
            return Err(Error::Config("q_grid entries must be in (0, 0.5)".into()));
        }
        if f.mi_flip_probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config("mi_flip_probs entries must be in [0, 1]".into()));
        }
        let delta_th = f.delta_th.unwrap_or(if pdp.num_taps() <= 2 { 0.5 } else { 1.0 });
        let attacker = AttackerConfig::new(
            scenario.attacked.iter().copied(),
            f.flip_prob,
            f.eps_frac,
            f.pilot_aware,
        )?;
        let strategy = match (f.strategy, scenario.mode) {
            (StrategyOverride::Scenario, CombineMode::Smart) => ReceiverStrategy::smart(delta_th)?,
            (StrategyOverride::Scenario, CombineMode::Naive)
                if scenario.combined.len() == 1 && scenario.combined.contains(&0) =>
            {
                ReceiverStrategy::MainTapOnly
            }
            (StrategyOverride::Scenario, CombineMode::Naive) | (StrategyOverride::CombineAll, _) => {
                ReceiverStrategy::CombineAll
            }
            (StrategyOverride::MainTap, _) => ReceiverStrategy::MainTapOnly,
            (StrategyOverride::DropDetected, _) => ReceiverStrategy::DropDetectedTaps,
        };
        let mut seeds = SeedMap::new(f.seed);
        for (stream, value) in [
            (Stream::Channel, f.seed_channel),
            (Stream::Noise, f.seed_noise),
            (Stream::Attacker, f.seed_attacker),
            (Stream::Pilot, f.seed_pilot),
            (Stream::Data, f.seed_data),
            (Stream::Interleaver, f.seed_interleaver),
            (Stream::Code, f.seed_code),
        ] {
            if let Some(v) = value {
                seeds = seeds.with_override(stream, v);
            }
        }
        let turbo = TurboConfig {
            block_length: f.block_length,
            iterations: f.iterations,
            interleaver_seed: seeds.base(Stream::Interleaver),
            ..TurboConfig::default()
        };
        crate::turbo::TurboCode::new(&turbo)?;
        Ok(Self {
            scenario,
            pdp,
            snr_grid_db: f.snr_db.clone(),
            min_errors: f.min_errors,
            max_bits: f.max_bits,
            attacker,
            strategy,
            reference: match f.polarity_reference {
                ReferenceChoice::Known => PolarityReference::Known,
                ReferenceChoice::PilotEstimate => PolarityReference::PilotEstimate,
            },
            turbo,
            seeds,
            spreading_factor: f.spreading_factor,
            frame_len: f.frame_len,
            num_pilots: f.num_pilots,
            delta_th,
            mode: f.mode,
            lp_grid: f.lp_grid.clone(),
            q_grid: f.q_grid.clone(),
            detect_trials: f.detect_trials,
            mi_samples: f.mi_samples,
            mi_bins: f.mi_bins,
            mi_flip_probs: f.mi_flip_probs.clone(),
        })
    }

    /// Data symbols per frame.
    pub fn data_per_frame(&self) -> usize {
        self.frame_len - self.num_pilots
    }

    pub fn scenario_id(&self) -> String {
        self.scenario.id()
    }
}
