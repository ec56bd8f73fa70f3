//! One frame through transmitter, channel, attacker and receiver, plus the
//! mapping of a coded block onto frames.

use num_complex::Complex64;
use rand::Rng;

use super::config::{ExperimentConfig, ObservationMode};
use crate::attacker::{apply_attack, plan_flips, sample_estimate_error, AttackerConfig};
use crate::channel::{complex_gaussian, sample_realization, PowerDelayProfile};
use crate::dsss::{chip_level_streams, observations_by_tap, rake_despread, SpreadingCode};
use crate::receiver::{
    place_pilots, process_frame, Frame, FrameOutput, PolarityReference, ReceiverConfig, ReceiverStrategy,
};
use crate::rng::{SeedMap, Stream};
use crate::{Bpsk, Error, Result};

/// Everything needed to simulate frames for one experiment.
#[derive(Clone, Debug)]
pub struct Link {
    pub pdp: PowerDelayProfile,
    pub attacker: AttackerConfig,
    pub strategy: ReceiverStrategy,
    pub reference: PolarityReference,
    pub combine_taps: Vec<usize>,
    pub frame_len: usize,
    pub num_pilots: usize,
    pub mode: ObservationMode,
    pub code: SpreadingCode,
    pub seeds: SeedMap,
}

/// Result of one simulated frame.
#[derive(Clone, Debug)]
pub struct FrameOutcome {
    pub frame: Frame,
    pub output: FrameOutput,
    /// Symbols flipped by the attacker, summed over taps.
    pub flips: usize,
}

impl Link {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            pdp: cfg.pdp.clone(),
            attacker: cfg.attacker.clone(),
            strategy: cfg.strategy,
            reference: cfg.reference,
            combine_taps: cfg.scenario.combined.iter().copied().collect(),
            frame_len: cfg.frame_len,
            num_pilots: cfg.num_pilots,
            mode: cfg.mode,
            code: SpreadingCode::generate(cfg.seeds.base(Stream::Code), cfg.spreading_factor)?,
            seeds: cfg.seeds.clone(),
        })
    }

    pub fn data_per_frame(&self) -> usize {
        self.frame_len - self.num_pilots
    }

    pub fn receiver(&self, sigma2: f64) -> Result<ReceiverConfig> {
        Ok(ReceiverConfig::new(self.strategy, self.combine_taps.clone(), sigma2)?.with_reference(self.reference))
    }

    /// Simulates one frame carrying `data`. `path` addresses the frame (for
    /// example SNR index, block index, frame index) and fixes every random
    /// draw; the last element doubles as the frame index.
    pub fn run_frame(&self, rx: &ReceiverConfig, data: &[Bpsk], path: &[u64]) -> Result<FrameOutcome> {
        let index = *path
            .last()
            .ok_or_else(|| Error::param("frame path must not be empty"))?;
        let pilots = place_pilots(
            self.seeds.seed(Stream::Pilot, path),
            index,
            self.frame_len,
            self.num_pilots,
        )?;
        let frame = Frame::new(index, self.frame_len, &pilots, data)?;
        let h = sample_realization(&self.pdp, index, &mut self.seeds.rng(Stream::Channel, path));

        let mut attack_rng = self.seeds.rng(Stream::Attacker, path);
        let mask = plan_flips(&frame, h.num_taps(), &self.attacker, &mut attack_rng)?;
        let err = sample_estimate_error(&h, &self.attacker, &mut attack_rng);
        let gains = apply_attack(frame.symbols(), &h, &mask, &err)?;
        let flips = (0..h.num_taps()).map(|l| mask.flips_on_tap(l)).sum();

        let mut noise = self.seeds.rng(Stream::Noise, path);
        let obs: Vec<Vec<Complex64>> = match self.mode {
            ObservationMode::Symbol => gains
                .into_iter()
                .map(|tap| {
                    tap.into_iter()
                        .map(|g| g + complex_gaussian(rx.sigma2, &mut noise))
                        .collect()
                })
                .collect(),
            ObservationMode::Chip => {
                let streams = chip_level_streams(&gains, &self.code, rx.sigma2, &mut noise)?;
                observations_by_tap(&rake_despread(&streams, &self.code)?, h.num_taps())
            }
        };
        let output = process_frame(rx, &frame, &obs, &h)?;
        Ok(FrameOutcome { frame, output, flips })
    }
}

/// Frames needed to carry `coded_len` bits at `data_per_frame` per frame.
pub fn frames_per_block(coded_len: usize, data_per_frame: usize) -> usize {
    coded_len.div_ceil(data_per_frame)
}

/// Splits coded bits into per-frame BPSK payloads in order. The last frame is
/// filled up with random bits drawn from `pad`.
pub fn map_to_frames<R: Rng + ?Sized>(coded: &[u8], data_per_frame: usize, pad: &mut R) -> Vec<Vec<Bpsk>> {
    coded
        .chunks(data_per_frame)
        .map(|chunk| {
            let mut symbols: Vec<Bpsk> = chunk.iter().map(|&b| Bpsk::from_bit(b)).collect();
            while symbols.len() < data_per_frame {
                symbols.push(Bpsk::from_bit(pad.random_range(0..2)));
            }
            symbols
        })
        .collect()
}

/// Concatenates per-frame data LLRs and drops the padding.
pub fn collect_llrs(per_frame: &[Vec<f64>], coded_len: usize) -> Result<Vec<f64>> {
    let llrs: Vec<f64> = per_frame.iter().flatten().copied().take(coded_len).collect();
    if llrs.len() != coded_len {
        return Err(Error::structural(format!(
            "frames carry {} LLRs, block needs {coded_len}",
            llrs.len()
        )));
    }
    Ok(llrs)
}
