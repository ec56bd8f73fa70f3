//! The in-path attacker.
//!
//! The attacker sits between transmitter and receiver and, for each symbol on
//! each tap it targets, independently decides with probability `p` to
//! overwrite the arriving copy with its negation. It subtracts `2 ĥ x` from the
//! air using its own estimate `ĥ = h + ε` of the tap gain, so the receiver sees
//! `(-h - 2ε) x` on a flipped symbol. With a perfect estimate this is exactly
//! `-h x`.
//!
//! The attacker-to-receiver channel is assumed perfectly equalised, so the
//! manipulation is modelled as exact substitution of the tap signal.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{complex_gaussian, ChannelRealization};
use crate::receiver::Frame;
use crate::{Bpsk, Error, Result};

/// Which taps the attacker targets and how well it knows the channel.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackerConfig {
    attacked_taps: BTreeSet<usize>,
    flip_prob: f64,
    estimate_error_fraction: f64,
    pilot_aware: bool,
}

impl AttackerConfig {
    pub const DEFAULT_FLIP_PROB: f64 = 0.5;

    pub fn new(
        attacked_taps: impl IntoIterator<Item = usize>,
        flip_prob: f64,
        estimate_error_fraction: f64,
        pilot_aware: bool,
    ) -> Result<Self> {
        let attacked_taps: BTreeSet<usize> = attacked_taps.into_iter().collect();
        if attacked_taps.contains(&0) {
            return Err(Error::param("the main tap (tap 0) cannot be attacked"));
        }
        if !(0.0..=1.0).contains(&flip_prob) {
            return Err(Error::param(format!(
                "flip probability must be in [0, 1], got {flip_prob}"
            )));
        }
        if !(estimate_error_fraction >= 0.0) || !estimate_error_fraction.is_finite() {
            return Err(Error::param(format!(
                "estimate error fraction must be non-negative, got {estimate_error_fraction}"
            )));
        }
        Ok(Self {
            attacked_taps,
            flip_prob,
            estimate_error_fraction,
            pilot_aware,
        })
    }

    /// No taps attacked.
    pub fn none() -> Self {
        Self {
            attacked_taps: BTreeSet::new(),
            flip_prob: Self::DEFAULT_FLIP_PROB,
            estimate_error_fraction: 0.0,
            pilot_aware: false,
        }
    }

    pub fn attacked_taps(&self) -> &BTreeSet<usize> {
        &self.attacked_taps
    }

    pub fn is_attacked(&self, tap: usize) -> bool {
        self.attacked_taps.contains(&tap)
    }

    pub fn flip_prob(&self) -> f64 {
        self.flip_prob
    }

    pub fn estimate_error_fraction(&self) -> f64 {
        self.estimate_error_fraction
    }

    pub fn pilot_aware(&self) -> bool {
        self.pilot_aware
    }

    pub fn is_active(&self) -> bool {
        !self.attacked_taps.is_empty()
    }
}

/// Per-(symbol, tap) polarity `b_{k,l}` chosen by the attacker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlipMask {
    num_symbols: usize,
    num_taps: usize,
    flipped: Vec<bool>,
}

impl FlipMask {
    pub fn identity(num_symbols: usize, num_taps: usize) -> Self {
        Self {
            num_symbols,
            num_taps,
            flipped: vec![false; num_symbols * num_taps],
        }
    }

    pub fn is_flipped(&self, symbol: usize, tap: usize) -> bool {
        self.flipped[tap * self.num_symbols + symbol]
    }

    /// `-1` if flipped, `+1` otherwise.
    pub fn polarity(&self, symbol: usize, tap: usize) -> i8 {
        if self.is_flipped(symbol, tap) {
            -1
        } else {
            1
        }
    }

    pub fn num_symbols(&self) -> usize {
        self.num_symbols
    }

    pub fn num_taps(&self) -> usize {
        self.num_taps
    }

    /// Number of flipped symbols on `tap`.
    pub fn flips_on_tap(&self, tap: usize) -> usize {
        self.flipped[tap * self.num_symbols..(tap + 1) * self.num_symbols]
            .iter()
            .filter(|&&f| f)
            .count()
    }
}

/// Tosses an independent `p`-coin for every eligible (symbol, attacked tap).
/// Pilot positions are skipped when the attacker knows them.
pub fn plan_flips<R: Rng + ?Sized>(
    frame: &Frame,
    num_taps: usize,
    cfg: &AttackerConfig,
    rng: &mut R,
) -> Result<FlipMask> {
    if let Some(&max) = cfg.attacked_taps.iter().next_back() {
        if max >= num_taps {
            return Err(Error::param(format!(
                "attacked tap {max} does not exist in a {num_taps}-tap channel"
            )));
        }
    }
    let mut mask = FlipMask::identity(frame.len(), num_taps);
    for &tap in &cfg.attacked_taps {
        for k in 0..frame.len() {
            if cfg.pilot_aware && frame.is_pilot(k) {
                continue;
            }
            mask.flipped[tap * frame.len() + k] = rng.random_bool(cfg.flip_prob);
        }
    }
    Ok(mask)
}

/// The attacker's channel estimation error `ε_l` for each tap in one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateError {
    pub errors: Vec<Complex64>,
}

impl EstimateError {
    pub fn zero(num_taps: usize) -> Self {
        Self {
            errors: vec![Complex64::new(0.0, 0.0); num_taps],
        }
    }
}

/// Draws `ε_l ~ CN(0, frac² |h_l|²)` for every attacked tap; other taps get
/// zero. A zero fraction returns exact zeros without consuming randomness.
pub fn sample_estimate_error<R: Rng + ?Sized>(
    h: &ChannelRealization,
    cfg: &AttackerConfig,
    rng: &mut R,
) -> EstimateError {
    let frac = cfg.estimate_error_fraction;
    let mut err = EstimateError::zero(h.num_taps());
    if frac == 0.0 {
        return err;
    }
    for &tap in &cfg.attacked_taps {
        if let Some(gain) = h.taps.get(tap) {
            err.errors[tap] = complex_gaussian(frac * frac * gain.norm_sqr(), rng);
        }
    }
    err
}

/// Received (pre-noise) amplitude of one symbol on one tap.
#[inline]
pub fn attacked_amplitude(h: Complex64, x: Bpsk, flipped: bool, eps: Complex64) -> Complex64 {
    if flipped {
        (-h - 2.0 * eps) * x.value()
    } else {
        h * x.value()
    }
}

/// Pre-noise tap signals `[tap][symbol]` after the attack.
pub fn apply_attack(
    symbols: &[Bpsk],
    h: &ChannelRealization,
    mask: &FlipMask,
    err: &EstimateError,
) -> Result<Vec<Vec<Complex64>>> {
    if mask.num_symbols != symbols.len() || mask.num_taps != h.num_taps() {
        return Err(Error::structural(format!(
            "flip mask is {}x{} but frame is {} symbols over {} taps",
            mask.num_symbols,
            mask.num_taps,
            symbols.len(),
            h.num_taps()
        )));
    }
    if err.errors.len() != h.num_taps() {
        return Err(Error::structural("estimate error has the wrong number of taps"));
    }
    Ok(h.taps
        .iter()
        .enumerate()
        .map(|(l, &gain)| {
            symbols
                .iter()
                .enumerate()
                .map(|(k, &x)| attacked_amplitude(gain, x, mask.is_flipped(k, l), err.errors[l]))
                .collect()
        })
        .collect())
}
