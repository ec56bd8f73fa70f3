//! Channel models: flat fading, quasi-static multi-tap fading, AWGN, and the
//! timing condition under which an in-path attacker can overwrite a symbol.
//!
//! Signal power is normalised to one (unit total tap power), so the SNR of a
//! sweep point is `1 / sigma2`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Bpsk, Error, Result};

/// Tolerance on the unit-power normalisation of a power-delay profile.
const PDP_POWER_TOLERANCE: f64 = 1e-9;

/// Converts an SNR in dB to the complex noise variance for unit signal power.
pub fn snr_db_to_sigma2(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

pub fn sigma2_to_snr_db(sigma2: f64) -> f64 {
    -10.0 * sigma2.log10()
}

/// Average power and delay of each resolvable multipath tap.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerDelayProfile {
    tap_powers: Vec<f64>,
    tap_delays: Vec<usize>,
}

impl PowerDelayProfile {
    /// Builds a profile, checking that delays start at zero and strictly
    /// increase and that the powers are non-negative and sum to one.
    pub fn new(tap_powers: Vec<f64>, tap_delays: Vec<usize>) -> Result<Self> {
        if tap_powers.is_empty() {
            return Err(Error::param("power-delay profile needs at least one tap"));
        }
        if tap_powers.len() != tap_delays.len() {
            return Err(Error::structural(format!(
                "{} tap powers but {} tap delays",
                tap_powers.len(),
                tap_delays.len()
            )));
        }
        if tap_delays[0] != 0 {
            return Err(Error::param("first tap delay must be 0"));
        }
        if tap_delays.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("tap delays must be strictly increasing"));
        }
        if tap_powers.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::param("tap powers must be finite and non-negative"));
        }
        let total: f64 = tap_powers.iter().sum();
        if (total - 1.0).abs() > PDP_POWER_TOLERANCE {
            return Err(Error::param(format!("tap powers must sum to 1, got {total}")));
        }
        Ok(Self { tap_powers, tap_delays })
    }

    /// Profile with taps at consecutive symbol delays `0, 1, 2, ...`.
    pub fn with_consecutive_delays(tap_powers: Vec<f64>) -> Result<Self> {
        let delays = (0..tap_powers.len()).collect();
        Self::new(tap_powers, delays)
    }

    /// Two equal-power taps.
    pub fn two_tap() -> Self {
        Self::with_consecutive_delays(vec![0.5, 0.5]).expect("valid preset")
    }

    /// Four taps with linearly decaying power.
    pub fn four_tap() -> Self {
        Self::with_consecutive_delays(vec![0.4, 0.3, 0.2, 0.1]).expect("valid preset")
    }

    pub fn num_taps(&self) -> usize {
        self.tap_powers.len()
    }

    pub fn tap_powers(&self) -> &[f64] {
        &self.tap_powers
    }

    pub fn tap_delays(&self) -> &[usize] {
        &self.tap_delays
    }
}

/// Complex tap gains for one frame. The gains are held fixed for every symbol
/// of the frame and drawn afresh for the next one.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub taps: Vec<Complex64>,
    pub frame_index: u64,
}

impl ChannelRealization {
    /// A realization with explicitly chosen gains (used for fixed-channel
    /// experiments and tests).
    pub fn fixed(taps: Vec<Complex64>, frame_index: u64) -> Self {
        Self { taps, frame_index }
    }

    pub fn num_taps(&self) -> usize {
        self.taps.len()
    }
}

/// Circularly-symmetric complex Gaussian with total variance `variance`.
/// A zero variance yields exactly zero.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Draws one Rayleigh realization: tap `l` is `CN(0, tap_powers[l])`.
pub fn sample_realization<R: Rng + ?Sized>(
    pdp: &PowerDelayProfile,
    frame_index: u64,
    rng: &mut R,
) -> ChannelRealization {
    let taps = pdp.tap_powers.iter().map(|&p| complex_gaussian(p, rng)).collect();
    ChannelRealization { taps, frame_index }
}

/// One `CN(0, sigma2)` noise sample.
pub fn awgn<R: Rng + ?Sized>(sigma2: f64, rng: &mut R) -> Result<Complex64> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::param(format!("noise variance must be positive, got {sigma2}")));
    }
    Ok(complex_gaussian(sigma2, rng))
}

/// Narrowband flat-fading observation `±sqrt(P) h x + n`. The sign is negative
/// when the attacker has flipped the symbol. `sigma2 == 0` gives a noiseless
/// observation without consuming randomness.
pub fn narrowband_observe<R: Rng + ?Sized>(
    x: Bpsk,
    h: Complex64,
    power: f64,
    sigma2: f64,
    flipped: bool,
    rng: &mut R,
) -> Result<Complex64> {
    if !(power >= 0.0) {
        return Err(Error::param(format!("power must be non-negative, got {power}")));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::param(format!(
            "noise variance must be non-negative, got {sigma2}"
        )));
    }
    let sign = if flipped { -1.0 } else { 1.0 };
    let signal = h * (sign * power.sqrt() * x.value());
    let noise = if sigma2 > 0.0 {
        complex_gaussian(sigma2, rng)
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok(signal + noise)
}

/// Propagation and processing delays that decide whether a re-transmitted
/// symbol lands inside the same symbol period as the direct path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimingBudget {
    /// Direct-path delay, seconds.
    pub t_main: f64,
    /// Attacker processing delay, seconds.
    pub t_p: f64,
    /// Extra path delay through the attacker, seconds.
    pub t_side: f64,
    /// Symbol period, seconds.
    pub symbol_period: f64,
    /// Fraction of the symbol period the attacker's copy may lag by.
    pub margin: f64,
}

impl TimingBudget {
    pub const DEFAULT_MARGIN: f64 = 0.1;

    pub fn new(t_main: f64, t_p: f64, t_side: f64, symbol_period: f64, margin: f64) -> Result<Self> {
        for (name, v) in [
            ("t_main", t_main),
            ("t_p", t_p),
            ("t_side", t_side),
            ("symbol_period", symbol_period),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(format!("{name} must be positive, got {v}")));
            }
        }
        if !(margin > 0.0 && margin <= 1.0) {
            return Err(Error::param(format!("margin must be in (0, 1], got {margin}")));
        }
        Ok(Self {
            t_main,
            t_p,
            t_side,
            symbol_period,
            margin,
        })
    }
}

/// True when the attacker's copy arrives no earlier than the direct path and
/// no later than `margin` symbol periods after it.
pub fn timing_feasible(budget: &TimingBudget) -> bool {
    let via_attacker = budget.t_p + budget.t_side;
    budget.t_main <= via_attacker && via_attacker <= budget.t_main + budget.margin * budget.symbol_period
}
