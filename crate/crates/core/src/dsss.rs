//! Spreading codes, chip-level spreading and per-finger RAKE despreading.
//!
//! Normalisation: each chip is transmitted with amplitude `1/sqrt(N)` and the
//! despreader divides its correlation sum by `sqrt(N)`. With chip noise
//! `CN(0, sigma2)` the finger output is then `h_l x_k + z` with
//! `z ~ CN(0, sigma2)`, i.e. exactly the post-correlation symbol model used by
//! the rest of the crate. Inter-finger interference is not modelled.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use crate::channel::complex_gaussian;
use crate::rng::SimRng;
use crate::{Bpsk, Error, Result};

/// A short ±1 spreading sequence applied to every symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpreadingCode {
    chips: Vec<i8>,
}

impl SpreadingCode {
    pub fn from_chips(chips: Vec<i8>) -> Result<Self> {
        if chips.is_empty() {
            return Err(Error::param("spreading code needs at least one chip"));
        }
        if chips.iter().any(|&c| c != 1 && c != -1) {
            return Err(Error::param("spreading chips must be +1 or -1"));
        }
        Ok(Self { chips })
    }

    /// Keyed pseudo-random code: the same `(key, n)` always gives the same
    /// chips.
    pub fn generate(key: u64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("spreading factor must be at least 1"));
        }
        let mut rng = SimRng::seed_from_u64(key);
        let chips = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        Ok(Self { chips })
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    pub fn chips(&self) -> &[i8] {
        &self.chips
    }
}

/// Output of one RAKE finger for one symbol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TapObservation {
    pub symbol: usize,
    pub tap: usize,
    pub value: Complex64,
}

/// Multiplies every symbol by the code: `chip[kN + i] = x_k c_i`.
pub fn spread(symbols: &[Bpsk], code: &SpreadingCode) -> Result<Vec<f64>> {
    if symbols.is_empty() {
        return Err(Error::param("nothing to spread"));
    }
    Ok(symbols
        .iter()
        .flat_map(|x| code.chips.iter().map(move |&c| x.value() * f64::from(c)))
        .collect())
}

/// Correlates each finger's chip stream with the code, one symbol at a time.
/// `streams[l]` is the chip stream seen by finger `l`.
pub fn rake_despread(streams: &[Vec<Complex64>], code: &SpreadingCode) -> Result<Vec<TapObservation>> {
    let n = code.len();
    let Some(first) = streams.first() else {
        return Err(Error::structural("no finger streams to despread"));
    };
    let len = first.len();
    if len % n != 0 {
        return Err(Error::structural(format!(
            "stream length {len} is not a multiple of the spreading factor {n}"
        )));
    }
    if streams.iter().any(|s| s.len() != len) {
        return Err(Error::structural("finger streams differ in length"));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let num_symbols = len / n;
    let mut out = Vec::with_capacity(num_symbols * streams.len());
    for k in 0..num_symbols {
        for (l, stream) in streams.iter().enumerate() {
            let acc: Complex64 = stream[k * n..(k + 1) * n]
                .iter()
                .zip(&code.chips)
                .map(|(s, &c)| s * f64::from(c))
                .sum();
            out.push(TapObservation {
                symbol: k,
                tap: l,
                value: acc * scale,
            });
        }
    }
    Ok(out)
}

/// Chip-level transmission through independent fingers. `gains[l][k]` is the
/// effective complex amplitude of symbol `k` on finger `l` (channel gain,
/// symbol value and any attacker manipulation folded in). Each chip carries
/// `gain * c_i / sqrt(N)` plus `CN(0, sigma2)` noise; `sigma2 == 0` is
/// noiseless.
pub fn chip_level_streams<R: Rng + ?Sized>(
    gains: &[Vec<Complex64>],
    code: &SpreadingCode,
    sigma2: f64,
    rng: &mut R,
) -> Result<Vec<Vec<Complex64>>> {
    if !(sigma2 >= 0.0) {
        return Err(Error::param("chip noise variance must be non-negative"));
    }
    let n = code.len();
    let amp = 1.0 / (n as f64).sqrt();
    Ok(gains
        .iter()
        .map(|tap| {
            let mut stream = Vec::with_capacity(tap.len() * n);
            for g in tap {
                for &c in &code.chips {
                    let mut chip = g * (amp * f64::from(c));
                    if sigma2 > 0.0 {
                        chip += complex_gaussian(sigma2, rng);
                    }
                    stream.push(chip);
                }
            }
            stream
        })
        .collect())
}

/// Arranges despread observations as `[tap][symbol]`.
pub fn observations_by_tap(obs: &[TapObservation], num_taps: usize) -> Vec<Vec<Complex64>> {
    let mut out = vec![Vec::new(); num_taps];
    for o in obs {
        out[o.tap].push(o.value);
    }
    out
}
