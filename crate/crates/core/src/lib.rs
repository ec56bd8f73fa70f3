//! Link-level Monte Carlo simulator for the symbol-flipping attack on
//! direct-sequence spread spectrum links.
//!
//! An in-path adversary re-transmits a sign-inverted copy of the BPSK symbols
//! arriving on the delayed multipath taps of a RAKE receiver. The crate models
//! the channel, spreading and despreading, the attacker, a rate-1/2 turbo
//! codec, and the receiver-side defenses (pilot-polarity detection, tap
//! dropping and smart combining), plus the statistics and sweep harness used
//! to measure them.
//!
//! Conventions used throughout:
//!
//! - Baseband samples are [`Complex64`](num_complex::Complex64).
//! - Bit `0` maps to the symbol `+1`, bit `1` to `-1`.
//! - LLRs are `ln P(bit = 0) / P(bit = 1)`, so a positive LLR favours `+1`.
//! - Tap `0` is the main (first-arriving) tap and can never be attacked.

// Parameter checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attacker;
pub mod channel;
pub mod dsss;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod receiver;
pub mod rng;
pub mod turbo;

pub use error::{Error, Result};

use std::ops::Neg;

/// A BPSK symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bpsk {
    Plus,
    Minus,
}

impl Bpsk {
    /// Maps bit `0` to `+1` and any other value to `-1`.
    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Bpsk::Plus
        } else {
            Bpsk::Minus
        }
    }

    pub fn to_bit(self) -> u8 {
        match self {
            Bpsk::Plus => 0,
            Bpsk::Minus => 1,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Bpsk::Plus => 1.0,
            Bpsk::Minus => -1.0,
        }
    }

    /// Parses `+1` / `-1`.
    pub fn from_value(v: f64) -> Result<Self> {
        if v == 1.0 {
            Ok(Bpsk::Plus)
        } else if v == -1.0 {
            Ok(Bpsk::Minus)
        } else {
            Err(Error::Parameter(format!("BPSK symbol must be +1 or -1, got {v}")))
        }
    }
}

impl Neg for Bpsk {
    type Output = Bpsk;

    fn neg(self) -> Bpsk {
        match self {
            Bpsk::Plus => Bpsk::Minus,
            Bpsk::Minus => Bpsk::Plus,
        }
    }
}
