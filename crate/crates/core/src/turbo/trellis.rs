//! Recursive systematic convolutional (RSC) constituent code.

use crate::{Error, Result};

/// State machine of an RSC encoder with one feedback and one feedforward
/// polynomial.
///
/// Polynomials are given in the usual octal notation with the most
/// significant bit as the `D^0` coefficient, e.g. feedback `0o7` is
/// `1 + D + D^2` and feedforward `0o5` is `1 + D^2`. The state packs the
/// register contents `s_{k-1} .. s_{k-m}` with `s_{k-1}` as the MSB.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trellis {
    memory: usize,
    num_states: usize,
    /// `next[2 s + u]`
    next: Vec<usize>,
    /// `parity[2 s + u]`
    parity: Vec<u8>,
    /// Input that drives state `s` towards zero.
    tail_input: Vec<u8>,
}

fn taps(poly: u32, len: usize) -> Vec<u8> {
    (0..len).map(|i| ((poly >> (len - 1 - i)) & 1) as u8).collect()
}

impl Trellis {
    pub fn new(feedback: u32, feedforward: u32) -> Result<Self> {
        if feedback < 2 {
            return Err(Error::param("feedback polynomial must have degree >= 1"));
        }
        let constraint = (u32::BITS - feedback.leading_zeros()) as usize;
        if constraint > 8 {
            return Err(Error::param("constraint length above 8 is not supported"));
        }
        if feedforward == 0 || feedforward >= 1 << constraint || feedforward == feedback {
            return Err(Error::param(format!(
                "feedforward polynomial {feedforward:o} is invalid for feedback {feedback:o}"
            )));
        }
        let memory = constraint - 1;
        let num_states = 1 << memory;
        let fb = taps(feedback, constraint);
        let ff = taps(feedforward, constraint);
        let reg = |s: usize, i: usize| -> u8 { ((s >> (memory - i)) & 1) as u8 };

        let mut next = vec![0; 2 * num_states];
        let mut parity = vec![0; 2 * num_states];
        let mut tail_input = vec![0; num_states];
        for s in 0..num_states {
            let feedback_sum = (1..=memory).fold(0u8, |acc, i| acc ^ (fb[i] & reg(s, i)));
            tail_input[s] = feedback_sum;
            for u in 0..2u8 {
                let a = u ^ feedback_sum;
                let p = (1..=memory).fold(ff[0] & a, |acc, i| acc ^ (ff[i] & reg(s, i)));
                next[2 * s + u as usize] = ((a as usize) << (memory - 1)) | (s >> 1);
                parity[2 * s + u as usize] = p;
            }
        }
        Ok(Self {
            memory,
            num_states,
            next,
            parity,
            tail_input,
        })
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    #[inline]
    pub fn next(&self, state: usize, input: u8) -> usize {
        self.next[2 * state + input as usize]
    }

    #[inline]
    pub fn parity(&self, state: usize, input: u8) -> u8 {
        self.parity[2 * state + input as usize]
    }

    #[inline]
    pub fn tail_input(&self, state: usize) -> u8 {
        self.tail_input[state]
    }

    /// Encodes `bits` from the zero state, then appends `memory` tail steps
    /// that return the register to zero. Returns `(parity, tail_inputs,
    /// tail_parity)`.
    pub fn encode(&self, bits: &[u8]) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
        let mut state = 0;
        let parity = bits
            .iter()
            .map(|&u| {
                let p = self.parity(state, u);
                state = self.next(state, u);
                p
            })
            .collect();
        let mut tail_u = Vec::with_capacity(self.memory);
        let mut tail_p = Vec::with_capacity(self.memory);
        for _ in 0..self.memory {
            let u = self.tail_input(state);
            tail_u.push(u);
            tail_p.push(self.parity(state, u));
            state = self.next(state, u);
        }
        debug_assert_eq!(state, 0);
        (parity, tail_u, tail_p)
    }
}
