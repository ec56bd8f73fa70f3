//! Rate-1/2 parallel concatenated (turbo) code.
//!
//! Two identical RSC encoders, the second fed through a seeded random
//! interleaver. Parity is punctured alternately: even-indexed steps carry the
//! first encoder's parity, odd-indexed steps the second's. Both trellises are
//! terminated and their tail bits (systematic and parity) are sent after the
//! payload.
//!
//! Transmission order for `K` information bits and memory `m`:
//!
//! ```text
//! u_0 p_0  u_1 p_1  ...  u_{K-1} p_{K-1}   [t1_u t1_p] x m   [t2_u t2_p] x m
//! ```
//!
//! so a block is `2K + 4m` coded bits; for the default `K = 3968` and the
//! `(7, 5)` code that is 7944 bits.
//!
//! LLR convention: positive means bit `0` is more likely.

mod bcjr;
mod trellis;

pub use trellis::Trellis;

use rand::seq::SliceRandom;
use rand::SeedableRng;

use crate::rng::SimRng;
use crate::{Error, Result};
use bcjr::{ConstituentInput, Workspace, LLR_CLIP};

pub const DEFAULT_BLOCK_LENGTH: usize = 3968;
pub const DEFAULT_ITERATIONS: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TurboConfig {
    pub block_length: usize,
    /// Octal feedback polynomial of the constituent code.
    pub feedback: u32,
    /// Octal feedforward (parity) polynomial.
    pub feedforward: u32,
    pub interleaver_seed: u64,
    pub iterations: usize,
}

impl Default for TurboConfig {
    fn default() -> Self {
        Self {
            block_length: DEFAULT_BLOCK_LENGTH,
            feedback: 0o7,
            feedforward: 0o5,
            interleaver_seed: 0x7ab0,
            iterations: DEFAULT_ITERATIONS,
        }
    }
}

impl TurboConfig {
    pub fn with_block_length(mut self, k: usize) -> Self {
        self.block_length = k;
        self
    }
}

/// An encoded block.
#[derive(Clone, Debug, PartialEq)]
pub struct CodedBlock {
    pub info_bits: Vec<u8>,
    pub coded_bits: Vec<u8>,
    /// `info_bits.len() / coded_bits.len()`
    pub actual_rate: f64,
}

/// Encoder and iterative decoder for one configuration.
#[derive(Clone, Debug)]
pub struct TurboCode {
    cfg: TurboConfig,
    trellis: Trellis,
    /// `interleaved[k] = natural[permutation[k]]`
    permutation: Vec<usize>,
}

impl TurboCode {
    pub fn new(cfg: &TurboConfig) -> Result<Self> {
        if cfg.block_length == 0 {
            return Err(Error::param("turbo block length must be at least 1"));
        }
        if cfg.iterations == 0 {
            return Err(Error::param("turbo decoder needs at least one iteration"));
        }
        let trellis = Trellis::new(cfg.feedback, cfg.feedforward)?;
        let mut permutation: Vec<usize> = (0..cfg.block_length).collect();
        permutation.shuffle(&mut SimRng::seed_from_u64(cfg.interleaver_seed));
        Ok(Self {
            cfg: cfg.clone(),
            trellis,
            permutation,
        })
    }

    pub fn config(&self) -> &TurboConfig {
        &self.cfg
    }

    pub fn block_length(&self) -> usize {
        self.cfg.block_length
    }

    pub fn coded_length(&self) -> usize {
        2 * self.cfg.block_length + 4 * self.trellis.memory()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn encode(&self, bits: &[u8]) -> Result<CodedBlock> {
        let k = self.cfg.block_length;
        if bits.len() != k {
            return Err(Error::structural(format!(
                "expected {k} information bits, got {}",
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::param("information bits must be 0 or 1"));
        }
        let interleaved: Vec<u8> = self.permutation.iter().map(|&i| bits[i]).collect();
        let (p1, t1u, t1p) = self.trellis.encode(bits);
        let (p2, t2u, t2p) = self.trellis.encode(&interleaved);
        let mut coded = Vec::with_capacity(self.coded_length());
        for i in 0..k {
            coded.push(bits[i]);
            coded.push(if i % 2 == 0 { p1[i] } else { p2[i] });
        }
        for (tu, tp) in [(&t1u, &t1p), (&t2u, &t2p)] {
            for (u, p) in tu.iter().zip(tp.iter()) {
                coded.push(*u);
                coded.push(*p);
            }
        }
        Ok(CodedBlock {
            info_bits: bits.to_vec(),
            actual_rate: k as f64 / coded.len() as f64,
            coded_bits: coded,
        })
    }

    /// A-posteriori LLRs of the information bits after the configured number
    /// of iterations.
    pub fn decode_soft(&self, llrs: &[f64]) -> Result<Vec<f64>> {
        let k = self.cfg.block_length;
        let m = self.trellis.memory();
        if llrs.len() != self.coded_length() {
            return Err(Error::structural(format!(
                "expected {} coded LLRs, got {}",
                self.coded_length(),
                llrs.len()
            )));
        }
        if llrs.iter().any(|v| v.is_nan()) {
            return Err(Error::param("NaN in decoder input"));
        }
        let mut sys = vec![0.0; k];
        let mut par1 = vec![0.0; k];
        let mut par2 = vec![0.0; k];
        for i in 0..k {
            sys[i] = llrs[2 * i];
            if i % 2 == 0 {
                par1[i] = llrs[2 * i + 1];
            } else {
                par2[i] = llrs[2 * i + 1];
            }
        }
        let tail = &llrs[2 * k..];
        let t1u: Vec<f64> = (0..m).map(|j| tail[2 * j]).collect();
        let t1p: Vec<f64> = (0..m).map(|j| tail[2 * j + 1]).collect();
        let t2u: Vec<f64> = (0..m).map(|j| tail[2 * m + 2 * j]).collect();
        let t2p: Vec<f64> = (0..m).map(|j| tail[2 * m + 2 * j + 1]).collect();
        let sys2: Vec<f64> = self.permutation.iter().map(|&i| sys[i]).collect();

        let mut ws = Workspace::default();
        let mut apriori1 = vec![0.0; k];
        let mut ext1 = vec![0.0; k];
        let mut apriori2 = vec![0.0; k];
        let mut ext2 = vec![0.0; k];
        for _ in 0..self.cfg.iterations {
            let input = ConstituentInput {
                apriori: &apriori1,
                systematic: &sys,
                parity: &par1,
                tail_systematic: &t1u,
                tail_parity: &t1p,
            };
            bcjr::extrinsic(&self.trellis, &input, &mut ws, &mut ext1);
            for (j, &i) in self.permutation.iter().enumerate() {
                apriori2[j] = ext1[i];
            }
            let input = ConstituentInput {
                apriori: &apriori2,
                systematic: &sys2,
                parity: &par2,
                tail_systematic: &t2u,
                tail_parity: &t2p,
            };
            bcjr::extrinsic(&self.trellis, &input, &mut ws, &mut ext2);
            for (j, &i) in self.permutation.iter().enumerate() {
                apriori1[i] = ext2[j];
            }
        }
        Ok((0..k)
            .map(|i| sys[i].clamp(-LLR_CLIP, LLR_CLIP) + ext1[i] + apriori1[i])
            .collect())
    }

    /// Hard decisions on the information bits.
    pub fn decode(&self, llrs: &[f64]) -> Result<Vec<u8>> {
        Ok(self.decode_soft(llrs)?.into_iter().map(|l| u8::from(l < 0.0)).collect())
    }
}

/// Encodes one block with a codec built from `cfg`.
pub fn encode(bits: &[u8], cfg: &TurboConfig) -> Result<CodedBlock> {
    TurboCode::new(cfg)?.encode(bits)
}

/// Decodes one block with a codec built from `cfg`.
pub fn decode(llrs: &[f64], cfg: &TurboConfig) -> Result<Vec<u8>> {
    TurboCode::new(cfg)?.decode(llrs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn noiseless_llrs(coded: &[u8]) -> Vec<f64> {
        coded.iter().map(|&b| if b == 0 { 1e3 } else { -1e3 }).collect()
    }

    #[test]
    fn default_block_size_and_rate() {
        let code = TurboCode::new(&TurboConfig::default()).unwrap();
        assert_eq!(code.coded_length(), 7944);
        let ratio = code.coded_length() as f64 / code.block_length() as f64;
        assert!((2.0..=2.01).contains(&ratio));
    }

    #[test]
    fn all_zero_input_gives_all_zero_codeword() {
        let cfg = TurboConfig::default().with_block_length(100);
        let block = encode(&[0; 100], &cfg).unwrap();
        assert!(block.coded_bits.iter().all(|&b| b == 0));
        assert_eq!(block.coded_bits.len(), 208);
        assert!((block.actual_rate - 100.0 / 208.0).abs() < 1e-15);
    }

    #[test]
    fn noiseless_round_trip() {
        let mut rng = SimRng::seed_from_u64(1);
        for k in [1, 2, 17, 3968] {
            let cfg = TurboConfig::default().with_block_length(k);
            let code = TurboCode::new(&cfg).unwrap();
            let bits: Vec<u8> = (0..k).map(|_| rng.random_range(0..2)).collect();
            let block = code.encode(&bits).unwrap();
            assert_eq!(
                &block.coded_bits[..2 * k].iter().step_by(2).copied().collect::<Vec<_>>(),
                &bits
            );
            assert_eq!(code.decode(&noiseless_llrs(&block.coded_bits)).unwrap(), bits);
        }
    }

    #[test]
    fn length_errors() {
        let code = TurboCode::new(&TurboConfig::default().with_block_length(10)).unwrap();
        assert!(code.encode(&[0; 9]).is_err());
        assert!(code.decode(&[0.0; 27]).is_err());
        assert!(TurboCode::new(&TurboConfig {
            iterations: 0,
            ..TurboConfig::default()
        })
        .is_err());
        assert!(TurboCode::new(&TurboConfig::default().with_block_length(0)).is_err());
    }

    #[test]
    fn interleaver_is_a_seeded_permutation() {
        let a = TurboCode::new(&TurboConfig::default().with_block_length(500)).unwrap();
        let b = TurboCode::new(&TurboConfig::default().with_block_length(500)).unwrap();
        assert_eq!(a.permutation(), b.permutation());
        let mut sorted = a.permutation().to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..500).collect::<Vec<_>>());
        let c = TurboCode::new(&TurboConfig {
            interleaver_seed: 1,
            ..TurboConfig::default().with_block_length(500)
        })
        .unwrap();
        assert_ne!(a.permutation(), c.permutation());
    }
}
