//! Frame layout with keyed pilot obfuscation.
//!
//! Pilot positions and values are drawn from a pseudo-random stream keyed by
//! a secret shared by the transmitter and receiver plus the frame index, so an
//! attacker without the key cannot tell pilots from data.

use rand::seq::index;
use rand::{Rng, SeedableRng};

use crate::rng::{mix_seed, SimRng};
use crate::{Bpsk, Error, Result};

pub const DEFAULT_FRAME_LEN: usize = 100;
pub const DEFAULT_NUM_PILOTS: usize = 20;

/// Pilot positions (ascending) and their values for one frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PilotPlacement {
    pub positions: Vec<usize>,
    pub values: Vec<Bpsk>,
}

/// Chooses `num_pilots` distinct positions in `0..frame_len` and a ±1 value
/// for each, deterministically from `(key, frame_index)`.
pub fn place_pilots(key: u64, frame_index: u64, frame_len: usize, num_pilots: usize) -> Result<PilotPlacement> {
    if num_pilots > frame_len {
        return Err(Error::param(format!(
            "{num_pilots} pilots do not fit in a {frame_len}-symbol frame"
        )));
    }
    let mut rng = SimRng::seed_from_u64(mix_seed(key, &[frame_index]));
    let mut positions = index::sample(&mut rng, frame_len, num_pilots).into_vec();
    positions.sort_unstable();
    let values = (0..num_pilots)
        .map(|_| if rng.random::<bool>() { Bpsk::Plus } else { Bpsk::Minus })
        .collect();
    Ok(PilotPlacement { positions, values })
}

/// One transmitted frame: pilots at keyed positions, data everywhere else.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub index: u64,
    symbols: Vec<Bpsk>,
    is_pilot: Vec<bool>,
    pilot_positions: Vec<usize>,
    data_positions: Vec<usize>,
}

impl Frame {
    /// Assembles a frame of `frame_len` symbols. `data` fills the non-pilot
    /// positions in order and must have exactly `frame_len - pilots` entries.
    pub fn new(index: u64, frame_len: usize, pilots: &PilotPlacement, data: &[Bpsk]) -> Result<Self> {
        if pilots.positions.len() != pilots.values.len() {
            return Err(Error::structural("pilot positions and values differ in length"));
        }
        if pilots.positions.iter().any(|&p| p >= frame_len) {
            return Err(Error::param("pilot position outside the frame"));
        }
        let mut is_pilot = vec![false; frame_len];
        for &p in &pilots.positions {
            if is_pilot[p] {
                return Err(Error::param("duplicate pilot position"));
            }
            is_pilot[p] = true;
        }
        let data_positions: Vec<usize> = (0..frame_len).filter(|&k| !is_pilot[k]).collect();
        if data.len() != data_positions.len() {
            return Err(Error::structural(format!(
                "frame has {} data slots but {} data symbols were given",
                data_positions.len(),
                data.len()
            )));
        }
        let mut symbols = vec![Bpsk::Plus; frame_len];
        for (&p, &v) in pilots.positions.iter().zip(&pilots.values) {
            symbols[p] = v;
        }
        for (&p, &v) in data_positions.iter().zip(data) {
            symbols[p] = v;
        }
        Ok(Self {
            index,
            symbols,
            is_pilot,
            pilot_positions: pilots.positions.clone(),
            data_positions,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Bpsk] {
        &self.symbols
    }

    pub fn is_pilot(&self, k: usize) -> bool {
        self.is_pilot[k]
    }

    pub fn pilot_positions(&self) -> &[usize] {
        &self.pilot_positions
    }

    pub fn data_positions(&self) -> &[usize] {
        &self.data_positions
    }

    pub fn num_data(&self) -> usize {
        self.data_positions.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placement_is_deterministic_and_distinct() {
        let a = place_pilots(5, 17, 100, 20).unwrap();
        let b = place_pilots(5, 17, 100, 20).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.positions.len(), 20);
        let mut dedup = a.positions.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 20);
        assert!(a.positions.iter().all(|&p| p < 100));
        assert_ne!(a, place_pilots(5, 18, 100, 20).unwrap());
        assert_ne!(a, place_pilots(6, 17, 100, 20).unwrap());
    }

    #[test]
    fn too_many_pilots_rejected() {
        assert!(place_pilots(0, 0, 10, 11).is_err());
        assert_eq!(
            place_pilots(0, 0, 10, 10).unwrap().positions,
            (0..10).collect::<Vec<_>>()
        );
    }

    #[test]
    fn position_occupancy_is_uniform() {
        let frames = 10_000;
        let mut counts = [0u32; 100];
        for f in 0..frames {
            for p in place_pilots(123, f, 100, 20).unwrap().positions {
                counts[p] += 1;
            }
        }
        // Each position is occupied with probability 0.2 independently per frame.
        let expect = 0.2 * frames as f64;
        let sd = (frames as f64 * 0.2 * 0.8).sqrt();
        // 4 sigma keeps the family of 100 checks from tripping on chance.
        for c in counts {
            assert!((f64::from(c) - expect).abs() < 4.0 * sd, "{c}");
        }
        let chi2: f64 = counts.iter().map(|&c| (f64::from(c) - expect).powi(2) / expect).sum();
        // 99 dof; the 0.999 quantile is about 148.
        assert!(chi2 < 148.0, "{chi2}");
    }

    #[test]
    fn frame_layout() {
        let pilots = place_pilots(1, 0, 10, 3).unwrap();
        let data = vec![Bpsk::Minus; 7];
        let frame = Frame::new(0, 10, &pilots, &data).unwrap();
        assert_eq!(frame.num_data(), 7);
        for (&p, &v) in pilots.positions.iter().zip(&pilots.values) {
            assert!(frame.is_pilot(p));
            assert_eq!(frame.symbols()[p], v);
        }
        for &d in frame.data_positions() {
            assert_eq!(frame.symbols()[d], Bpsk::Minus);
        }
        assert!(Frame::new(0, 10, &pilots, &data[..6]).is_err());
    }
}
