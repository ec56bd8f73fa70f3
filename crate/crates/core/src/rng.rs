//! Named, independently seeded random streams.
//!
//! Every source of randomness in a simulation (channel, noise, attacker,
//! pilot placement, payload data, interleaver) draws from its own stream so
//! that any one of them can be frozen while the others vary. Stream seeds are
//! derived from a master seed and a path of integers with a SplitMix64-style
//! mixer, which is stable across platforms and releases.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type SimRng = ChaCha12Rng;

/// Identifies one random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    Channel,
    Noise,
    Attacker,
    Pilot,
    Data,
    Interleaver,
    Code,
}

impl Stream {
    pub const ALL: [Stream; 7] = [
        Stream::Channel,
        Stream::Noise,
        Stream::Attacker,
        Stream::Pilot,
        Stream::Data,
        Stream::Interleaver,
        Stream::Code,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stream::Channel => "channel",
            Stream::Noise => "noise",
            Stream::Attacker => "attacker",
            Stream::Pilot => "pilot",
            Stream::Data => "data",
            Stream::Interleaver => "interleaver",
            Stream::Code => "code",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Stream::Channel => 0x43_48_41_4e,
            Stream::Noise => 0x4e_4f_49_53,
            Stream::Attacker => 0x41_54_54_4b,
            Stream::Pilot => 0x50_49_4c_54,
            Stream::Data => 0x44_41_54_41,
            Stream::Interleaver => 0x49_4c_56_52,
            Stream::Code => 0x43_4f_44_45,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of integers into a seed.
pub fn mix_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Per-stream base seeds, derived from a master seed unless overridden.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedMap {
    master: u64,
    overrides: Vec<(Stream, u64)>,
}

impl SeedMap {
    pub fn new(master: u64) -> Self {
        Self {
            master,
            overrides: Vec::new(),
        }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Pins one stream to an explicit seed.
    pub fn with_override(mut self, stream: Stream, seed: u64) -> Self {
        self.overrides.retain(|(s, _)| *s != stream);
        self.overrides.push((stream, seed));
        self
    }

    pub fn base(&self, stream: Stream) -> u64 {
        self.overrides
            .iter()
            .find(|(s, _)| *s == stream)
            .map(|(_, seed)| *seed)
            .unwrap_or_else(|| mix_seed(self.master, &[stream.tag()]))
    }

    /// Seed for `stream` at the given position (e.g. SNR index, frame index).
    pub fn seed(&self, stream: Stream, path: &[u64]) -> u64 {
        mix_seed(self.base(stream), path)
    }

    pub fn rng(&self, stream: Stream, path: &[u64]) -> SimRng {
        SimRng::seed_from_u64(self.seed(stream, path))
    }
}
