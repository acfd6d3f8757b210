//! Keyed random streams.
//!
//! Every realization draws from its own ChaCha8 stream selected by
//! (seed, realization index); independent purposes inside a realization
//! start at disjoint word offsets of that stream. Results therefore do not
//! depend on the order or the thread in which realizations are generated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RngStream = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Phases,
    Noise,
    Other(u32),
}

impl Purpose {
    fn offset(self) -> u128 {
        let slot: u128 = match self {
            Purpose::Phases => 0,
            Purpose::Noise => 1,
            Purpose::Other(k) => 2 + k as u128,
        };
        // 2^40 words per purpose
        slot << 40
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub index: u64,
}

impl StreamKey {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    pub fn stream(&self, purpose: Purpose) -> RngStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng.set_word_pos(purpose.offset());
        rng
    }
}
