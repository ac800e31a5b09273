use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The generator every stochastic operation draws from.
pub type StreamRng = ChaCha8Rng;

/// Identifier of an independent random stream.
///
/// A stream is a `(key, stream)` pair fed to ChaCha8: the key seeds the
/// cipher and the stream selects one of its 2^64 independent keystreams.
/// [`StreamId::child`] derives sub-streams deterministically, which is how
/// trials, channel stages and receiver padding get disjoint randomness
/// without shared state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StreamId {
    pub key: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl StreamId {
    pub const fn new(key: u64) -> Self {
        StreamId { key, stream: 0 }
    }

    /// Derives the `index`-th sub-stream.
    pub fn child(self, index: u64) -> StreamId {
        StreamId {
            key: splitmix64(self.key ^ splitmix64(self.stream)),
            stream: index,
        }
    }

    pub fn rng(self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.key);
        rng.set_stream(self.stream);
        rng
    }

    /// Uniform draw from `0..n`, `n >= 1`.
    pub fn uniform_index(self, n: usize) -> usize {
        self.rng().random_range(0..n)
    }
}
