//! Reproducible per-replica random streams.
//!
//! Every replica owns a ChaCha8 stream. The 256-bit key is four consecutive
//! SplitMix64 outputs started from the master seed, and the ChaCha stream
//! number is the replica id, so replica `i` sees the same numbers no matter
//! which worker runs it or in which order. Auxiliary streams (for example the
//! randomness used when refining a loop near a marked point) are keyed by
//! `splitmix(seed ^ splitmix(label))` and keep the replica id as stream.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Human-readable description of the split function, recorded in run summaries.
pub const SPLIT_FUNCTION: &str = "ChaCha8(key = SplitMix64^4(seed), stream = replica_id); \
     substream(label): key = SplitMix64^4(mix(seed, label)), stream = replica_id";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One-shot SplitMix64 mix of a single word.
pub fn mix64(x: u64) -> u64 {
    let mut s = x;
    splitmix64(&mut s)
}

fn chacha_from(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// A deterministic random stream owned by one replica.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    replica_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn for_replica(seed: u64, replica_id: u64) -> Self {
        Self {
            seed,
            replica_id,
            inner: chacha_from(seed, replica_id),
        }
    }

    /// An independent stream for the same replica, selected by `label`.
    pub fn substream(&self, label: u64) -> Self {
        let seed = mix64(self.seed ^ mix64(label));
        Self {
            seed,
            replica_id: self.replica_id,
            inner: chacha_from(seed, self.replica_id),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replica_id(&self) -> u64 {
        self.replica_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
