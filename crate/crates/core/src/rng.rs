//! Hierarchical, counter-based random streams.
//!
//! A [`RandomStream`] is a master seed plus a path of indices (experiment,
//! grid point, network replicate, initial-condition replicate, ...). The
//! generator for a stream is keyed by a hash of the whole path, so sibling
//! streams never share state and any work item can be reproduced on its own,
//! in any order, on any thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type handed out by [`RandomStream::rng`].
pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RandomStream {
    seed: u64,
    path: Vec<u64>,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream { seed, path: Vec::new() }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Substream one level deeper.
    pub fn child(&self, index: u64) -> Self {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(index);
        RandomStream { seed: self.seed, path }
    }

    /// Substream addressed by a short string label, e.g. `"topology"`.
    pub fn named(&self, label: &str) -> Self {
        // FNV-1a; labels are compile-time constants so collisions are checked by tests.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        self.child(h)
    }

    fn key(&self) -> [u8; 32] {
        let mut h = splitmix(self.seed);
        for &p in &self.path {
            h = splitmix(h ^ splitmix(p ^ GOLDEN.rotate_left(17)));
        }
        h = splitmix(h ^ self.path.len() as u64);
        let mut key = [0u8; 32];
        let mut z = h;
        for chunk in key.chunks_exact_mut(8) {
            z = splitmix(z);
            chunk.copy_from_slice(&z.to_le_bytes());
        }
        key
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        ChaCha8Rng::from_seed(self.key())
    }
}
