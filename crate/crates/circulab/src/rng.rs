//! Counter-based random streams.
//!
//! Every random quantity in the crate is drawn from a stream whose 64-bit
//! key is derived from (master seed, domain label, index tuple) by the mix
//! below, so any sub-computation can be reproduced in isolation and matrix
//! entries are pure functions of (seed, i, j).  That is what makes prefix
//! sampling agree with one-shot sampling: exposing a new row never perturbs
//! entries that were already visible.

use rand::RngCore;

/// SplitMix64 step, the avalanche from Steele, Lea and Flood's generator.
#[inline]
fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Stream key = seed mixed with an FNV-1a hash of the domain label and each
/// index in turn.  Documented so external tooling can reproduce any stream.
pub fn stream_key(seed: u64, domain: &str, idx: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in domain.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    let mut state = seed ^ h;
    let mut key = splitmix(&mut state);
    for &v in idx {
        state ^= v;
        key = splitmix(&mut state);
    }
    key
}

/// Counter-based stream: the key seeds a SplitMix64 sequence.  Cheap enough
/// to construct one per matrix entry.
#[derive(Debug, Clone)]
pub struct Stream {
    state: u64,
}

impl Stream {
    pub fn new(seed: u64, domain: &str, idx: &[u64]) -> Self {
        Stream { state: stream_key(seed, domain, idx) }
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        (splitmix(&mut self.state) >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        splitmix(&mut self.state)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        let mut chunks = dest.chunks_exact_mut(8);
        for chunk in &mut chunks {
            chunk.copy_from_slice(&self.next_u64().to_le_bytes());
        }
        let rem = chunks.into_remainder();
        if !rem.is_empty() {
            let bytes = self.next_u64().to_le_bytes();
            rem.copy_from_slice(&bytes[..rem.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}
