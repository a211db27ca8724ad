//! Counter-based random numbers.
//!
//! Every random quantity in a run is a pure function of the master seed and
//! a structured counter, computed with Philox4x32-10. Nothing is drawn from
//! a shared sequential generator, so results do not depend on evaluation
//! order or on how replicas are scheduled across workers.

use rand::RngCore;

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

/// Domain-separation tags, placed in the second counter word.
pub mod tag {
    pub const SAMPLE: u32 = 0x0100_0000;
    pub const PALM_MARK: u32 = 0x0200_0000;
    pub const THIN: u32 = 0x0300_0000;
    pub const MOTION: u32 = 0x0400_0000;
    pub const PAIR: u32 = 0x0500_0000;
    pub const TAIL: u32 = 0x0600_0000;
    pub const STEP: u32 = 0x0700_0000;
    pub const EXPERIMENT: u32 = 0x0800_0000;
}

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// The Philox4x32 bijection with 10 rounds.
#[inline]
pub fn philox4x32(mut ctr: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, ctr[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0];
    }
    ctr
}

/// Maps 64 random bits to a double strictly inside (0, 1).
#[inline]
pub fn open01(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

#[inline]
fn join(hi: u32, lo: u32) -> u64 {
    (u64::from(hi) << 32) | u64::from(lo)
}

/// A Philox key derived from a 64-bit seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Key(pub [u32; 2]);

impl Key {
    pub fn from_seed(seed: u64) -> Self {
        Key([seed as u32, (seed >> 32) as u32])
    }

    /// Two independent uniforms in (0, 1) for one counter value.
    #[inline]
    pub fn uniforms(&self, ctr: [u32; 4]) -> (f64, f64) {
        let out = philox4x32(ctr, self.0);
        (open01(join(out[0], out[1])), open01(join(out[2], out[3])))
    }

    #[inline]
    pub fn uniform(&self, ctr: [u32; 4]) -> f64 {
        self.uniforms(ctr).0
    }

    /// A sequential stream whose first three counter words are fixed.
    pub fn stream(&self, prefix: [u32; 3]) -> Stream {
        Stream {
            key: *self,
            prefix,
            block: 0,
            buf: [0; 4],
            used: 4,
        }
    }
}

/// Derives an independent child seed (SplitMix64 finalizer over seed and index).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sequential view of one Philox counter family: `[prefix.., block]`.
#[derive(Clone, Debug)]
pub struct Stream {
    key: Key,
    prefix: [u32; 3],
    block: u32,
    buf: [u32; 4],
    used: usize,
}

impl Stream {
    #[inline]
    fn refill(&mut self) {
        let ctr = [self.prefix[0], self.prefix[1], self.prefix[2], self.block];
        self.buf = philox4x32(ctr, self.key.0);
        self.block = self.block.wrapping_add(1);
        self.used = 0;
    }

    /// Uniform in (0, 1).
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        open01(self.next_u64())
    }
}

impl RngCore for Stream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        if self.used == 4 {
            self.refill();
        }
        let v = self.buf[self.used];
        self.used += 1;
        v
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        let hi = self.next_u32();
        let lo = self.next_u32();
        join(hi, lo)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(4) {
            let v = self.next_u32().to_le_bytes();
            chunk.copy_from_slice(&v[..chunk.len()]);
        }
    }
}
