//! Seeded randomness: stream derivation, pairwise-independent index
//! generators, Bernoulli edge sampling and per-edge fingerprints.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, EdgeId, SubgraphMask};

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[inline]
fn mix2(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b))
}

/// Named consumers of randomness. Each gets its own derived seed.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Stream {
    LevelSample(u32),
    Reservoir,
    Fingerprint,
    Bucket,
    Shuffle,
    Generator,
    Retry(u32),
    Forest(u32),
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::LevelSample(i) => 0x100_0000_0000 | i as u64,
            Stream::Reservoir => 0x200_0000_0000,
            Stream::Fingerprint => 0x300_0000_0000,
            Stream::Bucket => 0x400_0000_0000,
            Stream::Shuffle => 0x500_0000_0000,
            Stream::Generator => 0x600_0000_0000,
            Stream::Retry(i) => 0x700_0000_0000 | i as u64,
            Stream::Forest(i) => 0x800_0000_0000 | i as u64,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct MasterSeed(pub u64);

impl MasterSeed {
    pub fn derive(self, stream: Stream) -> u64 {
        mix2(self.0, stream.tag())
    }

    pub fn rng(self, stream: Stream) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.derive(stream))
    }
}

pub fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= x {
        if x % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn smallest_prime_at_least(x: u64) -> u64 {
    let mut p = x.max(2);
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// r(j) = ((a·j + b) mod prime) mod m for j in 0..s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairwiseGen {
    pub prime: u64,
    pub a: u64,
    pub b: u64,
    pub m: u64,
    pub s: u64,
}

impl PairwiseGen {
    pub fn new<R: Rng>(rng: &mut R, m: u64, s: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("pairwise generator needs m >= 1".into()));
        }
        let prime = smallest_prime_at_least(m.max(s));
        let a = rng.random_range(0..prime);
        let b = rng.random_range(0..prime);
        Self::from_coefficients(prime, a, b, m, s)
    }

    pub fn from_coefficients(prime: u64, a: u64, b: u64, m: u64, s: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("pairwise generator needs m >= 1".into()));
        }
        if !is_prime(prime) || prime < m || a >= prime || b >= prime {
            return Err(Error::InvalidParameter(format!("bad coefficients p={prime} a={a} b={b} m={m}")));
        }
        Ok(PairwiseGen { prime, a, b, m, s })
    }

    #[inline]
    pub fn value(&self, j: u64) -> u64 {
        let x = (self.a as u128 * j as u128 + self.b as u128) % self.prime as u128;
        (x as u64) % self.m
    }

    pub fn values(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.s).map(|j| self.value(j))
    }
}

#[inline]
fn keep_threshold(q: f64) -> Option<u64> {
    if q >= 1.0 {
        None
    } else {
        Some((q * 18_446_744_073_709_551_616.0) as u64)
    }
}

/// Counter-based coin: the same (seed, e) always lands the same way.
#[inline]
pub fn bernoulli_keep(seed: u64, e: EdgeId, q: f64) -> bool {
    match keep_threshold(q) {
        None => true,
        Some(t) => mix2(seed, e.0 as u64) < t,
    }
}

pub fn bernoulli_mask(seed: u64, g: &DynamicGraph, q: f64) -> Result<SubgraphMask> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParameter(format!("sampling probability {q} outside (0, 1]")));
    }
    let mut mask = SubgraphMask::empty(g.m());
    for e in g.alive_edges() {
        if bernoulli_keep(seed, e, q) {
            mask.insert(e);
        }
    }
    Ok(mask)
}

pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Per-edge random bit strings of a fixed width, packed into u64 words.
#[derive(Clone, Debug)]
pub struct FingerprintGen {
    seed: u64,
    bits: u32,
    words: usize,
}

impl FingerprintGen {
    /// Width is γ·max(1, ⌈log₂ n⌉) bits, capped at 256.
    pub fn new(seed: u64, gamma: u32, n: usize) -> Result<Self> {
        if gamma == 0 {
            return Err(Error::InvalidParameter("fingerprint width gamma must be >= 1".into()));
        }
        let bits = gamma.saturating_mul(ceil_log2(n).max(1));
        if bits > 256 {
            return Err(Error::InvalidParameter(format!("fingerprint width {bits} exceeds 256 bits")));
        }
        Ok(FingerprintGen { seed, bits, words: bits.div_ceil(64) as usize })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn write(&self, e: EdgeId, out: &mut [u64]) {
        debug_assert_eq!(out.len(), self.words);
        for (k, w) in out.iter_mut().enumerate() {
            let raw = mix2(mix2(self.seed, e.0 as u64), k as u64);
            let width = (self.bits - 64 * k as u32).min(64);
            *w = if width == 64 { raw } else { raw & ((1u64 << width) - 1) };
        }
    }

    pub fn fingerprint(&self, e: EdgeId) -> Vec<u64> {
        let mut out = vec![0; self.words];
        self.write(e, &mut out);
        out
    }
}
