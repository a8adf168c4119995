//! Counter-based random numbers.
//!
//! Each 64-bit output is a pure function of `(seed, counter)`:
//!
//! ```text
//! key       = mix(seed)
//! word(c)   = mix(key + (c + 1) · 0x9E3779B97F4A7C15)      (wrapping)
//! mix(z)    = SplitMix64 finaliser
//! ```
//!
//! Stream `s`, position `n` uses counter `s · 2³² + n`, so any partition of
//! the work across threads reproduces the serial draws exactly.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { key: mix(seed) }
    }

    /// A generator independent of `self`, for auxiliary draws.
    pub fn derive(&self, index: u64) -> Self {
        CounterRng {
            key: mix(self.key ^ mix(index.wrapping_add(GOLDEN))),
        }
    }

    pub fn word(&self, counter: u64) -> u64 {
        mix(self
            .key
            .wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    pub fn counter(stream: u64, position: u64) -> u64 {
        (stream << 32).wrapping_add(position)
    }

    pub fn word_at(&self, stream: u64, position: u64) -> u64 {
        self.word(Self::counter(stream, position))
    }

    /// Uniform real in the open interval (0, 1): `(⌊w/2¹²⌋ + ½)·2⁻⁵²`, exact.
    pub fn uniform_at(&self, stream: u64, position: u64) -> f64 {
        to_open_unit(self.word_at(stream, position))
    }
}

pub fn to_open_unit(w: u64) -> f64 {
    ((w >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}
