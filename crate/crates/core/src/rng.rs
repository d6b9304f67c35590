//! Deterministic, splittable random streams.
//!
//! Every random quantity in this crate is drawn from an [`RngStream`]
//! addressed by `(seed, index)`. Streams with the same address reproduce the
//! same draws bit for bit on every platform; streams with different addresses
//! are independent ChaCha streams under the same key. Each stream owns 16
//! lanes (sub-streams) so that logically distinct draw sequences (walk
//! increments vs. perturbations, point measure vs. Brownian values) never
//! share randomness even when produced by one replica.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

/// Lanes per `(seed, index)` address.
pub const LANES: u64 = 16;
const LANE_BITS: u32 = 4;
const MAX_INDEX: u64 = 1 << (64 - LANE_BITS - 1);

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 finalizer; used to derive child keys.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A reproducible random stream addressed by `(seed, index)` plus a lane.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    index: u64,
    lane: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    /// Lane 0 of the stream at `(seed, index)`. `index` must fit in 59 bits.
    pub fn new(seed: u64, index: u64) -> Self {
        Self::with_lane(seed, index, 0)
    }

    fn with_lane(seed: u64, index: u64, lane: u64) -> Self {
        assert!(index < MAX_INDEX, "stream index {index} out of range");
        assert!(lane < LANES, "lane {lane} out of range");
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream((index << LANE_BITS) | lane);
        Self {
            seed,
            index,
            lane,
            rng,
        }
    }

    /// A sibling lane of this stream's `(seed, index)` address, at its start.
    pub fn substream(&self, lane: u64) -> Self {
        Self::with_lane(self.seed, self.index, lane)
    }

    /// An independent child stream keyed by `(this address, tag)`.
    ///
    /// Used where an unbounded number of extra streams may be needed (e.g.
    /// resampling loops); the child key is a splitmix64 hash, so children are
    /// reproducible and independent of every `(seed, index)` lane.
    pub fn descend(&self, tag: u64) -> Self {
        let combined = mix64(self.seed ^ GOLDEN.wrapping_mul(self.index << LANE_BITS | self.lane));
        Self::new(mix64(combined ^ GOLDEN.wrapping_mul(tag.wrapping_add(1))), 0)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn lane(&self) -> u64 {
        self.lane
    }

    /// Uniform draw on `(0, 1]`, never zero, so inverse transforms of the
    /// form `x^{-1/a}` and `-ln x` stay finite.
    pub fn uniform_oc(&mut self) -> f64 {
        (((self.rng.next_u64() >> 11) + 1) as f64) * (1.0 / 9007199254740992.0)
    }

    /// Standard exponential via inversion; range `[0, inf)`.
    pub fn standard_exponential(&mut self) -> f64 {
        -self.uniform_oc().ln()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Poisson count with the given mean (`mean > 0`).
    pub fn poisson(&mut self, mean: f64) -> u64 {
        let draw: f64 = Poisson::new(mean)
            .expect("poisson mean must be positive and finite")
            .sample(&mut self.rng);
        draw as u64
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}
