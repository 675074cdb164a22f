//! Splittable random streams.
//!
//! Every random quantity in the crate is drawn from a stream addressed by
//! `(master seed, domain, trajectory, segment)`. Streams never share state,
//! so ensembles give the same numbers whether they run serially or on a
//! thread pool.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Keeps unrelated draws from colliding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamDomain {
    /// The forcing seen by the reference trajectory.
    Force = 1,
    /// Independent copies handed to the second trajectory of a coupling.
    IndependentCopy = 2,
    /// Random initial states and directions.
    Initial = 3,
    /// Consecutive segments of the Donsker sums.
    Paths = 4,
    /// Burn-in forcing before an experiment starts.
    BurnIn = 5,
    /// Standalone single-segment paths for the boundedness check.
    Samples = 6,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of one stream.
pub fn stream_seed(master: u64, domain: StreamDomain, trajectory: u64, segment: u64) -> u64 {
    let mut h = splitmix64(master);
    for word in [domain as u64, trajectory, segment] {
        h = splitmix64(h ^ splitmix64(word));
    }
    h
}

pub fn stream(master: u64, domain: StreamDomain, trajectory: u64, segment: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, domain, trajectory, segment))
}
