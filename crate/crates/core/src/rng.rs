//! Counter-based random substreams.
//!
//! Every random decision is drawn from a ChaCha8 stream addressed by
//! `(master seed, domain, epoch, index)`. The stream for a given address is
//! fixed no matter which thread consumes it or in which order, so results do
//! not depend on parallel scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose of a substream. Distinct domains never share key material.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Membership = 1,
    Contacts = 2,
    Pairs = 3,
    Samples = 4,
    Trials = 5,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Returns the generator for one `(seed, domain, epoch, index)` address.
pub fn substream(seed: u64, domain: Domain, epoch: u32, index: u64) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64((domain as u64) << 32 | epoch as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}
