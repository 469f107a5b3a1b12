//! Independent reference implementations ("oracles") and seeded random
//! generators for the equivalence suites.
//!
//! Nothing here calls into the implementation paths it is used to check:
//! the oracles re-derive results by brute force (minute-by-minute
//! simulation, rule-by-rule scans, direct tree walks).

pub mod corpus;
pub mod feedback;
pub mod jsonapi;
pub mod population;
pub mod questionnaire;
pub mod schedule;
pub mod sensing;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
