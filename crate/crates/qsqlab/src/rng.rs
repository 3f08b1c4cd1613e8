//! Reproducible random streams keyed by `(seed, trial, stream)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Independent ChaCha stream for one trial of one experiment. ChaCha is a
/// counter-based generator, so streams never overlap and trials can run in
/// any order.
pub fn stream_rng(seed: u64, trial: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng.set_word_pos((stream as u128) << 40);
    rng
}
