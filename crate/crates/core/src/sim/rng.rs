use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Independent randomness streams derived from one run seed.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Stream {
    Inputs = 1,
    Predictions = 2,
    Faults = 3,
    Adversary = 4,
    Expander = 5,
    Process = 6,
}

/// A generator for `(seed, stream, a, b)`. Streams never share state, so
/// drawing from one (say, the adversary's per-round stream) cannot shift
/// another.
pub fn stream_rng(seed: u64, stream: Stream, a: u64, b: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"bapred-stream");
    h.update(seed.to_be_bytes());
    h.update([stream as u8]);
    h.update(a.to_be_bytes());
    h.update(b.to_be_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}
