use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Substream identifiers; one per stochastic purpose so that changing how
/// many draws one consumer makes never shifts another consumer's numbers.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Stream {
    SecondMoment = 1,
    Hosts = 2,
    Messages = 3,
    Noise = 4,
    Oracle = 5,
}

pub(crate) fn stream(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
