use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// ChaCha stream `stream` under key `seed`. Distinct streams never overlap,
/// which gives counter-based derivation for replicas and sub-chains.
pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The two independent random sources of one adaptive chain: `main` drives
/// the coins, base moves and resampling of the main chain, `aux` drives only
/// the auxiliary chain.
#[derive(Debug, Clone)]
pub struct ChainRng {
    pub main: ChaCha8Rng,
    pub aux: ChaCha8Rng,
}

impl ChainRng {
    pub fn from_seed(seed: u64) -> Self {
        Self::for_replica(seed, 0)
    }

    /// Streams `2r` and `2r + 1` of `base_seed` for replica `r`.
    pub fn for_replica(base_seed: u64, replica: u64) -> Self {
        Self {
            main: seeded_stream(base_seed, 2 * replica),
            aux: seeded_stream(base_seed, 2 * replica + 1),
        }
    }

    pub fn from_parts(main: ChaCha8Rng, aux: ChaCha8Rng) -> Self {
        Self { main, aux }
    }
}
