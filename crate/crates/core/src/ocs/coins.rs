use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Source of the fair random choices an OCS consumes.
pub trait CoinSource {
    fn fair_bit(&mut self) -> bool;

    /// Uniform draw from `0..n`.
    fn uniform_index(&mut self, n: usize) -> usize;
}

/// Seeded ChaCha stream. Distinct `stream` values under one seed are
/// independent counter-based substreams.
#[derive(Debug, Clone)]
pub struct StreamCoins {
    rng: ChaCha8Rng,
}

impl StreamCoins {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        StreamCoins { rng }
    }
}

impl CoinSource for StreamCoins {
    fn fair_bit(&mut self) -> bool {
        self.rng.random::<bool>()
    }

    fn uniform_index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

/// Replays a fixed assignment of coins; used by exhaustive enumeration.
///
/// Bits are read from the low end of `bits`. Index draws consume the next
/// entry of `indices`. Running past the script panics, since that means the
/// caller sized the enumeration wrong.
#[derive(Debug, Clone, Default)]
pub struct ScriptedCoins {
    bits: u64,
    bit_pos: u32,
    indices: Vec<u8>,
    index_pos: usize,
}

impl ScriptedCoins {
    pub fn from_bits(bits: u64) -> Self {
        ScriptedCoins { bits, ..Default::default() }
    }

    pub fn from_indices(indices: Vec<u8>) -> Self {
        ScriptedCoins { indices, ..Default::default() }
    }

    /// Reload with a new bit pattern, keeping the index buffer allocation.
    pub fn rewind_bits(&mut self, bits: u64) {
        self.bits = bits;
        self.bit_pos = 0;
    }

    pub fn bits_used(&self) -> u32 {
        self.bit_pos
    }
}

impl CoinSource for ScriptedCoins {
    fn fair_bit(&mut self) -> bool {
        assert!(self.bit_pos < 64, "scripted coin stream exhausted");
        let bit = (self.bits >> self.bit_pos) & 1 == 1;
        self.bit_pos += 1;
        bit
    }

    fn uniform_index(&mut self, n: usize) -> usize {
        let idx = self.indices[self.index_pos] as usize;
        self.index_pos += 1;
        assert!(idx < n, "scripted index {idx} out of range 0..{n}");
        idx
    }
}
