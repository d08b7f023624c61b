//! Randomness tapes: deterministic streams of unbiased bits.
//!
//! A tape is the algorithm's only source of randomness. [`RandomTape`] keeps
//! an independent pseudorandom stream per variable, so the bits a variable
//! sees depend only on (seed, variable, how often that variable was drawn),
//! not on when other variables consumed bits. That property makes a staged
//! run (variables instantiated lazily) consume bitwise the same randomness
//! per variable as an upfront run, which the stage/finite equivalence tests
//! rely on.

use std::collections::BTreeMap;

use lll_core::types::VarId;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// A source of unbiased bits addressed by variable.
pub trait Tape {
    /// Next bit for `var`, or `None` if the tape is exhausted.
    fn draw_bit(&mut self, var: VarId) -> Option<bool>;

    /// Total bits handed out so far (the tape cursor).
    fn bits_consumed(&self) -> u64;
}

struct BitStream {
    rng: ChaCha8Rng,
    buf: u64,
    left: u8,
}

impl BitStream {
    fn new(seed: u64, var: VarId) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(var);
        BitStream { rng, buf: 0, left: 0 }
    }

    fn next_bit(&mut self) -> bool {
        if self.left == 0 {
            self.buf = self.rng.next_u64();
            self.left = 64;
        }
        let bit = self.buf & 1 == 1;
        self.buf >>= 1;
        self.left -= 1;
        bit
    }
}

/// Seeded pseudorandom tape with one independent stream per variable.
/// Unbounded: `draw_bit` never returns `None`.
pub struct RandomTape {
    seed: u64,
    cursor: u64,
    streams: BTreeMap<VarId, BitStream>,
}

impl RandomTape {
    pub fn new(seed: u64) -> Self {
        RandomTape {
            seed,
            cursor: 0,
            streams: BTreeMap::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Tape for RandomTape {
    fn draw_bit(&mut self, var: VarId) -> Option<bool> {
        let seed = self.seed;
        let stream = self
            .streams
            .entry(var)
            .or_insert_with(|| BitStream::new(seed, var));
        self.cursor += 1;
        Some(stream.next_bit())
    }

    fn bits_consumed(&self) -> u64 {
        self.cursor
    }
}

/// A finite, scripted tape: hands out a fixed bit sequence in order,
/// ignoring which variable asks. Used for forced examples and for
/// enumerating all outcomes of bounded-depth executions.
pub struct ScriptTape {
    bits: Vec<bool>,
    pos: usize,
}

impl ScriptTape {
    pub fn new(bits: Vec<bool>) -> Self {
        ScriptTape { bits, pos: 0 }
    }

    /// Bits remaining on the script.
    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    /// True once every scripted bit has been handed out.
    pub fn exhausted(&self) -> bool {
        self.pos == self.bits.len()
    }
}

impl Tape for ScriptTape {
    fn draw_bit(&mut self, _var: VarId) -> Option<bool> {
        let bit = self.bits.get(self.pos).copied()?;
        self.pos += 1;
        Some(bit)
    }

    fn bits_consumed(&self) -> u64 {
        self.pos as u64
    }
}
