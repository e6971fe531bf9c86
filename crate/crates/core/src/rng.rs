//! Deterministic random-number streams.
//!
//! Every stochastic component draws from its own counter-based stream so that
//! the initialization sampling, variation operators, Gaussian-process restarts
//! and baseline algorithms never perturb each other's sequences. Streams are
//! derived from a single master seed and serialize to an exact resume point,
//! which is what makes checkpoint restarts bit-identical to uninterrupted
//! runs.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Fixed stream identifiers, one per stochastic component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamPurpose {
    /// Uniform sampling of the initial population.
    Initialization = 0,
    /// Crossover and mutation draws.
    Variation = 1,
    /// Hyper-parameter restart points for Gaussian-process fits.
    GpFit = 2,
    /// All draws made by a baseline algorithm after initialization.
    Baseline = 3,
}

/// A seekable ChaCha stream tied to a master seed and a [`StreamPurpose`].
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, purpose: StreamPurpose) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(purpose as u64);
        Self {
            master_seed,
            stream: purpose as u64,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Draws one uniform sample from [0, 1).
    pub fn uniform(&mut self) -> f64 {
        rand::Rng::gen::<f64>(&mut self.rng)
    }

    /// Draws one uniform sample from the half-open range [low, high).
    pub fn uniform_range(&mut self, low: f64, high: f64) -> f64 {
        rand::Rng::gen_range(&mut self.rng, low..high)
    }

    /// Draws a uniform index from 0..len.
    pub fn index(&mut self, len: usize) -> usize {
        rand::Rng::gen_range(&mut self.rng, 0..len)
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

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Wire form: the master seed plus the exact position within the stream.
/// The 128-bit word position is split into two 64-bit halves so the JSON
/// stays within integer-safe range.
#[derive(Serialize, Deserialize)]
struct RngStreamRepr {
    seed: u64,
    stream: u64,
    word_pos_hi: u64,
    word_pos_lo: u64,
}

impl Serialize for RngStream {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pos = self.rng.get_word_pos();
        RngStreamRepr {
            seed: self.master_seed,
            stream: self.stream,
            word_pos_hi: (pos >> 64) as u64,
            word_pos_lo: pos as u64,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RngStream {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = RngStreamRepr::deserialize(deserializer)?;
        let mut rng = ChaCha8Rng::seed_from_u64(repr.seed);
        rng.set_stream(repr.stream);
        rng.set_word_pos(((repr.word_pos_hi as u128) << 64) | repr.word_pos_lo as u128);
        Ok(Self {
            master_seed: repr.seed,
            stream: repr.stream,
            rng,
        })
    }
}
