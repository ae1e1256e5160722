//! Seed derivation and index-addressable random streams.
//!
//! Every stochastic component draws from a seed derived from one root seed
//! and a component name, so adding a component never perturbs the others.
//! Sensor noise uses [`GaussianStream`], which maps a sample index directly to
//! a position in a ChaCha keystream; sample `k` is the same value no matter
//! which thread produces it or in what order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Child seed for `component`, stable across platforms and compiler releases.
pub fn derive_seed(root: u64, component: &str) -> u64 {
    splitmix64(root ^ splitmix64(fnv1a(component)))
}

/// Child seed for the `index`-th member of a component family (e.g. shell #3).
pub fn derive_seed_indexed(root: u64, component: &str, index: u64) -> u64 {
    splitmix64(derive_seed(root, component) ^ splitmix64(index.wrapping_add(1)))
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal deviate via Box–Muller from a sequential generator.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Counter-addressed stream of standard normals and uniforms.
///
/// Each index consumes a fixed four-word window of the keystream, so
/// `normal(k)` depends only on (seed, stream id, k).
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
}

impl GaussianStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    fn words(&mut self, index: u64) -> (u64, u64) {
        self.rng.set_word_pos(u128::from(index) * 4);
        (self.rng.next_u64(), self.rng.next_u64())
    }

    pub fn normal(&mut self, index: u64) -> f64 {
        let (a, b) = self.words(index);
        let u1 = ((a >> 11) as f64 + 1.0) * INV_2_53;
        let u2 = (b >> 11) as f64 * INV_2_53;
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform in [0, 1). Shares the index space with [`Self::normal`]; use a
    /// separate stream when both are needed for the same index.
    pub fn uniform(&mut self, index: u64) -> f64 {
        let (a, _) = self.words(index);
        (a >> 11) as f64 * INV_2_53
    }
}
