//! Seeded, splittable random streams.
//!
//! Every sample draws from its own ChaCha20 stream: the 256-bit key is the
//! little-endian run seed followed by zero bytes, and the 64-bit stream id is
//! `(purpose << 40) | sample_index`. A sample is therefore reproducible on its
//! own, independent of how many workers evaluate the batch and in which order.
//!
//! Uniforms take the top 53 bits of one `u64` output (`(w >> 11) · 2⁻⁵³`).
//! Normals use the cosine branch of Box–Muller on two uniforms,
//! `sqrt(-2 ln(1 - u₁)) · cos(2π u₂)`.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::linalg::Vec4;

/// Stream purposes. Distinct purposes never share a ChaCha stream.
pub mod purpose {
    pub const METRIC: u32 = 1;
    pub const CURVATURE: u32 = 2;
    pub const KILLING: u32 = 3;
    pub const ISOMETRY: u32 = 4;
    pub const NAVIGATION: u32 = 5;
    pub const FLAGS: u32 = 6;
    pub const DOMAIN: u32 = 7;
    pub const GEODESIC: u32 = 8;
}

pub struct SampleStream {
    rng: ChaCha20Rng,
}

impl SampleStream {
    pub fn new(seed: u64, purpose: u32, index: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(((purpose as u64) << 40) | (index & ((1 << 40) - 1)));
        Self { rng }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform on the Euclidean unit sphere S³.
    pub fn unit_vector(&mut self) -> Vec4 {
        loop {
            let v: Vec4 = std::array::from_fn(|_| self.normal());
            let n = crate::linalg::norm(&v);
            if n > 1e-8 {
                return v.map(|c| c / n);
            }
        }
    }

    /// Uniform in the closed Euclidean 4-ball of the given radius.
    pub fn ball(&mut self, radius: f64) -> Vec4 {
        let dir = self.unit_vector();
        let r = radius * self.uniform().powf(0.25);
        dir.map(|c| c * r)
    }

    /// Uniform in the 3-ball.
    pub fn ball3(&mut self, radius: f64) -> [f64; 3] {
        loop {
            let v: [f64; 3] = std::array::from_fn(|_| self.normal());
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 1e-8 {
                let r = radius * self.uniform().cbrt();
                return v.map(|c| c / n * r);
            }
        }
    }
}
