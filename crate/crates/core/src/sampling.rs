//! Deterministic parallel sampling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numeric::SeededRng;

/// Seed plus stream for one certification run.
///
/// Sample `i` always draws from `SeededRng::new(seed, stream).fork(i)`, and
/// results are collected in index order, so outputs are identical for any
/// rayon pool size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampler {
    pub seed: u64,
    pub stream: u64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    /// Same seed, different stream; used to keep sub-steps independent.
    pub fn substream(&self, tag: u64) -> Self {
        let base = SeededRng::new(self.seed, self.stream).fork(tag ^ 0xa076_1d64_78bd_642f);
        Self {
            seed: self.seed,
            stream: base.stream(),
        }
    }

    pub fn rng(&self, index: usize) -> SeededRng {
        SeededRng::new(self.seed, self.stream).fork(index as u64)
    }

    /// Evaluates `f(i, rng_i)` for `i in 0..count` in parallel, in index order.
    pub fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, &mut SeededRng) -> T + Sync + Send,
    {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = self.rng(i);
                f(i, &mut rng)
            })
            .collect()
    }
}

/// Where validators draw centres, scales and scale gaps from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    /// Centres are uniform in `[-half_width, half_width]ⁿ`.
    pub half_width: f64,
    /// Scales `t` are uniform in this range.
    pub t_range: (f64, f64),
    /// Scale gaps `s` are uniform in this range.
    pub s_range: (f64, f64),
}

impl Default for Region {
    fn default() -> Self {
        Self {
            half_width: 4.0,
            t_range: (-8.0, 24.0),
            s_range: (0.0, 12.0),
        }
    }
}

impl Region {
    pub fn point(&self, rng: &mut SeededRng, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| rng.uniform(-self.half_width, self.half_width))
            .collect()
    }

    pub fn scale(&self, rng: &mut SeededRng) -> f64 {
        rng.uniform(self.t_range.0, self.t_range.1)
    }

    pub fn gap(&self, rng: &mut SeededRng) -> f64 {
        rng.uniform(self.s_range.0, self.s_range.1)
    }
}

/// Linear-interpolated percentile of an already sorted slice, `q ∈ [0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    let w = pos - i as f64;
    sorted[i] * (1.0 - w) + sorted[j] * w
}
