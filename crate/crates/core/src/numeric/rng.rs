use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Counter-based random stream keyed by `(seed, stream)`.
///
/// Identical keys give identical sequences regardless of which thread draws
/// them. [`SeededRng::fork`] derives an independent child stream per sample
/// index, which is how parallel samplers stay worker-count independent.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Child stream for sample `index`; depends only on `(seed, stream, index)`.
    pub fn fork(&self, index: u64) -> Self {
        Self::new(self.seed, splitmix(self.stream ^ splitmix(index.wrapping_add(0x5851_f42d))))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            return lo;
        }
        lo + (hi - lo) * self.inner.gen::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        // Box–Muller; u1 in (0, 1] avoids ln(0).
        let u1 = 1.0 - self.inner.gen::<f64>();
        let u2 = self.inner.gen::<f64>();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn unit_vector(&mut self, n: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| self.standard_normal()).collect();
            let l = super::matrix::norm(&v);
            if l > 1e-12 {
                return v.into_iter().map(|x| x / l).collect();
            }
        }
    }

    /// Uniform point in the closed unit ball.
    pub fn in_unit_ball(&mut self, n: usize) -> Vec<f64> {
        let r = self.inner.gen::<f64>().powf(1.0 / n as f64);
        self.unit_vector(n).into_iter().map(|x| x * r).collect()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.inner.gen::<f64>() < p
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_sequence() {
        let mut a = SeededRng::new(42, 7);
        let mut b = SeededRng::new(42, 7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = SeededRng::new(42, 7);
        let mut b = SeededRng::new(42, 8);
        assert_ne!(a.next_u64(), b.next_u64());
        let mut c = a.fork(3);
        let mut d = a.fork(4);
        assert_ne!(c.next_u64(), d.next_u64());
    }

    #[test]
    fn fork_ignores_parent_position() {
        let a = SeededRng::new(1, 2);
        let mut b = a.clone();
        b.next_u64();
        assert_eq!(a.fork(9).next_u64(), b.fork(9).next_u64());
    }
}
