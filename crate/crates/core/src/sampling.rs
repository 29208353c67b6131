//! Seeded, chunked Monte Carlo with a fixed reduction order.
//!
//! Every chunk draws from its own ChaCha stream derived from `(seed, chunk index)`, and
//! partial sums are combined in chunk order, so results do not depend on how rayon
//! schedules the chunks.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Samples per chunk.
pub const CHUNK: usize = 1024;

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// `n × count` matrix whose columns are uniform on the unit sphere `S^{n−1}`.
pub fn sphere_directions(rng: &mut ChaCha8Rng, n: usize, count: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, count);
    for mut col in m.column_iter_mut() {
        loop {
            for v in col.iter_mut() {
                *v = StandardNormal.sample(rng);
            }
            let norm = col.norm();
            if norm > 0.0 {
                col /= norm;
                break;
            }
        }
    }
    m
}

/// Running first and second moments.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn from_values(values: &[f64]) -> Self {
        values.iter().fold(Moments::default(), |m, &v| Moments {
            count: m.count + 1,
            sum: m.sum + v,
            sum_sq: m.sum_sq + v * v,
        })
    }

    pub fn merge(self, other: Moments) -> Moments {
        Moments {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Sample variance with the `n − 1` denominator.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Runs `per_chunk(rng, count)` over `samples` draws split into [`CHUNK`]-sized pieces
/// and returns the chunk results in chunk order.
pub fn map_chunks<T, F>(samples: usize, seed: u64, per_chunk: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(samples - c * CHUNK);
            let mut rng = chunk_rng(seed, c as u64);
            per_chunk(&mut rng, count)
        })
        .collect()
}

/// Moments of a scalar statistic evaluated on chunks of samples.
pub fn chunked_moments<F>(samples: usize, seed: u64, per_chunk: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng, usize) -> Vec<f64> + Sync,
{
    map_chunks(samples, seed, |rng, count| Moments::from_values(&per_chunk(rng, count)))
        .into_iter()
        .fold(Moments::default(), Moments::merge)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_unit() {
        let mut rng = chunk_rng(1, 0);
        let d = sphere_directions(&mut rng, 5, 100);
        assert_eq!(d.shape(), (5, 100));
        for c in d.column_iter() {
            assert!((c.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn moments_are_deterministic_across_pools() {
        let f = |rng: &mut ChaCha8Rng, count: usize| -> Vec<f64> {
            (0..count).map(|_| StandardNormal.sample(rng)).collect()
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| chunked_moments(10_000, 42, f));
        let b = four.install(|| chunked_moments(10_000, 42, f));
        assert_eq!(a, b);
        assert_eq!(a.count, 10_000);
    }

    #[test]
    fn std_error_formula() {
        let m = Moments::from_values(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m.mean() - 2.5).abs() < 1e-15);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((m.std_error() - sd / 2.0).abs() < 1e-15);
    }
}
