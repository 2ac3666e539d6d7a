//! Seeded random streams and the plain Monte Carlo engine.
//!
//! Every stochastic result is a function of `(seed, stream_id)` only. Sample
//! `i` of an estimate always draws from stream `i`, and per-sample values are
//! reduced sequentially in stream order, so results do not depend on how
//! many threads evaluated the samples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::walk::{partial_sums, tilted_weight, IncrementPath};
use crate::{Error, Result, Scalar};

/// Independent ChaCha8 stream `stream` of the generator keyed by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A model that can draw stationary increment paths `X_1, …, X_n`.
pub trait IncrementSampler<T: Scalar>: Sync {
    fn sample_path(&self, seed: u64, stream: u64, n: usize) -> Result<IncrementPath<T>>;
}

/// Mean, standard error and provenance of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate<T> {
    pub mean: T,
    pub stderr: T,
    pub n_samples: usize,
    pub seed: u64,
}

impl<T: Scalar> MCEstimate<T> {
    /// Summarises samples in the given order (two-pass variance).
    pub fn from_samples(samples: &[T], seed: u64) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::InvalidArgument(
                "a Monte Carlo estimate needs at least 2 samples".into(),
            ));
        }
        let nf = T::from_count(n);
        let mean = samples.iter().copied().sum::<T>() / nf;
        let ss: T = samples.iter().map(|x| (*x - mean) * (*x - mean)).sum();
        let var = ss / T::from_count(n - 1);
        Ok(Self {
            mean,
            stderr: (var / nf).sqrt(),
            n_samples: n,
            seed,
        })
    }

    /// `|mean - target| <= z * stderr`, plus the rounding error of summing
    /// `n_samples` terms so that zero-variance samples still compare.
    pub fn within(&self, target: T, z: T) -> bool {
        let rounding = T::from_count(self.n_samples) * T::epsilon() * self.mean.abs().max(target.abs());
        (self.mean - target).abs() <= z * self.stderr + rounding
    }
}

/// `f(stream)` for streams `0..n` in parallel, collected in stream order.
pub fn map_streams<R, F>(n: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(u64) -> Result<R> + Sync,
{
    (0..n as u64).into_par_iter().map(&f).collect()
}

/// Evaluates `sample(stream)` for streams `0..n_samples` in parallel and
/// reduces in stream order.
pub fn mc_estimate<T, F>(n_samples: usize, seed: u64, sample: F) -> Result<MCEstimate<T>>
where
    T: Scalar,
    F: Fn(u64) -> Result<T> + Sync,
{
    if n_samples < 2 {
        return Err(Error::InvalidArgument("n_samples must be at least 2".into()));
    }
    let values = map_streams(n_samples, sample)?;
    MCEstimate::from_samples(&values, seed)
}

/// Event restricting an expectation; cylinder events are coordinate
/// conditions on the whole sampled path.
pub enum Event<'a, T> {
    All,
    Path(&'a (dyn Fn(&IncrementPath<T>) -> bool + Sync)),
}

impl<T> Event<'_, T> {
    fn contains(&self, path: &IncrementPath<T>) -> bool {
        match self {
            Event::All => true,
            Event::Path(pred) => pred(path),
        }
    }
}

/// Monte Carlo estimate of `E(exp(-θ S_n); B)`.
pub fn mc_tilted_expectation<T, S>(
    sampler: &S,
    theta: T,
    n: usize,
    event: &Event<'_, T>,
    n_samples: usize,
    seed: u64,
) -> Result<MCEstimate<T>>
where
    T: Scalar,
    S: IncrementSampler<T> + ?Sized,
{
    mc_estimate(n_samples, seed, |stream| {
        let path = sampler.sample_path(seed, stream, n)?;
        if !event.contains(&path) {
            return Ok(T::zero());
        }
        tilted_weight(&partial_sums(&path), theta)
    })
}
