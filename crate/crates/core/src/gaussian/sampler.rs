use rand_distr::{Distribution, StandardNormal};

use crate::linalg::Cholesky;
use crate::mc::{stream_rng, IncrementSampler};
use crate::walk::IncrementPath;
use crate::{defaults, Error, Result, Scalar};

use super::{model::ma_energy, Correlation, GaussianModel};

/// Stationary path sampler. AR(1) and MA use O(n) recursions; explicit
/// correlation lists factor the Toeplitz covariance once, up to `max_len`.
#[derive(Debug, Clone)]
pub struct GaussianSampler<T> {
    model: GaussianModel<T>,
    max_len: usize,
    factor: Option<Cholesky<T>>,
}

impl<T: Scalar> GaussianSampler<T> {
    pub fn new(model: &GaussianModel<T>, max_len: usize) -> Result<Self> {
        let factor = match model.correlation() {
            Correlation::Explicit { .. } => {
                if max_len > defaults::EXPLICIT_SAMPLE_CAP {
                    return Err(Error::TooLarge(format!(
                        "explicit-correlation paths are capped at {} increments, asked for {max_len}",
                        defaults::EXPLICIT_SAMPLE_CAP
                    )));
                }
                Some(Cholesky::factor(&model.covariance_window(max_len))?)
            }
            _ => None,
        };
        Ok(Self {
            model: model.clone(),
            max_len,
            factor,
        })
    }

    pub fn model(&self) -> &GaussianModel<T> {
        &self.model
    }
}

impl<T: Scalar> IncrementSampler<T> for GaussianSampler<T> {
    fn sample_path(&self, seed: u64, stream: u64, n: usize) -> Result<IncrementPath<T>> {
        if n == 0 {
            return Err(Error::InvalidArgument("path length must be at least 1".into()));
        }
        let mut rng = stream_rng(seed, stream);
        let mut normal = || T::lit(StandardNormal.sample(&mut rng));
        let mu = self.model.mean();
        let sigma = self.model.sigma2().sqrt();
        let values = match self.model.correlation() {
            Correlation::Iid => (0..n).map(|_| mu + sigma * normal()).collect(),
            Correlation::Ar1 { phi } => {
                let innovation = sigma * (T::one() - *phi * *phi).sqrt();
                let mut dev = sigma * normal();
                let mut out = Vec::with_capacity(n);
                out.push(mu + dev);
                for _ in 1..n {
                    dev = *phi * dev + innovation * normal();
                    out.push(mu + dev);
                }
                out
            }
            Correlation::Ma { coeffs } => {
                let scale = (self.model.sigma2() / ma_energy(coeffs)).sqrt();
                let q = coeffs.len();
                // q warm-up innovations precede X_1
                let z: Vec<T> = (0..n + q).map(|_| scale * normal()).collect();
                (0..n)
                    .map(|t| {
                        let now = t + q;
                        let lagged: T = coeffs.iter().enumerate().map(|(j, b)| *b * z[now - j - 1]).sum();
                        mu + z[now] + lagged
                    })
                    .collect()
            }
            Correlation::Explicit { .. } => {
                if n > self.max_len {
                    return Err(Error::TooLarge(format!(
                        "sampler was factored for {} increments, asked for {n}",
                        self.max_len
                    )));
                }
                let factor = self.factor.as_ref().expect("explicit sampler is factored");
                let z: Vec<T> = (0..n).map(|_| normal()).collect();
                factor.lower_mul_prefix(&z).into_iter().map(|x| mu + x).collect()
            }
        };
        Ok(IncrementPath::from_one(values))
    }
}
