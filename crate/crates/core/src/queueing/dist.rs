use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};

use crate::mc::{mc_estimate, stream_rng, MCEstimate};
use crate::{Error, Result, Scalar};

/// Service-time law together with its Laplace transform `φ(θ) = E e^{-θU}`.
#[derive(Debug, Clone, PartialEq)]
pub enum ServiceDist<T> {
    Exponential { mu: T },
    Deterministic { d: T },
    Erlang { shape: u32, rate: T },
    Uniform { lo: T, hi: T },
}

impl<T: Scalar> ServiceDist<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            ServiceDist::Exponential { mu } => *mu > T::zero() && mu.is_finite(),
            ServiceDist::Deterministic { d } => *d > T::zero() && d.is_finite(),
            ServiceDist::Erlang { shape, rate } => *shape >= 1 && *rate > T::zero() && rate.is_finite(),
            ServiceDist::Uniform { lo, hi } => *lo >= T::zero() && hi > lo && hi.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidModel(vec![format!("invalid service distribution {self:?}")]))
        }
    }

    pub fn mean(&self) -> T {
        match self {
            ServiceDist::Exponential { mu } => mu.recip(),
            ServiceDist::Deterministic { d } => *d,
            ServiceDist::Erlang { shape, rate } => T::lit(f64::from(*shape)) / *rate,
            ServiceDist::Uniform { lo, hi } => (*lo + *hi) / T::lit(2.0),
        }
    }

    /// Supremum of `θ` with `φ(-θ) = E e^{θU}` finite.
    pub fn abscissa(&self) -> T {
        match self {
            ServiceDist::Exponential { mu } => *mu,
            ServiceDist::Erlang { rate, .. } => *rate,
            ServiceDist::Deterministic { .. } | ServiceDist::Uniform { .. } => T::infinity(),
        }
    }

    /// `ln E e^{θU}`; `+∞` at or beyond the abscissa.
    pub fn log_mgf(&self, theta: T) -> T {
        if theta >= self.abscissa() {
            return T::infinity();
        }
        match self {
            ServiceDist::Exponential { mu } => (*mu / (*mu - theta)).ln(),
            ServiceDist::Erlang { shape, rate } => T::lit(f64::from(*shape)) * (*rate / (*rate - theta)).ln(),
            ServiceDist::Deterministic { d } => theta * *d,
            ServiceDist::Uniform { lo, hi } => {
                // ln((e^w - 1)/w), written to stay finite for large |w|
                let w = theta * (*hi - *lo);
                if w == T::zero() {
                    theta * *lo
                } else if w > T::zero() {
                    theta * *hi + (-(-w).exp_m1() / w).ln()
                } else {
                    theta * *lo + (w.exp_m1() / w).ln()
                }
            }
        }
    }

    /// `φ(θ) = E e^{-θU}`.
    pub fn laplace(&self, theta: T) -> Result<T> {
        let l = self.log_mgf(-theta);
        if !l.is_finite() {
            return Err(Error::Domain {
                argument: theta.to_f64_lossy(),
            });
        }
        crate::scalar::guarded_exp(l)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> T {
        let x = match self {
            ServiceDist::Exponential { mu } => Exp::new(mu.to_f64_lossy()).expect("rate checked").sample(rng),
            ServiceDist::Deterministic { d } => d.to_f64_lossy(),
            ServiceDist::Erlang { shape, rate } => Gamma::new(f64::from(*shape), 1.0 / rate.to_f64_lossy())
                .expect("parameters checked")
                .sample(rng),
            ServiceDist::Uniform { lo, hi } => {
                let (lo, hi) = (lo.to_f64_lossy(), hi.to_f64_lossy());
                lo + (hi - lo) * rng.random::<f64>()
            }
        };
        T::lit(x)
    }
}

/// Appointment error law with `ψ(θ) = E e^{-θε}`; all are symmetric with
/// support `[-a, a]`.
#[derive(Debug, Clone, PartialEq)]
pub enum ErrorDist<T> {
    None,
    Uniform { a: T },
    /// Sum of two independent `Uniform(-a/2, a/2)`.
    Triangular { a: T },
}

impl<T: Scalar> ErrorDist<T> {
    pub fn half_width(&self) -> T {
        match self {
            ErrorDist::None => T::zero(),
            ErrorDist::Uniform { a } | ErrorDist::Triangular { a } => *a,
        }
    }

    pub fn laplace(&self, theta: T) -> Result<T> {
        let sinhc = |x: T| if x == T::zero() { T::one() } else { x.sinh() / x };
        let v = match self {
            ErrorDist::None => T::one(),
            ErrorDist::Uniform { a } => sinhc(*a * theta),
            ErrorDist::Triangular { a } => {
                let s = sinhc(*a * theta / T::lit(2.0));
                s * s
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain {
                argument: theta.to_f64_lossy(),
            })
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> T {
        let a = self.half_width().to_f64_lossy();
        let x = match self {
            ErrorDist::None => 0.0,
            ErrorDist::Uniform { .. } => a * (2.0 * rng.random::<f64>() - 1.0),
            ErrorDist::Triangular { .. } => a * (rng.random::<f64>() + rng.random::<f64>() - 1.0),
        };
        T::lit(x)
    }
}

/// Monte Carlo check of `φ` against the sampler: `E e^{-θU}` at each θ.
pub fn spot_check_service_laplace<T: Scalar>(
    dist: &ServiceDist<T>,
    thetas: &[T],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<(T, MCEstimate<T>, T)>> {
    thetas
        .iter()
        .map(|&theta| {
            let exact = dist.laplace(theta)?;
            let est = mc_estimate(n_samples, seed, |stream| {
                let mut rng = stream_rng(seed, stream);
                Ok((-theta * dist.sample(&mut rng)).exp())
            })?;
            Ok((theta, est, exact))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplace_transforms_match_sampler() {
        let dists = [
            ServiceDist::Exponential { mu: 2.0 },
            ServiceDist::Deterministic { d: 0.4 },
            ServiceDist::Erlang { shape: 3, rate: 5.0 },
            ServiceDist::Uniform { lo: 0.1, hi: 0.7 },
        ];
        for d in &dists {
            let checks = spot_check_service_laplace(d, &[-0.5, 0.5, 2.0], 50_000, 17).unwrap();
            for (theta, est, exact) in checks {
                assert!(est.within(exact, 4.0), "{d:?} at {theta}: {est:?} vs {exact}");
            }
        }
    }

    #[test]
    fn error_laplace_matches_sampler() {
        for e in [ErrorDist::Uniform { a: 0.3f64 }, ErrorDist::Triangular { a: 0.4 }] {
            for theta in [-2.0, 1.0, 3.0] {
                let exact = e.laplace(theta).unwrap();
                let est = mc_estimate(50_000, 4, |s| Ok((-theta * e.sample(&mut stream_rng(4, s))).exp())).unwrap();
                assert!(est.within(exact, 4.0), "{e:?} {theta}");
            }
        }
        assert_eq!(ErrorDist::<f64>::None.laplace(5.0).unwrap(), 1.0);
    }

    #[test]
    fn exponential_mgf_domain() {
        let d = ServiceDist::Exponential { mu: 2.0f64 };
        assert!((d.laplace(-1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(d.laplace(-2.0), Err(Error::Domain { .. })));
        assert_eq!(d.abscissa(), 2.0);
        assert!(ServiceDist::Deterministic { d: 1.0f64 }.abscissa().is_infinite());
    }

    #[test]
    fn invalid_parameters() {
        assert!(ServiceDist::Exponential { mu: 0.0 }.validate().is_err());
        assert!(ServiceDist::Uniform { lo: 0.5, hi: 0.5 }.validate().is_err());
        assert!(ServiceDist::Erlang { shape: 0, rate: 1.0 }.validate().is_err());
    }
}
