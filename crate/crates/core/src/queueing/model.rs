use crate::{Error, Result, Scalar};

use super::{ErrorDist, ServiceDist};

#[derive(Debug, Clone, PartialEq)]
pub enum Arrivals<T> {
    /// Exponential inter-arrival times with rate `lambda`.
    Poisson { lambda: T },
    /// Customer `n` arrives at clock time `n / lambda + ε_n`.
    Appointments { lambda: T, error: ErrorDist<T> },
}

impl<T: Scalar> Arrivals<T> {
    pub fn rate(&self) -> T {
        match self {
            Arrivals::Poisson { lambda } | Arrivals::Appointments { lambda, .. } => *lambda,
        }
    }

    /// `ln E e^{-θ T}` of the arrival-side factor entering the key equation:
    /// `ln(λ/(λ+θ))` for Poisson arrivals, `-θ/λ` for appointments (the
    /// error terms telescope out of `S_n`).
    pub fn log_factor(&self, theta: T) -> T {
        match self {
            Arrivals::Poisson { lambda } => (*lambda / (*lambda + theta)).ln(),
            Arrivals::Appointments { lambda, .. } => -theta / *lambda,
        }
    }
}

/// Single-server queue with independent i.i.d. service times.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueModel<T> {
    pub arrivals: Arrivals<T>,
    pub service: ServiceDist<T>,
}

impl<T: Scalar> QueueModel<T> {
    pub fn new(arrivals: Arrivals<T>, service: ServiceDist<T>) -> Result<Self> {
        let model = Self { arrivals, service };
        model.validate()?;
        Ok(model)
    }

    /// Parameter checks, ordered appointments, and stability
    /// `E T = 1/λ > E U`.
    pub fn validate(&self) -> Result<()> {
        self.service.validate()?;
        let lambda = self.arrivals.rate();
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidModel(vec![format!("arrival rate {lambda} must be positive")]));
        }
        if let Arrivals::Appointments { error, .. } = &self.arrivals {
            let a = error.half_width();
            if a < T::zero() || a >= T::lit(0.5) / lambda {
                return Err(Error::InvalidModel(vec![format!(
                    "appointment error half-width {a} must lie in [0, 1/(2 lambda))"
                )]));
            }
        }
        let mean_interarrival = lambda.recip();
        let mean_service = self.service.mean();
        if mean_service >= mean_interarrival {
            return Err(Error::Unstable {
                mean_service: mean_service.to_f64_lossy(),
                mean_interarrival: mean_interarrival.to_f64_lossy(),
            });
        }
        Ok(())
    }
}
