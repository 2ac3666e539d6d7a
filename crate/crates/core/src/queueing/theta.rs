use crate::{Error, Result, Scalar};

use super::{Arrivals, ErrorDist, QueueModel, ServiceDist};

/// `θ = μ - λ` for the M/M/1 queue, where `λμ / ((λ+θ)(μ-θ)) = 1`.
pub fn mm1_theta<T: Scalar>(lambda: T, mu: T) -> Result<T> {
    if !(lambda > T::zero()) || !(mu > lambda) {
        return Err(Error::Unstable {
            mean_service: mu.recip().to_f64_lossy(),
            mean_interarrival: lambda.recip().to_f64_lossy(),
        });
    }
    Ok(mu - lambda)
}

/// `E(e^{-θ S_n}) = φ(-θ)ⁿ exp(-nθ/λ) ψ(θ) ψ(-θ)` for the appointments
/// system.
pub fn appointments_laplace_sn<T: Scalar>(
    service: &ServiceDist<T>,
    error: &ErrorDist<T>,
    lambda: T,
    theta: T,
    n: usize,
) -> Result<T> {
    let log_phi = service.log_mgf(theta);
    if !log_phi.is_finite() {
        return Err(Error::Domain {
            argument: (-theta).to_f64_lossy(),
        });
    }
    let exponent = T::from_count(n) * (log_phi - theta / lambda);
    let walk = crate::scalar::guarded_exp(exponent)?;
    Ok(walk * error.laplace(theta)? * error.laplace(-theta)?)
}

/// `g(θ) = φ(-θ) e^{-θ/λ} - 1`.
pub fn appointments_g<T: Scalar>(service: &ServiceDist<T>, lambda: T, theta: T) -> T {
    (service.log_mgf(theta) - theta / lambda).exp() - T::one()
}

/// `(μ/λ) exp(1 - μ/λ)`: the appointments function `g + 1` evaluated at the
/// random-arrivals tilt `θ = μ - λ`, for exponential service.
pub fn comparison_factor<T: Scalar>(lambda: T, mu: T) -> T {
    let ratio = mu / lambda;
    ratio * (T::one() - ratio).exp()
}

/// Positive root of `φ(-θ) e^{-θ/λ} = 1`. The error distribution of the
/// appointments does not enter.
pub fn appointments_theta<T: Scalar>(service: &ServiceDist<T>, lambda: T, tol: T) -> Result<T> {
    let arrivals = Arrivals::Appointments {
        lambda,
        error: ErrorDist::None,
    };
    key_parameter(&QueueModel::new(arrivals, service.clone())?, tol)
}

/// Positive root of `E(e^{-θX}) = 1` for increments `X = T - U`, i.e.
/// `ln φ(-θ) + ln A(θ) = 0` with the arrival factor `A` of
/// [`Arrivals::log_factor`].
///
/// The log transform `h` is convex with `h(0) = 0` and `h'(0) = EU - ET < 0`
/// under stability, so `h < 0` on `(0, θ*)` and `h > 0` beyond: bisection
/// from `[0, hi]` keeps the root bracketed. Fails unless `|g(θ*)| < tol`.
pub fn key_parameter<T: Scalar>(model: &QueueModel<T>, tol: T) -> Result<T> {
    model.validate()?;
    let h = |theta: T| model.service.log_mgf(theta) + model.arrivals.log_factor(theta);
    let sup = model.service.abscissa();

    let hi = if sup.is_finite() {
        let mut found = None;
        let mut gap = T::lit(0.5);
        for _ in 0..64 {
            let t = sup * (T::one() - gap);
            if h(t) > T::zero() {
                found = Some(t);
                break;
            }
            gap = gap / T::lit(2.0);
        }
        found
    } else {
        let mut t = model.arrivals.rate();
        let mut found = None;
        for _ in 0..64 {
            if h(t) > T::zero() {
                found = Some(t);
                break;
            }
            t = t + t;
        }
        found
    };
    let Some(mut hi) = hi else {
        return Err(Error::NoRoot {
            upper: sup.to_f64_lossy(),
        });
    };

    // bisect to full precision, then confirm the residual
    let mut lo = T::zero();
    for _ in 0..300 {
        if hi - lo <= T::lit(4.0) * T::epsilon() * hi {
            break;
        }
        let mid = lo + (hi - lo) / T::lit(2.0);
        if h(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = lo + (hi - lo) / T::lit(2.0);
    let residual = h(root).exp() - T::one();
    if residual.abs() >= tol {
        return Err(Error::NonConvergence {
            what: "key-parameter bisection",
            iterations: 300,
            last_delta: residual.to_f64_lossy(),
        });
    }
    Ok(root)
}
