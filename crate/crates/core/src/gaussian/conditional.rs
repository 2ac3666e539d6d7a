//! Limiting conditional tilt of a Gaussian window.
//!
//! Conditioning the far increments `Y` on a window `X = x` gives
//! `E(e^{-θY} | X = x) = exp{-θ[ν + vᵀΣ⁻¹(x - μ1)] + ½θ²[τ² - vᵀΣ⁻¹v]}`.
//! As the outer range grows, `v` converges and the large terms of `ν` and
//! `τ²` cancel at the tilt θ, leaving `exp(αᵀx + β)`.
//!
//! The cancellation is carried out algebraically: with `L` far increments
//! on a side, `-θν + ½θ²τ²` is rewritten as `Lθ(θσ²(1+2R) - 2μ)` plus
//! correlation tails that stay bounded in `L`, so no large numbers are
//! subtracted.

use crate::linalg::{dot, Cholesky};
use crate::{defaults, Error, Result, Scalar};

use super::{gaussian_tilt, GaussianModel};

/// Window coefficients: on `(X_{-k}, …, X_k)` the limiting tilt density with
/// respect to the original law is `exp(-θ1ᵀx + αᵀx + β) / q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTiltCoeffs<T> {
    pub k: usize,
    pub theta: T,
    pub alpha: Vec<T>,
    pub beta: T,
    /// Truncation at which the doubling loop stopped.
    pub truncation: usize,
    pub last_delta: T,
}

/// Martingale `V_k = exp(γᵀ(X_1, …, X_k) + δ)`; `γ` includes the `-θ S_k`
/// part.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleCoeffs<T> {
    pub k: usize,
    pub theta: T,
    pub gamma: Vec<T>,
    pub delta: T,
    pub truncation: usize,
    pub last_delta: T,
}

impl<T: Scalar> MartingaleCoeffs<T> {
    /// `V_k` at the first `k` increments.
    pub fn value(&self, x: &[T]) -> Result<T> {
        crate::scalar::guarded_exp(self.log_value(x)?)
    }

    /// `log V_k = γᵀx + δ`.
    pub fn log_value(&self, x: &[T]) -> Result<T> {
        if x.len() < self.k {
            return Err(Error::InvalidArgument(format!(
                "martingale V_{} needs {} increments, got {}",
                self.k,
                self.k,
                x.len()
            )));
        }
        Ok(dot(&self.gamma, &x[..self.k]) + self.delta)
    }
}

/// `E exp(aᵀX + b)` for `X ~ N(μ1, Σ)` over `len = a.len()` consecutive
/// increments: `exp(aᵀμ1 + ½aᵀΣa + b)`.
pub fn gaussian_exponential_moment<T: Scalar>(model: &GaussianModel<T>, a: &[T], b: T) -> T {
    let cov = model.covariance_window(a.len());
    let mean_term: T = a.iter().copied().sum::<T>() * model.mean();
    (mean_term + T::lit(0.5) * dot(a, &cov.mul_vec(a)) + b).exp()
}

/// Mass of the limiting window density:
/// `E exp(-θ1ᵀX + αᵀX + β) / q`-numerator, which must equal `q`.
pub fn tilt_density_mass<T: Scalar>(model: &GaussianModel<T>, coeffs: &ConditionalTiltCoeffs<T>) -> T {
    let a: Vec<T> = coeffs.alpha.iter().map(|al| *al - coeffs.theta).collect();
    gaussian_exponential_moment(model, &a, coeffs.beta)
}

/// `E V_k`, which must equal `q` (total mass of the limit measure).
pub fn martingale_mass<T: Scalar>(model: &GaussianModel<T>, coeffs: &MartingaleCoeffs<T>) -> T {
    gaussian_exponential_moment(model, &coeffs.gamma, coeffs.delta)
}

struct WindowAlgebra<T> {
    /// `Σ⁻¹ v_∞`
    sinv_v: Vec<T>,
    /// `θ v_∞ᵀΣ⁻¹μ1 - ½θ² v_∞ᵀΣ⁻¹v_∞`
    constant: T,
}

fn window_algebra<T: Scalar>(model: &GaussianModel<T>, v_inf: &[T], theta: T) -> Result<WindowAlgebra<T>> {
    if v_inf.is_empty() {
        return Ok(WindowAlgebra {
            sinv_v: Vec::new(),
            constant: T::zero(),
        });
    }
    let chol = Cholesky::factor(&model.covariance_window(v_inf.len()))?;
    let sinv_v = chol.solve(v_inf);
    let mean_term = sinv_v.iter().copied().sum::<T>() * model.mean();
    let constant = theta * mean_term - T::lit(0.5) * theta * theta * dot(v_inf, &sinv_v);
    Ok(WindowAlgebra { sinv_v, constant })
}

/// Doubles the truncation from `start` until successive values differ by
/// less than the default delta.
fn doubling_limit<T: Scalar>(start: usize, eval: impl Fn(usize) -> T) -> Result<(T, usize, T)> {
    let mut m = start.max(1);
    let mut prev = eval(m);
    let mut delta = T::infinity();
    while m < defaults::TRUNCATION_CAP {
        let next_m = m * 2;
        let next = eval(next_m);
        delta = (next - prev).abs();
        m = next_m;
        prev = next;
        if delta < T::lit(defaults::TRUNCATION_DELTA) {
            return Ok((prev, m, delta));
        }
    }
    Err(Error::NonConvergence {
        what: "tilt coefficient truncation",
        iterations: m,
        last_delta: delta.to_f64_lossy(),
    })
}

/// `Σ_{a∈A} Σ_{b∈B} ρ_{b-a}` for two blocks of `len` consecutive indices
/// separated by a gap of `gap` indices.
fn block_cross_correlation<T: Scalar>(model: &GaussianModel<T>, len: usize, gap: usize) -> T {
    if len == 0 {
        return T::zero();
    }
    let first = gap + 1;
    let mut total = T::zero();
    for u in 0..2 * len - 1 {
        let lag = first + u;
        if model.max_lag().is_some_and(|l| lag > l) {
            break;
        }
        let count = (u + 1).min(2 * len - 1 - u);
        total += T::from_count(count) * model.rho(lag);
    }
    total
}

/// `(var S_L - Lσ²(1+2R)) / σ² = -2 Σ_{r<L} rρ_r - 2L Σ_{r≥L} ρ_r`.
fn bounded_variance_part<T: Scalar>(model: &GaussianModel<T>, len: usize) -> T {
    let two = T::lit(2.0);
    let tail = if len == 0 { T::zero() } else { model.tail_sum(len) };
    -two * model.weighted_head_sum(len) - two * T::from_count(len) * tail
}

fn check_window(k_len: usize) -> Result<()> {
    if k_len > defaults::MAX_WINDOW {
        return Err(Error::TooLarge(format!(
            "window of {k_len} increments exceeds {}",
            defaults::MAX_WINDOW
        )));
    }
    Ok(())
}

/// `α = -θΣ⁻¹v_∞` and the truncated limit `β` for the window
/// `X_{-k}, …, X_k`, doubling the outer range `m = n = M` from `start`.
pub fn conditional_tilt_coeffs<T: Scalar>(
    model: &GaussianModel<T>,
    k: usize,
    start: usize,
) -> Result<ConditionalTiltCoeffs<T>> {
    let width = 2 * k + 1;
    check_window(width)?;
    let tilt = gaussian_tilt(model)?;
    let theta = tilt.theta;
    let sigma2 = model.sigma2();
    let one_plus_two_r = T::one() + T::lit(2.0) * tilt.r_sum;

    // window position i = -k..=k ↦ index i + k
    let v_inf: Vec<T> = (0..width)
        .map(|idx| {
            let (up, down) = (idx + 1, width - idx);
            sigma2 * (model.tail_sum(up) + model.tail_sum(down))
        })
        .collect();
    let algebra = window_algebra(model, &v_inf, theta)?;
    let alpha = algebra.sinv_v.iter().map(|s| -theta * *s).collect();

    let half = T::lit(0.5);
    let linear_rate = theta * (theta * sigma2 * one_plus_two_r - T::lit(2.0) * model.mean());
    let beta_at = |m: usize| {
        let len = m.saturating_sub(k);
        let bounded = T::lit(2.0) * bounded_variance_part(model, len)
            + T::lit(2.0) * block_cross_correlation(model, len, width);
        T::from_count(len) * linear_rate + half * theta * theta * sigma2 * bounded + algebra.constant
    };
    let (beta, truncation, last_delta) = doubling_limit(start.max(k + 1), beta_at)?;
    Ok(ConditionalTiltCoeffs {
        k,
        theta,
        alpha,
        beta,
        truncation,
        last_delta,
    })
}

/// One-sided analogue: conditions `S_{k+1,n}` on `X_1, …, X_k` with
/// `n = M → ∞`.
pub fn martingale_coeffs<T: Scalar>(
    model: &GaussianModel<T>,
    k: usize,
    start: usize,
) -> Result<MartingaleCoeffs<T>> {
    check_window(k)?;
    let tilt = gaussian_tilt(model)?;
    let theta = tilt.theta;
    let sigma2 = model.sigma2();
    let one_plus_two_r = T::one() + T::lit(2.0) * tilt.r_sum;

    // position i = 1..=k ↦ index i - 1; Cov(S_{k+1,∞}, X_i) = σ² Σ_{r≥k+1-i} ρ_r
    let v_inf: Vec<T> = (1..=k).map(|i| sigma2 * model.tail_sum(k + 1 - i)).collect();
    let algebra = window_algebra(model, &v_inf, theta)?;
    let gamma = algebra.sinv_v.iter().map(|s| -theta - theta * *s).collect();

    let half = T::lit(0.5);
    let linear_rate = theta * (half * theta * sigma2 * one_plus_two_r - model.mean());
    let delta_at = |m: usize| {
        let len = m.saturating_sub(k);
        T::from_count(len) * linear_rate
            + half * theta * theta * sigma2 * bounded_variance_part(model, len)
            + algebra.constant
    };
    let (delta, truncation, last_delta) = doubling_limit(start.max(k + 1), delta_at)?;
    Ok(MartingaleCoeffs {
        k,
        theta,
        gamma,
        delta,
        truncation,
        last_delta,
    })
}
