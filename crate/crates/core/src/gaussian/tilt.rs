use crate::scalar::guarded_exp;
use crate::{Error, Result, Scalar};

use super::GaussianModel;

/// θ, the correlation sums and the limit constant of a Gaussian model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTilt<T> {
    pub theta: T,
    /// `R = Σ ρ_r`
    pub r_sum: T,
    /// `S = Σ r ρ_r`
    pub s_sum: T,
    pub q: T,
}

/// `θ = 2μ / (σ²(1 + 2R))` and `q = exp(-4μ²S / (σ²(1 + 2R)²))`: the only θ
/// for which the linear-in-n part of `log E(e^{-θ S_n})` vanishes.
pub fn gaussian_tilt<T: Scalar>(model: &GaussianModel<T>) -> Result<GaussianTilt<T>> {
    let (r_sum, s_sum) = model.correlation_sums()?;
    let two = T::lit(2.0);
    let scale = T::one() + two * r_sum;
    let (mu, sigma2) = (model.mean(), model.sigma2());
    let theta = two * mu / (sigma2 * scale);
    let q = (-T::lit(4.0) * mu * mu * s_sum / (sigma2 * scale * scale)).exp();
    Ok(GaussianTilt {
        theta,
        r_sum,
        s_sum,
        q,
    })
}

/// `var S_n = σ²[n + 2 Σ_{r=1}^{n-1} (n - r) ρ_r]`.
pub fn var_sn_exact<T: Scalar>(model: &GaussianModel<T>, n: usize) -> T {
    let upper = match model.max_lag() {
        Some(lag) => lag.min(n.saturating_sub(1)),
        None => n.saturating_sub(1),
    };
    let cross: T = (1..=upper)
        .map(|r| T::from_count(n - r) * model.rho(r))
        .sum();
    model.sigma2() * (T::from_count(n) + T::lit(2.0) * cross)
}

/// `log E(e^{-θ S_n}) = -nμθ + ½ var(S_n) θ²`.
pub fn log_laplace_sn_exact<T: Scalar>(model: &GaussianModel<T>, theta: T, n: usize) -> T {
    -T::from_count(n) * model.mean() * theta + T::lit(0.5) * var_sn_exact(model, n) * theta * theta
}

/// `E(e^{-θ S_n})` from the normal Laplace transform, with the overflow
/// guard.
pub fn laplace_sn_exact<T: Scalar>(model: &GaussianModel<T>, theta: T, n: usize) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    guarded_exp(log_laplace_sn_exact(model, theta, n))
}

/// Same covariance, drift `-μ`.
pub fn associated_model<T: Scalar>(model: &GaussianModel<T>) -> GaussianModel<T> {
    model.with_negated_mean()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::Correlation;

    fn ar1() -> GaussianModel<f64> {
        GaussianModel::new(1.0, 1.0, Correlation::Ar1 { phi: 0.5 }).unwrap()
    }

    #[test]
    fn tilt_examples() {
        let iid = GaussianModel::new(1.0, 1.0, Correlation::Iid).unwrap();
        let t = gaussian_tilt(&iid).unwrap();
        assert_eq!((t.theta, t.q), (2.0, 1.0));

        let t = gaussian_tilt(&ar1()).unwrap();
        assert!((t.theta - 2.0 / 3.0).abs() < 1e-15);
        assert!((t.q - (-8.0f64 / 9.0).exp()).abs() < 1e-15);

        let ma = GaussianModel::new(1.0f64, 1.0, Correlation::Ma { coeffs: vec![1.0] }).unwrap();
        let t = gaussian_tilt(&ma).unwrap();
        assert!((t.theta - 1.0).abs() < 1e-15);
        assert!((t.q - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn variance_examples() {
        let iid = GaussianModel::new(1.0, 1.0, Correlation::Iid).unwrap();
        assert_eq!(var_sn_exact(&iid, 10), 10.0);
        assert_eq!(var_sn_exact(&ar1(), 2), 3.0);
        // σ²(n(1 + 2R) - 2S) with R = 1, S = 2
        let n = 200;
        assert!((var_sn_exact(&ar1(), n) - (3.0 * n as f64 - 4.0)).abs() < 1e-8);
    }

    #[test]
    fn variance_matches_covariance_matrix_sum() {
        let m = GaussianModel::new(0.4, 2.0, Correlation::Explicit { rho: vec![0.4, 0.1, -0.05] }).unwrap();
        for n in [1, 2, 5, 9] {
            let c = m.covariance_window(n);
            let total: f64 = c.as_slice().iter().sum();
            assert!((var_sn_exact(&m, n) - total).abs() < 1e-12);
        }
    }

    #[test]
    fn laplace_examples() {
        let iid = GaussianModel::new(1.0, 1.0, Correlation::Iid).unwrap();
        for n in [1, 7, 100] {
            assert_eq!(laplace_sn_exact(&iid, 2.0, n).unwrap(), 1.0);
            assert_eq!(laplace_sn_exact(&iid, 0.0, n).unwrap(), 1.0);
        }
        let t = gaussian_tilt(&ar1()).unwrap();
        let v = laplace_sn_exact(&ar1(), t.theta, 100).unwrap();
        assert!((v - t.q).abs() < 1e-6);
        assert!(matches!(
            laplace_sn_exact(&iid, 10.0, 100),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn linear_part_vanishes_at_theta() {
        let m = ar1();
        let t = gaussian_tilt(&m).unwrap();
        let d = log_laplace_sn_exact(&m, t.theta, 200) - log_laplace_sn_exact(&m, t.theta, 199);
        assert!(d.abs() < 1e-8);
        let ma = GaussianModel::new(1.0f64, 1.0, Correlation::Ma { coeffs: vec![0.6, 0.2] }).unwrap();
        let t = gaussian_tilt(&ma).unwrap();
        let a = log_laplace_sn_exact(&ma, t.theta, 50);
        let b = log_laplace_sn_exact(&ma, t.theta, 49);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn association_is_a_sign_flip() {
        let m = ar1();
        let a = associated_model(&m);
        assert_eq!(a.mean(), -1.0);
        assert_eq!(a.correlation(), m.correlation());
        assert!(a.is_associated());
        assert_eq!(associated_model(&a), m);
        let t = gaussian_tilt(&m).unwrap();
        let ta = gaussian_tilt(&a).unwrap();
        assert_eq!(ta.theta, -t.theta);
        assert_eq!(ta.q, t.q);
    }
}
