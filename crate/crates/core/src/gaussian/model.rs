use crate::linalg::{symmetric_toeplitz, Matrix};
use crate::{Error, Result, Scalar};

/// Correlation structure `ρ_r = corr(X_n, X_{n+r})` of a stationary
/// Gaussian increment sequence. Every variant has `Σ r|ρ_r| < ∞`.
#[derive(Debug, Clone, PartialEq)]
pub enum Correlation<T> {
    Iid,
    /// `ρ_r = φ^r`, `|φ| < 1`.
    Ar1 { phi: T },
    /// Moving average with coefficients `b_1..b_q` (`b_0 = 1`).
    Ma { coeffs: Vec<T> },
    /// `ρ_1..ρ_L` listed explicitly, zero beyond `L`.
    Explicit { rho: Vec<T> },
}

/// Stationary Gaussian increments with mean `mu`, variance `sigma2` and the
/// given correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModel<T> {
    mu: T,
    sigma2: T,
    corr: Correlation<T>,
    associated: bool,
}

impl<T: Scalar> GaussianModel<T> {
    pub fn new(mu: T, sigma2: T, corr: Correlation<T>) -> Result<Self> {
        let mut problems = Vec::new();
        if !(mu > T::zero()) || !mu.is_finite() {
            problems.push(format!("mu = {mu} must be positive and finite"));
        }
        if !(sigma2 > T::zero()) || !sigma2.is_finite() {
            problems.push(format!("sigma2 = {sigma2} must be positive and finite"));
        }
        match &corr {
            Correlation::Iid => {}
            Correlation::Ar1 { phi } => {
                if !(phi.abs() < T::one()) {
                    problems.push(format!("AR(1) coefficient {phi} must satisfy |phi| < 1"));
                }
            }
            Correlation::Ma { coeffs } => {
                if coeffs.iter().any(|b| !b.is_finite()) {
                    problems.push("MA coefficients must be finite".into());
                }
            }
            Correlation::Explicit { rho } => {
                if rho.iter().any(|r| !r.is_finite() || r.abs() > T::one()) {
                    problems.push("explicit correlations must lie in [-1, 1]".into());
                }
            }
        }
        if problems.is_empty() {
            Ok(Self {
                mu,
                sigma2,
                corr,
                associated: false,
            })
        } else {
            Err(Error::InvalidModel(problems))
        }
    }

    /// Signed increment mean (negative for an associated model).
    pub fn mean(&self) -> T {
        self.mu
    }

    pub fn sigma2(&self) -> T {
        self.sigma2
    }

    pub fn correlation(&self) -> &Correlation<T> {
        &self.corr
    }

    pub fn is_associated(&self) -> bool {
        self.associated
    }

    /// Largest lag with a possibly nonzero correlation; `None` for AR(1).
    pub fn max_lag(&self) -> Option<usize> {
        match &self.corr {
            Correlation::Iid => Some(0),
            Correlation::Ar1 { .. } => None,
            Correlation::Ma { coeffs } => Some(coeffs.len()),
            Correlation::Explicit { rho } => Some(rho.len()),
        }
    }

    /// `ρ_r`; `ρ_0 = 1`.
    pub fn rho(&self, r: usize) -> T {
        if r == 0 {
            return T::one();
        }
        match &self.corr {
            Correlation::Iid => T::zero(),
            Correlation::Ar1 { phi } => phi.powi(r as i32),
            Correlation::Ma { coeffs } => {
                if r > coeffs.len() {
                    return T::zero();
                }
                let b = |i: usize| if i == 0 { T::one() } else { coeffs[i - 1] };
                let num: T = (0..=coeffs.len() - r).map(|i| b(i) * b(i + r)).sum();
                num / ma_energy(coeffs)
            }
            Correlation::Explicit { rho } => rho.get(r - 1).copied().unwrap_or(T::zero()),
        }
    }

    /// `Σ_{r ≥ a} ρ_r` for `a ≥ 1`.
    pub fn tail_sum(&self, a: usize) -> T {
        debug_assert!(a >= 1);
        match (&self.corr, self.max_lag()) {
            (Correlation::Ar1 { phi }, _) => phi.powi(a as i32) / (T::one() - *phi),
            (_, Some(lag)) => (a..=lag).map(|r| self.rho(r)).sum(),
            (_, None) => unreachable!("only AR(1) has unbounded lag"),
        }
    }

    /// `Σ_{r=1}^{L-1} r ρ_r`.
    pub(crate) fn weighted_head_sum(&self, len: usize) -> T {
        let upper = match self.max_lag() {
            Some(lag) => lag.min(len.saturating_sub(1)),
            None => len.saturating_sub(1),
        };
        (1..=upper).map(|r| T::from_count(r) * self.rho(r)).sum()
    }

    /// `(R, S) = (Σ ρ_r, Σ r ρ_r)`, closed form for AR(1), exact finite sums
    /// otherwise, without the degeneracy check.
    pub fn raw_correlation_sums(&self) -> (T, T) {
        match (&self.corr, self.max_lag()) {
            (Correlation::Ar1 { phi }, _) => {
                let one_minus = T::one() - *phi;
                (*phi / one_minus, *phi / (one_minus * one_minus))
            }
            (_, Some(lag)) => (1..=lag).fold((T::zero(), T::zero()), |(r, s), i| {
                let rho = self.rho(i);
                (r + rho, s + T::from_count(i) * rho)
            }),
            (_, None) => unreachable!("only AR(1) has unbounded lag"),
        }
    }

    /// `(R, S)`; rejects `1 + 2R ≤ ε`, where the partial sums have bounded
    /// variance and no tilt exists.
    pub fn correlation_sums(&self) -> Result<(T, T)> {
        let (r, s) = self.raw_correlation_sums();
        let one_plus_two_r = T::one() + T::lit(2.0) * r;
        if one_plus_two_r <= T::lit(crate::defaults::DEGENERACY_EPS) {
            return Err(Error::DegenerateCase {
                one_plus_two_r: one_plus_two_r.to_f64_lossy(),
            });
        }
        Ok((r, s))
    }

    /// Covariance matrix of `len` consecutive increments.
    pub fn covariance_window(&self, len: usize) -> Matrix<T> {
        let row: Vec<T> = (0..len).map(|r| self.sigma2 * self.rho(r)).collect();
        symmetric_toeplitz(&row)
    }

    /// Same covariance structure, mean negated; toggles the associated flag.
    pub fn with_negated_mean(&self) -> Self {
        Self {
            mu: -self.mu,
            sigma2: self.sigma2,
            corr: self.corr.clone(),
            associated: !self.associated,
        }
    }
}

/// `Σ_{i=0}^{q} b_i²` with `b_0 = 1`.
pub(crate) fn ma_energy<T: Scalar>(coeffs: &[T]) -> T {
    T::one() + coeffs.iter().map(|b| *b * *b).sum::<T>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(corr: Correlation<f64>) -> GaussianModel<f64> {
        GaussianModel::new(1.0, 1.0, corr).unwrap()
    }

    #[test]
    fn rho_examples() {
        assert_eq!(model(Correlation::Ar1 { phi: 0.5 }).rho(3), 0.125);
        let ma = model(Correlation::Ma { coeffs: vec![1.0] });
        assert_eq!(ma.rho(1), 0.5);
        assert_eq!(ma.rho(2), 0.0);
        assert_eq!(model(Correlation::Iid).rho(7), 0.0);
        let ex = model(Correlation::Explicit { rho: vec![0.3, -0.1] });
        assert_eq!(ex.rho(2), -0.1);
        assert_eq!(ex.rho(3), 0.0);
    }

    #[test]
    fn ma2_autocorrelation_matches_convolution() {
        // b = (1, 0.5, -0.3): gamma_0 = 1.34, gamma_1 = 0.5 - 0.15, gamma_2 = -0.3
        let m = model(Correlation::Ma { coeffs: vec![0.5, -0.3] });
        assert!((m.rho(1) - 0.35 / 1.34).abs() < 1e-15);
        assert!((m.rho(2) + 0.3 / 1.34).abs() < 1e-15);
    }

    #[test]
    fn correlation_sum_examples() {
        let (r, s) = model(Correlation::Ar1 { phi: 0.5 }).correlation_sums().unwrap();
        // geometric series oracle
        let (rr, ss) = (1..200).fold((0.0, 0.0), |(a, b), i| (a + 0.5f64.powi(i), b + i as f64 * 0.5f64.powi(i)));
        assert!((r - 1.0).abs() < 1e-15 && (r - rr).abs() < 1e-12);
        assert!((s - 2.0).abs() < 1e-15 && (s - ss).abs() < 1e-12);

        let degenerate = model(Correlation::Ma { coeffs: vec![-1.0] });
        assert!(matches!(
            degenerate.correlation_sums(),
            Err(Error::DegenerateCase { .. })
        ));
        assert_eq!(model(Correlation::Iid).correlation_sums().unwrap(), (0.0, 0.0));
        assert_eq!(
            model(Correlation::Ma { coeffs: vec![1.0] }).correlation_sums().unwrap(),
            (0.5, 0.5)
        );
    }

    #[test]
    fn tail_sums() {
        let ar = model(Correlation::Ar1 { phi: 0.5 });
        assert!((ar.tail_sum(1) - 1.0).abs() < 1e-15);
        assert!((ar.tail_sum(3) - 0.25).abs() < 1e-15);
        let ex = model(Correlation::Explicit { rho: vec![0.3, -0.1, 0.05] });
        assert!((ex.tail_sum(2) + 0.05).abs() < 1e-15);
        assert_eq!(ex.tail_sum(4), 0.0);
    }

    #[test]
    fn constructor_rejects_bad_parameters() {
        assert!(GaussianModel::new(-1.0, 1.0, Correlation::Iid).is_err());
        assert!(GaussianModel::new(1.0, 0.0, Correlation::Iid).is_err());
        assert!(GaussianModel::new(1.0, 1.0, Correlation::Ar1 { phi: 1.0 }).is_err());
        assert!(GaussianModel::new(1.0, 1.0, Correlation::Explicit { rho: vec![1.5] }).is_err());
    }
}
