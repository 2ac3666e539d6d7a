//! Diagnostics for the tilt assumptions: convergence of `E(e^{-θ S_n})`,
//! the `φ ≠ θ` dichotomy, the martingale property, and convergence of the
//! two-sided cylinder ratios for finite Markov chains.
//!
//! Convergence is judged by successive differences on a (typically
//! doubling) n-grid, and the dichotomy by monotone trends on that grid.

use crate::gaussian::{gaussian_tilt, log_laplace_sn_exact, martingale_coeffs, GaussianModel, GaussianSampler, MartingaleCoeffs};
use crate::markov::{self, cylinder_pstar_indices, MarkovModel, TiltSolution, TiltedCylinders};
use crate::mc::{map_streams, mc_tilted_expectation, Event, IncrementSampler, MCEstimate};
use crate::walk::IncrementPath;
use crate::{defaults, Error, Result, Scalar};

/// A model with a tilt parameter, an exact Laplace evaluator, a sampler
/// and a martingale.
pub trait TiltTarget<T: Scalar>: Sync {
    /// The model's own tilt parameter.
    fn theta(&self) -> T;
    /// Exact `log E(e^{-θ S_n})`.
    fn log_laplace(&self, theta: T, n: usize) -> Result<T>;
    fn sampler(&self) -> &dyn IncrementSampler<T>;
    /// `V_1, …, V_len` along a path starting at index 1.
    fn martingale(&self, path: &IncrementPath<T>) -> Result<Vec<T>>;

    /// One sample from stream `stream` of an unbiased estimator of
    /// `E(V_{k+1} - V_k)` for each `k = 1..=k_max`. By default the plain
    /// differences along one path.
    fn martingale_differences(&self, seed: u64, stream: u64, k_max: usize) -> Result<Vec<T>> {
        let path = self.sampler().sample_path(seed, stream, k_max + 1)?;
        let v = self.martingale(&path)?;
        Ok(v.windows(2).map(|w| w[1] - w[0]).collect())
    }
}

pub struct MarkovTarget<T> {
    pub model: MarkovModel<T>,
    pub tilt: TiltSolution<T>,
}

impl<T: Scalar> TiltTarget<T> for MarkovTarget<T> {
    fn theta(&self) -> T {
        self.tilt.theta
    }

    fn log_laplace(&self, theta: T, n: usize) -> Result<T> {
        markov::log_exact_laplace(&self.model, theta, n)
    }

    fn sampler(&self) -> &dyn IncrementSampler<T> {
        &self.model
    }

    fn martingale(&self, path: &IncrementPath<T>) -> Result<Vec<T>> {
        markov::martingale_path(&self.model, &self.tilt, path)
    }
}

pub struct GaussianTarget<T> {
    model: GaussianModel<T>,
    theta: T,
    sampler: GaussianSampler<T>,
    q: T,
    /// coefficients of `V_1, …, V_K`
    martingales: Vec<MartingaleCoeffs<T>>,
    /// `Σγ` for each `V_k`: the mean shift of `X_1..X_k` under the law with
    /// density `V_k / q`
    shifts: Vec<Vec<T>>,
}

impl<T: Scalar> GaussianTarget<T> {
    /// `max_len` bounds sampled path lengths; martingales are prepared for
    /// `V_1..=V_{martingale_len}`.
    pub fn new(model: &GaussianModel<T>, max_len: usize, martingale_len: usize) -> Result<Self> {
        let tilt = gaussian_tilt(model)?;
        let sampler = GaussianSampler::new(model, max_len.max(martingale_len))?;
        let martingales: Vec<MartingaleCoeffs<T>> = (1..=martingale_len)
            .map(|k| martingale_coeffs(model, k, defaults::TRUNCATION_START))
            .collect::<Result<_>>()?;
        let shifts = martingales
            .iter()
            .map(|c| model.covariance_window(c.k).mul_vec(&c.gamma))
            .collect();
        Ok(Self {
            model: model.clone(),
            theta: tilt.theta,
            sampler,
            q: tilt.q,
            martingales,
            shifts,
        })
    }

    pub fn model(&self) -> &GaussianModel<T> {
        &self.model
    }
}

impl<T: Scalar> TiltTarget<T> for GaussianTarget<T> {
    fn theta(&self) -> T {
        self.theta
    }

    fn log_laplace(&self, theta: T, n: usize) -> Result<T> {
        Ok(log_laplace_sn_exact(&self.model, theta, n))
    }

    fn sampler(&self) -> &dyn IncrementSampler<T> {
        &self.sampler
    }

    fn martingale(&self, path: &IncrementPath<T>) -> Result<Vec<T>> {
        if path.len() > self.martingales.len() {
            return Err(Error::InvalidArgument(format!(
                "martingale prepared up to V_{}, path has {} increments",
                self.martingales.len(),
                path.len()
            )));
        }
        self.martingales[..path.len()]
            .iter()
            .map(|c| c.value(path.values()))
            .collect()
    }

    /// `V_k` is lognormal with a log-variance growing linearly in `k`, so
    /// plain differences are too heavy-tailed for a trustworthy stderr.
    /// Instead `X_1..X_{k+1}` is drawn from the law with density
    /// `V_{k+1}/q` (a Gaussian mean shift by `Σγ`), under which
    /// `q(1 - V_k/V_{k+1})` has mean `E(V_{k+1} - V_k)` and a
    /// log-variance of order `θ²σ²`.
    fn martingale_differences(&self, seed: u64, stream: u64, k_max: usize) -> Result<Vec<T>> {
        if k_max + 1 > self.martingales.len() {
            return Err(Error::InvalidArgument(format!(
                "martingale prepared up to V_{}, need V_{}",
                self.martingales.len(),
                k_max + 1
            )));
        }
        let base = self.sampler.sample_path(seed, stream, k_max + 1)?;
        (1..=k_max)
            .map(|k| {
                let x: Vec<T> = base.values()[..=k]
                    .iter()
                    .zip(&self.shifts[k])
                    .map(|(a, b)| *a + *b)
                    .collect();
                let log_ratio = self.martingales[k - 1].log_value(&x)? - self.martingales[k].log_value(&x)?;
                Ok(self.q * (T::one() - crate::scalar::guarded_exp(log_ratio)?))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow<T> {
    pub n: usize,
    pub value: T,
    /// Present in Monte Carlo mode.
    pub stderr: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport<T> {
    pub theta: T,
    pub rows: Vec<ConvergenceRow<T>>,
    pub converged: bool,
    /// `|value(n_last) - value(n_prev)|`
    pub final_delta: T,
    /// Value at the largest n.
    pub q_hat: T,
}

/// Tabulates `E(e^{-θ S_n})` over `n_grid`. Exact mode is converged when the
/// last two values differ by less than `tol`; Monte Carlo mode when they
/// differ by less than the sum of their 3-stderr half-widths.
pub fn assumption1_scan<T: Scalar>(
    target: &dyn TiltTarget<T>,
    theta: T,
    n_grid: &[usize],
    mode: ScanMode,
    tol: T,
) -> Result<ConvergenceReport<T>> {
    if n_grid.len() < 2 {
        return Err(Error::InvalidArgument("n grid needs at least two points".into()));
    }
    let rows = n_grid
        .iter()
        .map(|&n| match mode {
            ScanMode::Exact => Ok(ConvergenceRow {
                n,
                value: target.log_laplace(theta, n)?.exp(),
                stderr: None,
            }),
            ScanMode::MonteCarlo { samples, seed } => {
                let est = mc_tilted_expectation(target.sampler(), theta, n, &Event::All, samples, seed)?;
                Ok(ConvergenceRow {
                    n,
                    value: est.mean,
                    stderr: Some(est.stderr),
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let (prev, last) = (&rows[rows.len() - 2], &rows[rows.len() - 1]);
    let final_delta = (last.value - prev.value).abs();
    let converged = match (prev.stderr, last.stderr) {
        (Some(a), Some(b)) => final_delta <= T::lit(3.0) * (a + b),
        _ => final_delta < tol,
    };
    Ok(ConvergenceReport {
        theta,
        q_hat: last.value,
        rows,
        converged,
        final_delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Decreasing,
    Flat,
    Increasing,
    Mixed,
}

impl Trend {
    /// The trend the dichotomy predicts for `φ = factor · θ`.
    pub fn expected_for(factor: f64) -> Self {
        if factor < 1.0 {
            Trend::Decreasing
        } else if factor > 1.0 {
            Trend::Increasing
        } else {
            Trend::Flat
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Trend::Decreasing => "decreasing",
            Trend::Flat => "flat",
            Trend::Increasing => "increasing",
            Trend::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub factor: T,
    pub phi: T,
    pub n_grid: Vec<usize>,
    pub log_values: Vec<T>,
    /// `|value(n_last) - value(n_prev)|`
    pub final_delta: T,
    pub trend: Trend,
}

/// For each `φ = factor · θ*`, classifies the exact sequence
/// `E(e^{-φ S_n})` over `n_grid`: flat when the last step changes the
/// value by less than `flat_tol`, otherwise by the signs of the steps (in
/// log space, so divergent sequences stay representable).
pub fn phi_sweep<T: Scalar>(
    target: &dyn TiltTarget<T>,
    theta_star: T,
    factors: &[T],
    n_grid: &[usize],
    flat_tol: T,
) -> Result<Vec<SweepRow<T>>> {
    if n_grid.len() < 2 {
        return Err(Error::InvalidArgument("n grid needs at least two points".into()));
    }
    factors
        .iter()
        .map(|&factor| {
            let phi = factor * theta_star;
            let log_values = n_grid
                .iter()
                .map(|&n| target.log_laplace(phi, n))
                .collect::<Result<Vec<T>>>()?;
            let l = log_values.len();
            let final_delta = (log_values[l - 1].exp() - log_values[l - 2].exp()).abs();
            let steps: Vec<T> = log_values.windows(2).map(|w| w[1] - w[0]).collect();
            let trend = if final_delta < flat_tol && (log_values[l - 1] - log_values[l - 2]).abs() < flat_tol {
                Trend::Flat
            } else if steps.iter().all(|s| *s < T::zero()) {
                Trend::Decreasing
            } else if steps.iter().all(|s| *s > T::zero()) {
                Trend::Increasing
            } else {
                Trend::Mixed
            };
            Ok(SweepRow {
                factor,
                phi,
                n_grid: n_grid.to_vec(),
                log_values,
                final_delta,
                trend,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleResidual<T> {
    pub k: usize,
    /// Estimate of `E(V_{k+1} - V_k)`.
    pub estimate: MCEstimate<T>,
    pub passed: bool,
}

/// Estimates `E(V_{k+1} - V_k)` for `k = 1..=k_max` from `n_samples`
/// streams (see [`TiltTarget::martingale_differences`]); each must lie
/// within 4 stderr of zero.
pub fn martingale_mc_test<T: Scalar>(
    target: &dyn TiltTarget<T>,
    k_max: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<MartingaleResidual<T>>> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let samples = map_streams(n_samples, |stream| target.martingale_differences(seed, stream, k_max))?;
    let z = T::lit(defaults::MARTINGALE_Z);
    (1..=k_max)
        .map(|k| {
            let diffs: Vec<T> = samples.iter().map(|d| d[k - 1]).collect();
            let estimate = MCEstimate::from_samples(&diffs, seed)?;
            Ok(MartingaleResidual {
                k,
                passed: estimate.within(T::zero(), z),
                estimate,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderRow<T> {
    pub m: usize,
    pub n: usize,
    /// `max |E(e^{-θS_{-m,n}}; B) / E(e^{-θS_{-m,n}}) - P*(B)|` over all
    /// `(2k+1)`-cylinders `B`.
    pub max_error: T,
    /// Sum of the ratios over all cylinders (a partition: 1).
    pub ratio_sum: T,
}

/// Cylinder-ratio errors along `mn_grid`, exact matrix algebra only.
pub fn assumption2_convergence<T: Scalar>(
    model: &MarkovModel<T>,
    tilt: &TiltSolution<T>,
    k: usize,
    mn_grid: &[(usize, usize)],
) -> Result<Vec<CylinderRow<T>>> {
    let s = model.n_states();
    let width = 2 * k + 1;
    let count = u32::try_from(width)
        .ok()
        .and_then(|w| s.checked_pow(w))
        .filter(|c| *c <= defaults::CYLINDER_CAP)
        .ok_or_else(|| {
            Error::TooLarge(format!(
                "{s}^{width} cylinders exceed the cap of {}",
                defaults::CYLINDER_CAP
            ))
        })?;
    let cylinders: Vec<Vec<usize>> = (0..count)
        .map(|mut code| {
            (0..width)
                .map(|_| {
                    let i = code % s;
                    code /= s;
                    i
                })
                .collect()
        })
        .collect();
    let pstar = cylinders
        .iter()
        .map(|c| cylinder_pstar_indices(model, tilt, c))
        .collect::<Result<Vec<T>>>()?;

    mn_grid
        .iter()
        .map(|&(m, n)| {
            let factors = TiltedCylinders::new(model, tilt.theta, m, n, k)?;
            let denom = markov::exact_two_sided_laplace(model, tilt.theta, m, n)?;
            let mut max_error = T::zero();
            let mut ratio_sum = T::zero();
            for (c, p) in cylinders.iter().zip(&pstar) {
                let ratio = factors.value(c)? / denom;
                ratio_sum += ratio;
                max_error = max_error.max((ratio - *p).abs());
            }
            Ok(CylinderRow {
                m,
                n,
                max_error,
                ratio_sum,
            })
        })
        .collect()
}

/// Errors non-increasing along the grid (increases below `floor` are
/// rounding) and the last one below `final_tol`.
pub fn cylinder_errors_decreasing<T: Scalar>(rows: &[CylinderRow<T>], floor: T, final_tol: T) -> bool {
    let monotone = rows
        .windows(2)
        .all(|w| w[1].max_error <= w[0].max_error || w[1].max_error < floor);
    monotone && rows.last().is_some_and(|r| r.max_error < final_tol)
}
