use crate::{defaults, Error, Result, Scalar};

use super::WaitingSample;

/// Least-squares fit of the log empirical survival function.
#[derive(Debug, Clone, PartialEq)]
pub struct TailFit<T> {
    /// Negated slope: the estimated exponential decay rate.
    pub theta_hat: T,
    /// Slope standard error from the regression residuals.
    pub stderr: T,
    pub n_positive: usize,
    /// Regression points `(x, log survival)`.
    pub points: Vec<(T, T)>,
}

/// Decay rate of the waiting-time tail from the strictly positive waits,
/// regressing `log P̂(W > x | W > 0)` on `x` between the `lower_q` and
/// `upper_q` quantiles of the positive waits.
pub fn tail_decay_estimate<T: Scalar>(sample: &WaitingSample<T>, lower_q: T, upper_q: T) -> Result<TailFit<T>> {
    tail_decay_from_values(&sample.waits, lower_q, upper_q)
}

/// As [`tail_decay_estimate`], from raw nonnegative values.
pub fn tail_decay_from_values<T: Scalar>(values: &[T], lower_q: T, upper_q: T) -> Result<TailFit<T>> {
    if !(T::zero() < lower_q && lower_q < upper_q && upper_q < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < lower_q < upper_q < 1 (got {lower_q}, {upper_q})"
        )));
    }
    let mut positive: Vec<T> = values.iter().copied().filter(|w| *w > T::zero()).collect();
    let n = positive.len();
    if n < defaults::MIN_POSITIVE_WAITS {
        return Err(Error::InsufficientTailMass {
            positive: n,
            required: defaults::MIN_POSITIVE_WAITS,
        });
    }
    positive.sort_by(|a, b| a.partial_cmp(b).expect("waits are finite"));

    let nf = T::from_count(n);
    let first = (lower_q * nf).floor().to_usize().unwrap_or(0);
    let last = ((upper_q * nf).ceil().to_usize().unwrap_or(n)).min(n - 1);
    // survival just below the i-th order statistic: (n - i) / n
    let points: Vec<(T, T)> = (first..=last)
        .map(|i| (positive[i], (T::from_count(n - i) / nf).ln()))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientTailMass {
            positive: n,
            required: defaults::MIN_POSITIVE_WAITS,
        });
    }

    let m = T::from_count(points.len());
    let mean_x = points.iter().map(|p| p.0).sum::<T>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<T>() / m;
    let sxx: T = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: T = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if !(sxx > T::zero()) {
        return Err(Error::InsufficientTailMass {
            positive: n,
            required: defaults::MIN_POSITIVE_WAITS,
        });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: T = points
        .iter()
        .map(|p| {
            let r = p.1 - intercept - slope * p.0;
            r * r
        })
        .sum();
    let stderr = (sse / (m - T::lit(2.0)) / sxx).sqrt();
    Ok(TailFit {
        theta_hat: -slope,
        stderr,
        n_positive: n,
        points,
    })
}

/// Batch-means standard error of the decay rate: the spread of the fits on
/// `batches` contiguous blocks of `values`, over `√batches`. Unlike the
/// regression stderr it accounts for the strong dependence between
/// neighbouring survival points and successive waits.
pub fn tail_decay_batch_stderr<T: Scalar>(values: &[T], lower_q: T, upper_q: T, batches: usize) -> Result<T> {
    if batches < 2 {
        return Err(Error::InvalidArgument("batch means need at least 2 batches".into()));
    }
    let size = values.len() / batches;
    let fits = (0..batches)
        .map(|b| tail_decay_from_values(&values[b * size..(b + 1) * size], lower_q, upper_q).map(|f| f.theta_hat))
        .collect::<Result<Vec<T>>>()?;
    Ok(crate::mc::MCEstimate::from_samples(&fits, 0)?.stderr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::stream_rng;
    use rand_distr::{Distribution, Exp};

    #[test]
    fn exponential_synthetic_tail() {
        let mut rng = stream_rng(123, 0);
        let exp = Exp::new(3.0).unwrap();
        let data: Vec<f64> = (0..200_000).map(|_| exp.sample(&mut rng)).collect();
        let fit = tail_decay_from_values(&data, 0.90, 0.999).unwrap();
        assert!((2.9..=3.1).contains(&fit.theta_hat), "{}", fit.theta_hat);
        assert!(fit.stderr > 0.0);
        let se = tail_decay_batch_stderr(&data, 0.90, 0.999, 10).unwrap();
        assert!(se > 0.0 && se < 0.1, "{se}");
        assert!(tail_decay_batch_stderr(&data, 0.90, 0.999, 1).is_err());
    }

    #[test]
    fn needs_tail_mass_and_valid_window() {
        let few = vec![1.0; 100];
        assert!(matches!(
            tail_decay_from_values(&few, 0.9, 0.999),
            Err(Error::InsufficientTailMass { positive: 100, .. })
        ));
        let zeros = vec![0.0; 50_000];
        assert!(matches!(
            tail_decay_from_values(&zeros, 0.9, 0.999),
            Err(Error::InsufficientTailMass { positive: 0, .. })
        ));
        assert!(tail_decay_from_values(&few, 0.9, 0.8).is_err());
    }
}
