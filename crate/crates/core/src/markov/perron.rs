use crate::linalg::{dot, Matrix};
use crate::{Error, Result, Scalar};

/// Iteration cap for power iteration.
pub const MAX_POWER_ITERATIONS: usize = 1_000_000;

/// Perron root and vectors of a nonnegative irreducible matrix, normalised
/// so that `vᵀ1 = 1` and then `vᵀc = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronPair<T> {
    pub lambda: T,
    pub v: Vec<T>,
    pub c: Vec<T>,
}

/// Extra iterations allowed once the tolerance is met, while the iterates
/// still contract; they bring the vectors down to rounding level.
const POLISH_ITERATIONS: usize = 200;

/// Power iteration with max-norm normalisation, run once on `M` for the
/// right vector and once on `Mᵀ` for the left vector. The eigenvalue is the
/// Rayleigh quotient `vᵀMc / vᵀc`.
///
/// Fails with [`Error::NonConvergence`] when successive iterates still move
/// by more than `tol` after [`MAX_POWER_ITERATIONS`] steps, which happens for
/// periodic matrices or a `tol` below rounding level.
pub fn perron<T: Scalar>(m: &Matrix<T>, tol: T) -> Result<PerronPair<T>> {
    if !m.is_square() || m.rows() == 0 {
        return Err(Error::InvalidArgument("Perron solve needs a non-empty square matrix".into()));
    }
    if m.as_slice().iter().any(|x| *x < T::zero() || !x.is_finite()) {
        return Err(Error::InvalidArgument("Perron solve needs a finite nonnegative matrix".into()));
    }
    let c = power_iterate(|x| m.mul_vec(x), m.rows(), tol, "right Perron vector")?;
    let v = power_iterate(|x| m.vec_mul(x), m.rows(), tol, "left Perron vector")?;
    if c.iter().chain(&v).any(|x| *x <= T::zero()) {
        return Err(Error::InvalidArgument(
            "Perron vector has a non-positive component; matrix is reducible".into(),
        ));
    }
    let lambda = dot(&v, &m.mul_vec(&c)) / dot(&v, &c);

    let v_sum: T = v.iter().copied().sum();
    let v: Vec<T> = v.iter().map(|x| *x / v_sum).collect();
    let vc = dot(&v, &c);
    let c = c.iter().map(|x| *x / vc).collect();
    Ok(PerronPair { lambda, v, c })
}

fn power_iterate<T: Scalar>(
    apply: impl Fn(&[T]) -> Vec<T>,
    n: usize,
    tol: T,
    what: &'static str,
) -> Result<Vec<T>> {
    let mut x = vec![T::one(); n];
    let mut delta = T::infinity();
    let (mut polishing, mut extra) = (false, 0);
    for _ in 0..MAX_POWER_ITERATIONS {
        let mut y = apply(&x);
        let norm = y.iter().fold(T::zero(), |a, b| a.max(b.abs()));
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "{what}: iterate collapsed to zero (nilpotent or reducible matrix)"
            )));
        }
        for yi in y.iter_mut() {
            *yi /= norm;
        }
        let previous = delta;
        delta = crate::scalar::max_abs_diff(&x, &y);
        if polishing && !(delta < previous) {
            // stagnated at rounding level; keep the better iterate
            return Ok(x);
        }
        x = y;
        if delta < tol {
            polishing = true;
            extra += 1;
            if delta == T::zero() || extra > POLISH_ITERATIONS {
                return Ok(x);
            }
        }
    }
    if polishing {
        return Ok(x);
    }
    Err(Error::NonConvergence {
        what,
        iterations: MAX_POWER_ITERATIONS,
        last_delta: delta.to_f64_lossy(),
    })
}
