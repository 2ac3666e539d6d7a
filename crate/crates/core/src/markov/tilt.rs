use crate::linalg::{dot, Matrix};
use crate::scalar::{guarded_exp, max_abs_diff};
use crate::walk::{partial_sums, IncrementPath};
use crate::{Error, Result, Scalar};

use super::{perron, MarkovModel};

/// Tolerances and search range for [`solve_theta`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions<T> {
    /// Power-iteration tolerance.
    pub eigen_tol: T,
    /// Root tolerance on `|λ(θ) - 1|`.
    pub root_tol: T,
    /// Largest `|θ|` searched.
    pub theta_cap: T,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            eigen_tol: T::lit(crate::defaults::EIGEN_TOL),
            root_tol: T::lit(crate::defaults::MARKOV_ROOT_TOL),
            theta_cap: T::lit(crate::defaults::THETA_CAP),
        }
    }
}

/// θ with the Perron data of `Q(θ)`: `vᵀ1 = 1`, `vᵀc = 1`, `q = πᵀc`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltSolution<T> {
    pub theta: T,
    pub v: Vec<T>,
    pub c: Vec<T>,
    pub q: T,
}

/// `Q_ij = p_ij exp(-θ j)` where `j` is the increment value of state `j`.
pub fn tilt_matrix<T: Scalar>(model: &MarkovModel<T>, theta: T) -> Result<Matrix<T>> {
    let weights = state_weights(model, theta)?;
    let p = model.transition();
    Ok(Matrix::from_fn(p.rows(), p.cols(), |i, j| p[(i, j)] * weights[j]))
}

fn state_weights<T: Scalar>(model: &MarkovModel<T>, theta: T) -> Result<Vec<T>> {
    model
        .states()
        .iter()
        .map(|s| guarded_exp(-theta * *s))
        .collect()
}

/// `λ(θ)`, the Perron root of the tilted matrix.
pub fn perron_eigenvalue<T: Scalar>(model: &MarkovModel<T>, theta: T, eigen_tol: T) -> Result<T> {
    Ok(perron(&tilt_matrix(model, theta)?, eigen_tol)?.lambda)
}

/// The unique nonzero θ with `λ(θ) = 1`.
///
/// λ is log-convex with `λ(0) = 1` and `λ'(0) = -drift`, so for an upward
/// drifting model the root is positive: the search doubles θ from
/// `root_tol` until `λ(θ) > 1`, bisects to full precision and requires
/// `|λ(θ) - 1| < root_tol` at the result. Associated models drift
/// downward and are searched on the negative axis the same way.
pub fn solve_theta<T: Scalar>(model: &MarkovModel<T>, opts: &SolveOptions<T>) -> Result<T> {
    let violations = model.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidModel(violations.iter().map(ToString::to_string).collect()));
    }
    let sign = if model.is_associated() { -T::one() } else { T::one() };
    let lambda = |t: T| perron_eigenvalue(model, sign * t, opts.eigen_tol);

    // λ(t) ≥ 1 before the first λ < 1 is rounding noise next to t = 0
    let mut lo = None;
    let mut t = opts.root_tol;
    let hi = loop {
        if t > opts.theta_cap {
            return Err(Error::NoTilt {
                cap: opts.theta_cap.to_f64_lossy(),
            });
        }
        let l = lambda(t)?;
        if l < T::one() {
            lo = Some(t);
        } else if lo.is_some() {
            if l == T::one() {
                return Ok(sign * t);
            }
            break t;
        }
        let next = t + t;
        t = if next > opts.theta_cap && t < opts.theta_cap {
            opts.theta_cap
        } else {
            next
        };
    };
    let mut lo = lo.expect("bracket has a lower end");
    let mut hi = hi;
    for _ in 0..200 {
        if hi - lo <= T::lit(4.0) * T::epsilon() * hi {
            break;
        }
        let mid = lo + (hi - lo) / T::lit(2.0);
        if lambda(mid)? < T::one() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = lo + (hi - lo) / T::lit(2.0);
    let residual = lambda(root)? - T::one();
    if residual.abs() >= opts.root_tol {
        return Err(Error::NonConvergence {
            what: "theta bisection",
            iterations: 200,
            last_delta: residual.to_f64_lossy(),
        });
    }
    Ok(sign * root)
}

/// Perron data of `Q(θ)` at a given θ (not necessarily the root).
pub fn tilt_at<T: Scalar>(model: &MarkovModel<T>, theta: T, eigen_tol: T) -> Result<(T, TiltSolution<T>)> {
    let pair = perron(&tilt_matrix(model, theta)?, eigen_tol)?;
    let q = dot(model.pi(), &pair.c);
    Ok((
        pair.lambda,
        TiltSolution {
            theta,
            v: pair.v,
            c: pair.c,
            q,
        },
    ))
}

/// Solves θ and the Perron vectors at θ.
pub fn solve_tilt<T: Scalar>(model: &MarkovModel<T>, opts: &SolveOptions<T>) -> Result<TiltSolution<T>> {
    let theta = solve_theta(model, opts)?;
    Ok(tilt_at(model, theta, opts.eigen_tol)?.1)
}

/// `q = πᵀc · vᵀ1 = πᵀc` under the normalisation `vᵀ1 = 1`.
pub fn q_value<T: Scalar>(model: &MarkovModel<T>, tilt: &TiltSolution<T>) -> T {
    dot(model.pi(), &tilt.c) * tilt.v.iter().copied().sum()
}

/// Exact `E(exp(-θ S_n)) = πᵀ Qⁿ 1`.
pub fn exact_laplace<T: Scalar>(model: &MarkovModel<T>, theta: T, n: usize) -> Result<T> {
    let q = tilt_matrix(model, theta)?;
    let mut w = vec![T::one(); model.n_states()];
    for _ in 0..n {
        w = q.mul_vec(&w);
    }
    Ok(dot(model.pi(), &w))
}

/// `log πᵀ Qⁿ 1`, rescaling each step so that long horizons neither
/// overflow nor underflow.
pub fn log_exact_laplace<T: Scalar>(model: &MarkovModel<T>, theta: T, n: usize) -> Result<T> {
    let q = tilt_matrix(model, theta)?;
    let mut w = vec![T::one(); model.n_states()];
    let mut log_scale = T::zero();
    for _ in 0..n {
        w = q.mul_vec(&w);
        let norm = w.iter().fold(T::zero(), |a, b| a.max(*b));
        if !(norm > T::zero()) {
            return Ok(T::neg_infinity());
        }
        for x in w.iter_mut() {
            *x /= norm;
        }
        log_scale += norm.ln();
    }
    Ok(log_scale + dot(model.pi(), &w).ln())
}

/// The associated chain: `p*_ij = p_ij e^{-θj} c_j / c_i`, `π*_i = c_i v_i`.
pub fn associated<T: Scalar>(model: &MarkovModel<T>, tilt: &TiltSolution<T>) -> Result<MarkovModel<T>> {
    let q = tilt_matrix(model, tilt.theta)?;
    let c = &tilt.c;
    let p_star = Matrix::from_fn(q.rows(), q.cols(), |i, j| q[(i, j)] * c[j] / c[i]);
    let pi_star = c.iter().zip(&tilt.v).map(|(ci, vi)| *ci * *vi).collect();
    Ok(MarkovModel::from_parts(
        model.states().to_vec(),
        p_star,
        pi_star,
        !model.is_associated(),
    ))
}

fn indices<T: Scalar>(model: &MarkovModel<T>, states: &[T]) -> Result<Vec<usize>> {
    states.iter().map(|s| model.index_of(*s)).collect()
}

/// `P*(X_{-k} = i_{-k}, …, X_k = i_k) = π*_{i_{-k}} Π p*`, from the cylinder's
/// state values in time order.
pub fn cylinder_pstar<T: Scalar>(model: &MarkovModel<T>, tilt: &TiltSolution<T>, states: &[T]) -> Result<T> {
    cylinder_pstar_indices(model, tilt, &indices(model, states)?)
}

/// Exact `E(exp(-θ S_{-m,n}); X_{-k} = i_{-k}, …, X_k = i_k)` as the product
/// of three factors: the tilted probability of the window itself, the
/// forward factor `(Q^{n-k} 1)_{i_k}`, and the backward factor
/// `(μᵀ Q^{m-k})_{i_{-k}} / μ_{i_{-k}}` with `μ_i = π_i e^{-θi}` (the
/// reversed chain run through the tilted matrix).
pub fn exact_tilted_cylinder<T: Scalar>(
    model: &MarkovModel<T>,
    theta: T,
    m: usize,
    n: usize,
    k: usize,
    states: &[T],
) -> Result<T> {
    let cylinders = TiltedCylinders::new(model, theta, m, n, k)?;
    cylinders.value(&indices(model, states)?)
}

/// The forward and backward factors of [`exact_tilted_cylinder`] for one
/// `(θ, m, n, k)`, shared by every cylinder of that width.
#[derive(Debug, Clone)]
pub struct TiltedCylinders<'a, T> {
    model: &'a MarkovModel<T>,
    k: usize,
    weights: Vec<T>,
    forward: Vec<T>,
    backward_ratio: Vec<T>,
}

impl<'a, T: Scalar> TiltedCylinders<'a, T> {
    pub fn new(model: &'a MarkovModel<T>, theta: T, m: usize, n: usize, k: usize) -> Result<Self> {
        if m <= k || n <= k {
            return Err(Error::InvalidArgument(format!(
                "need m, n > k (got m = {m}, n = {n}, k = {k})"
            )));
        }
        let q = tilt_matrix(model, theta)?;
        let weights = state_weights(model, theta)?;

        let mut forward = vec![T::one(); model.n_states()];
        for _ in 0..n - k {
            forward = q.mul_vec(&forward);
        }

        let mu: Vec<T> = model.pi().iter().zip(&weights).map(|(a, b)| *a * *b).collect();
        let mut backward = mu.clone();
        for _ in 0..m - k {
            backward = q.vec_mul(&backward);
        }
        let backward_ratio = backward.iter().zip(&mu).map(|(b, u)| *b / *u).collect();
        Ok(Self {
            model,
            k,
            weights,
            forward,
            backward_ratio,
        })
    }

    /// Value for a window given by state indices in time order.
    pub fn value(&self, idx: &[usize]) -> Result<T> {
        if idx.len() != 2 * self.k + 1 {
            return Err(Error::InvalidArgument(format!(
                "cylinder needs {} states, got {}",
                2 * self.k + 1,
                idx.len()
            )));
        }
        let p = self.model.transition();
        let (first, last) = (idx[0], idx[2 * self.k]);
        let mut window = self.model.pi()[first] * self.weights[first];
        for w in idx.windows(2) {
            window *= p[(w[0], w[1])] * self.weights[w[1]];
        }
        Ok(window * self.forward[last] * self.backward_ratio[first])
    }
}

/// [`cylinder_pstar`] from state indices.
pub fn cylinder_pstar_indices<T: Scalar>(model: &MarkovModel<T>, tilt: &TiltSolution<T>, idx: &[usize]) -> Result<T> {
    let Some(&first) = idx.first() else {
        return Ok(T::one());
    };
    let weights = state_weights(model, tilt.theta)?;
    let c = &tilt.c;
    let p = model.transition();
    let mut prob = c[first] * tilt.v[first];
    for w in idx.windows(2) {
        let (i, j) = (w[0], w[1]);
        prob *= p[(i, j)] * weights[j] * c[j] / c[i];
    }
    Ok(prob)
}

/// Exact two-sided `E(exp(-θ S_{-m,n})) = πᵀ Q^{m+n+1} 1` (stationarity).
pub fn exact_two_sided_laplace<T: Scalar>(model: &MarkovModel<T>, theta: T, m: usize, n: usize) -> Result<T> {
    exact_laplace(model, theta, m + n + 1)
}

/// `V_k = c_{X_k} exp(-θ S_k)` for `k = 1..=n` along a path starting at
/// index 1.
pub fn martingale_path<T: Scalar>(
    model: &MarkovModel<T>,
    tilt: &TiltSolution<T>,
    path: &IncrementPath<T>,
) -> Result<Vec<T>> {
    if path.start_index() != 1 {
        return Err(Error::InvalidArgument("martingale paths start at index 1".into()));
    }
    let idx = indices(model, path.values())?;
    let sums = partial_sums(path);
    idx.iter()
        .zip(&sums.as_slice()[1..])
        .map(|(&i, s)| Ok(tilt.c[i] * guarded_exp(-tilt.theta * *s)?))
        .collect()
}

/// `Σ_j p_ij e^{-θj} c_j - c_i = (Qc)_i - c_i`, zero exactly when
/// `E(V_{k+1} | X_k = i) = V_k`.
pub fn one_step_martingale_identity<T: Scalar>(
    model: &MarkovModel<T>,
    tilt: &TiltSolution<T>,
    state: T,
) -> Result<T> {
    let i = model.index_of(state)?;
    let weights = state_weights(model, tilt.theta)?;
    let p = model.transition();
    let qc: T = (0..model.n_states())
        .map(|j| p[(i, j)] * weights[j] * tilt.c[j])
        .sum();
    Ok(qc - tilt.c[i])
}

/// Result of tilting the associated chain back with `-θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Duality<T> {
    pub reconstructed: MarkovModel<T>,
    /// Perron root of `Q*_ij = p*_ij e^{θj}`; 1 when duality holds.
    pub dual_eigenvalue: T,
    /// Max-norm distance of `(P**, π**)` to `(P, π)`.
    pub max_abs_error: T,
}

pub fn duality_roundtrip<T: Scalar>(
    model: &MarkovModel<T>,
    tilt: &TiltSolution<T>,
    eigen_tol: T,
) -> Result<Duality<T>> {
    let assoc = associated(model, tilt)?;
    let (dual_eigenvalue, back_tilt) = tilt_at(&assoc, -tilt.theta, eigen_tol)?;
    let reconstructed = associated(&assoc, &back_tilt)?;
    let err_p = reconstructed.transition().max_abs_diff(model.transition());
    let err_pi = max_abs_diff(reconstructed.pi(), model.pi());
    Ok(Duality {
        reconstructed,
        dual_eigenvalue,
        max_abs_error: err_p.max(err_pi),
    })
}
