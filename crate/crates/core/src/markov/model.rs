use std::fmt;

use rand::Rng;

use crate::linalg::Matrix;
use crate::mc::{stream_rng, IncrementSampler};
use crate::walk::IncrementPath;
use crate::{Error, Result, Scalar};

const ROW_SUM_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;

/// Finite stationary Markov chain whose states are the increment values
/// themselves.
///
/// `associated` marks a model produced by the exponential change of measure;
/// such a model drifts downward, and validation expects that sign instead.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel<T> {
    states: Vec<T>,
    p: Matrix<T>,
    pi: Vec<T>,
    associated: bool,
}

/// One violated model invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape(String),
    NonFinite,
    DuplicateState { value: f64 },
    NegativeEntry { row: usize, col: usize },
    RowSum { row: usize, sum: f64 },
    PiNotPositive { index: usize },
    PiNotNormalised { sum: f64 },
    NotStationary { residual: f64 },
    Reducible,
    Periodic { period: usize },
    Drift { drift: f64, associated: bool },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(s) => write!(f, "shape: {s}"),
            Violation::NonFinite => write!(f, "non-finite entry"),
            Violation::DuplicateState { value } => write!(f, "duplicate state value {value}"),
            Violation::NegativeEntry { row, col } => write!(f, "P[{row}][{col}] < 0"),
            Violation::RowSum { row, sum } => write!(f, "row {row} of P sums to {sum}, not 1"),
            Violation::PiNotPositive { index } => write!(f, "pi[{index}] is not strictly positive"),
            Violation::PiNotNormalised { sum } => write!(f, "pi sums to {sum}, not 1"),
            Violation::NotStationary { residual } => {
                write!(f, "pi is not stationary for P (max |pi P - pi| = {residual:e})")
            }
            Violation::Reducible => write!(f, "chain is reducible"),
            Violation::Periodic { period } => write!(f, "chain is periodic with period {period}"),
            Violation::Drift { drift, associated: false } => {
                write!(f, "drift {drift} is not positive (upward drift required)")
            }
            Violation::Drift { drift, associated: true } => {
                write!(f, "associated model drift {drift} is not negative")
            }
        }
    }
}

impl<T: Scalar> MarkovModel<T> {
    /// Builds a model without checking it; see [`MarkovModel::validate`].
    pub fn from_parts(states: Vec<T>, p: Matrix<T>, pi: Vec<T>, associated: bool) -> Self {
        Self {
            states,
            p,
            pi,
            associated,
        }
    }

    /// Builds and validates a model.
    pub fn new(states: Vec<T>, p: Matrix<T>, pi: Vec<T>) -> Result<Self> {
        Self::from_parts(states, p, pi, false).checked()
    }

    /// Builds a model whose equilibrium distribution is computed as the
    /// left Perron vector of `p`.
    pub fn with_stationary(states: Vec<T>, p: Matrix<T>, tol: T) -> Result<Self> {
        Self::with_stationary_flagged(states, p, tol, false)
    }

    /// [`MarkovModel::with_stationary`] with an explicit associated flag.
    pub fn with_stationary_flagged(states: Vec<T>, p: Matrix<T>, tol: T, associated: bool) -> Result<Self> {
        let provisional = Self::from_parts(states, p, Vec::new(), associated);
        let structural: Vec<_> = provisional
            .validate()
            .into_iter()
            .filter(|v| {
                !matches!(
                    v,
                    Violation::Shape(_)
                        | Violation::PiNotNormalised { .. }
                        | Violation::NotStationary { .. }
                        | Violation::Drift { .. }
                )
            })
            .collect();
        let n = provisional.states.len();
        if provisional.p.rows() != n || provisional.p.cols() != n {
            return Err(invalid(&[Violation::Shape(format!(
                "P is {}x{} but there are {n} states",
                provisional.p.rows(),
                provisional.p.cols()
            ))]));
        }
        if !structural.is_empty() {
            return Err(invalid(&structural));
        }
        let pi = super::perron(&provisional.p, tol)?.v;
        Self::from_parts(provisional.states, provisional.p, pi, associated).checked()
    }

    fn checked(self) -> Result<Self> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(invalid(&violations))
        }
    }

    pub fn states(&self) -> &[T] {
        &self.states
    }

    pub fn transition(&self) -> &Matrix<T> {
        &self.p
    }

    pub fn pi(&self) -> &[T] {
        &self.pi
    }

    pub fn is_associated(&self) -> bool {
        self.associated
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// `Σ_i π_i i`, the mean increment.
    pub fn drift(&self) -> T {
        self.pi.iter().zip(&self.states).map(|(p, s)| *p * *s).sum()
    }

    /// Position of the state with this exact value.
    pub fn index_of(&self, value: T) -> Result<usize> {
        self.states
            .iter()
            .position(|s| *s == value)
            .ok_or(Error::UnknownState(value.to_f64_lossy()))
    }

    /// Every violated invariant; empty for a valid model.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.states.len();
        let mut out = Vec::new();
        if n == 0 {
            out.push(Violation::Shape("no states".into()));
            return out;
        }
        if self.p.rows() != n || self.p.cols() != n {
            out.push(Violation::Shape(format!(
                "P is {}x{} but there are {n} states",
                self.p.rows(),
                self.p.cols()
            )));
            return out;
        }
        if self.pi.len() != n {
            out.push(Violation::Shape(format!("pi has {} entries, expected {n}", self.pi.len())));
        }
        let finite = self
            .states
            .iter()
            .chain(self.p.as_slice())
            .chain(&self.pi)
            .all(|x| x.is_finite());
        if !finite {
            out.push(Violation::NonFinite);
            return out;
        }
        for (i, s) in self.states.iter().enumerate() {
            if self.states[..i].contains(s) {
                out.push(Violation::DuplicateState {
                    value: s.to_f64_lossy(),
                });
            }
        }
        for i in 0..n {
            for j in 0..n {
                if self.p[(i, j)] < T::zero() {
                    out.push(Violation::NegativeEntry { row: i, col: j });
                }
            }
            let sum: T = self.p.row(i).iter().copied().sum();
            if (sum - T::one()).abs() > T::lit(ROW_SUM_TOL) {
                out.push(Violation::RowSum {
                    row: i,
                    sum: sum.to_f64_lossy(),
                });
            }
        }
        let reach = self.reachability();
        if !reach.irreducible {
            out.push(Violation::Reducible);
        } else if reach.period != 1 {
            out.push(Violation::Periodic {
                period: reach.period,
            });
        }
        if self.pi.len() == n {
            for (i, p) in self.pi.iter().enumerate() {
                if *p <= T::zero() {
                    out.push(Violation::PiNotPositive { index: i });
                }
            }
            let sum: T = self.pi.iter().copied().sum();
            if (sum - T::one()).abs() > T::lit(STATIONARY_TOL) {
                out.push(Violation::PiNotNormalised {
                    sum: sum.to_f64_lossy(),
                });
            }
            let pip = self.p.vec_mul(&self.pi);
            let residual = crate::scalar::max_abs_diff(&pip, &self.pi);
            if residual > T::lit(STATIONARY_TOL) {
                out.push(Violation::NotStationary {
                    residual: residual.to_f64_lossy(),
                });
            }
            let drift = self.drift();
            let wrong = if self.associated {
                drift >= T::zero()
            } else {
                drift <= T::zero()
            };
            if wrong {
                out.push(Violation::Drift {
                    drift: drift.to_f64_lossy(),
                    associated: self.associated,
                });
            }
        }
        out
    }

    /// Irreducibility by reachability from state 0 in the positive-entry
    /// digraph and its reverse; period as the gcd of `level(u) + 1 - level(v)`
    /// over edges, with BFS levels from state 0.
    fn reachability(&self) -> Reach {
        let n = self.states.len();
        let edge = |i: usize, j: usize| self.p[(i, j)] > T::zero();
        let search = |forward: bool| {
            let mut level = vec![usize::MAX; n];
            let mut queue = std::collections::VecDeque::from([0usize]);
            level[0] = 0;
            while let Some(u) = queue.pop_front() {
                for w in 0..n {
                    let e = if forward { edge(u, w) } else { edge(w, u) };
                    if e && level[w] == usize::MAX {
                        level[w] = level[u] + 1;
                        queue.push_back(w);
                    }
                }
            }
            level
        };
        let fwd = search(true);
        let irreducible =
            fwd.iter().all(|l| *l != usize::MAX) && search(false).iter().all(|l| *l != usize::MAX);
        let mut period = 0usize;
        if irreducible {
            for u in 0..n {
                for w in 0..n {
                    if edge(u, w) {
                        let diff = (fwd[u] + 1).abs_diff(fwd[w]);
                        period = gcd(period, diff);
                    }
                }
            }
        }
        Reach {
            irreducible,
            period,
        }
    }

    /// Draws state indices of a stationary path of length `n`.
    pub fn sample_indices(&self, seed: u64, stream: u64, n: usize) -> Vec<usize> {
        let mut rng = stream_rng(seed, stream);
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return out;
        }
        let mut current = draw(&self.pi, rng.random::<f64>());
        out.push(current);
        for _ in 1..n {
            current = draw(self.p.row(current), rng.random::<f64>());
            out.push(current);
        }
        out
    }
}

impl<T: Scalar> IncrementSampler<T> for MarkovModel<T> {
    fn sample_path(&self, seed: u64, stream: u64, n: usize) -> Result<IncrementPath<T>> {
        let values = self
            .sample_indices(seed, stream, n)
            .into_iter()
            .map(|i| self.states[i])
            .collect();
        Ok(IncrementPath::from_one(values))
    }
}

struct Reach {
    irreducible: bool,
    period: usize,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Inverse-CDF draw from a probability row.
fn draw<T: Scalar>(probs: &[T], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p.to_f64_lossy();
        if u < acc {
            return i;
        }
    }
    // rounding left u above the final cumulative sum: take the last positive entry
    probs
        .iter()
        .rposition(|p| *p > T::zero())
        .unwrap_or(probs.len() - 1)
}

fn invalid(violations: &[Violation]) -> Error {
    Error::InvalidModel(violations.iter().map(ToString::to_string).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(pi: Vec<f64>) -> MarkovModel<f64> {
        let p = Matrix::from_rows(&[vec![0.8, 0.2], vec![0.6, 0.4]]).unwrap();
        MarkovModel::from_parts(vec![1.0, -1.0], p, pi, false)
    }

    #[test]
    fn benchmark_chain_is_valid() {
        assert!(two_state(vec![0.75, 0.25]).validate().is_empty());
    }

    #[test]
    fn identity_is_reducible() {
        let p = Matrix::identity(2);
        let m = MarkovModel::from_parts(vec![1.0, -1.0], p, vec![0.75, 0.25], false);
        assert!(m.validate().contains(&Violation::Reducible));
    }

    #[test]
    fn wrong_pi_is_not_stationary() {
        let v = two_state(vec![0.25, 0.75]).validate();
        assert!(v.iter().any(|x| matches!(x, Violation::NotStationary { .. })), "{v:?}");
    }

    #[test]
    fn periodic_chain_detected() {
        let p = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let m = MarkovModel::from_parts(vec![2.0, -1.0], p, vec![0.5, 0.5], false);
        assert_eq!(m.validate(), vec![Violation::Periodic { period: 2 }]);
        // a self-loop breaks the period
        let p = Matrix::from_rows(&[vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let m = MarkovModel::from_parts(vec![2.0, -1.0], p, vec![2.0 / 3.0, 1.0 / 3.0], false);
        assert!(m.validate().is_empty());
    }

    #[test]
    fn duplicate_states_and_drift() {
        let p = Matrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let m = MarkovModel::from_parts(vec![1.0, 1.0], p.clone(), vec![0.5, 0.5], false);
        assert!(m.validate().contains(&Violation::DuplicateState { value: 1.0 }));
        let m = MarkovModel::from_parts(vec![-1.0, 0.5], p.clone(), vec![0.5, 0.5], false);
        assert!(matches!(m.validate()[..], [Violation::Drift { associated: false, .. }]));
        let m = MarkovModel::from_parts(vec![-1.0, 0.5], p, vec![0.5, 0.5], true);
        assert!(m.validate().is_empty());
    }

    #[test]
    fn shape_and_row_sum_violations() {
        let p = Matrix::from_rows(&[vec![0.9, 0.2], vec![0.6, 0.4]]).unwrap();
        let m = MarkovModel::from_parts(vec![1.0, -1.0], p, vec![0.75, 0.25], false);
        assert!(m.validate().iter().any(|v| matches!(v, Violation::RowSum { row: 0, .. })));
        let m = MarkovModel::from_parts(vec![1.0], Matrix::identity(2), vec![1.0], false);
        assert!(matches!(m.validate()[..], [Violation::Shape(_)]));
    }

    #[test]
    fn stationary_distribution_computed_when_absent() {
        let p = Matrix::from_rows(&[vec![0.8, 0.2], vec![0.6, 0.4]]).unwrap();
        let m = MarkovModel::with_stationary(vec![1.0f64, -1.0], p, 1e-13).unwrap();
        assert!((m.pi()[0] - 0.75).abs() < 1e-12);
        assert!((m.pi()[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sampler_matches_stationary_law() {
        let m = two_state(vec![0.75, 0.25]);
        let n = 200_000;
        let idx = m.sample_indices(5, 0, n);
        let frac_a = idx.iter().filter(|&&i| i == 0).count() as f64 / n as f64;
        // autocorrelation of the chain (lambda_2 = 0.2) inflates the variance by (1+0.2)/(1-0.2)
        let sd = (0.75 * 0.25 * 1.5 / n as f64).sqrt();
        assert!((frac_a - 0.75).abs() < 5.0 * sd, "{frac_a}");
        assert_eq!(idx, m.sample_indices(5, 0, n));
    }

    #[test]
    fn unknown_state_lookup() {
        let m = two_state(vec![0.75, 0.25]);
        assert_eq!(m.index_of(-1.0).unwrap(), 1);
        assert_eq!(m.index_of(0.5).unwrap_err(), Error::UnknownState(0.5));
    }
}
