//! Increment paths, partial sums and the exponential tilt weight.

use crate::scalar::guarded_exp;
use crate::{Error, Result, Scalar};

/// A finite stretch `X_start, …, X_end` of a (doubly infinite) increment
/// sequence. The start index may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementPath<T> {
    start_index: i64,
    values: Vec<T>,
}

impl<T: Scalar> IncrementPath<T> {
    pub fn new(start_index: i64, values: Vec<T>) -> Self {
        Self {
            start_index,
            values,
        }
    }

    /// Path `X_1, …, X_n`.
    pub fn from_one(values: Vec<T>) -> Self {
        Self::new(1, values)
    }

    pub fn empty() -> Self {
        Self::new(1, Vec::new())
    }

    pub fn start_index(&self) -> i64 {
        self.start_index
    }

    /// Index of the last increment; `start_index - 1` for the empty path.
    pub fn end_index(&self) -> i64 {
        self.start_index + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// `X_index`, if the path covers it.
    pub fn get(&self, index: i64) -> Option<T> {
        let offset = usize::try_from(index - self.start_index).ok()?;
        self.values.get(offset).copied()
    }

    /// `S_{m,n} = Σ_{r=m}^{n} X_r`, summed directly; zero when `m > n`.
    pub fn range_sum(&self, m: i64, n: i64) -> Result<T> {
        if m > n {
            return Ok(T::zero());
        }
        if m < self.start_index || n > self.end_index() {
            return Err(Error::InvalidArgument(format!(
                "range [{m}, {n}] outside path [{}, {}]",
                self.start_index,
                self.end_index()
            )));
        }
        let lo = (m - self.start_index) as usize;
        let hi = (n - self.start_index) as usize;
        Ok(self.values[lo..=hi].iter().copied().sum())
    }
}

/// Cumulative sums `S_0 = 0, S_1, …, S_n` of a path.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSums<T> {
    sums: Vec<T>,
}

impl<T: Scalar> PartialSums<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.sums
    }

    pub fn last(&self) -> T {
        *self.sums.last().expect("partial sums always hold S_0")
    }

    /// Recovers the increments by successive differences.
    pub fn increments(&self) -> Vec<T> {
        self.sums.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

pub fn partial_sums<T: Scalar>(path: &IncrementPath<T>) -> PartialSums<T> {
    let mut sums = Vec::with_capacity(path.len() + 1);
    let mut acc = T::zero();
    sums.push(acc);
    for x in path.values() {
        acc += *x;
        sums.push(acc);
    }
    PartialSums { sums }
}

/// `exp(-θ S_final)`; refuses weights that would leave the double range.
pub fn tilted_weight<T: Scalar>(sums: &PartialSums<T>, theta: T) -> Result<T> {
    let s = sums.last();
    if theta == T::zero() || s == T::zero() {
        return Ok(T::one());
    }
    guarded_exp(-theta * s)
}
