//! Compensated, order-fixed summation.
//!
//! Every large sum in the crate goes through [`par_sum`]: the index range is
//! cut into chunks whose boundaries depend only on the range length, each
//! chunk is summed with a Neumaier accumulator, and the chunk partials are
//! combined by a fixed binary tree. The result is therefore bit-identical for
//! any rayon pool size.

use std::ops::{Add, Range, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

/// Values that can flow through the compensated reducers.
pub trait Summand: Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> {
    fn zero() -> Self;
    /// Neumaier correction for `total = sum + value`.
    fn compensate(sum: Self, value: Self, total: Self) -> Self;
}

impl Summand for f64 {
    #[inline]
    fn zero() -> Self {
        0.0
    }

    #[inline]
    fn compensate(sum: f64, value: f64, total: f64) -> f64 {
        if sum.abs() >= value.abs() {
            (sum - total) + value
        } else {
            (value - total) + sum
        }
    }
}

impl Summand for Complex64 {
    #[inline]
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    #[inline]
    fn compensate(sum: Self, value: Self, total: Self) -> Self {
        Complex64::new(
            f64::compensate(sum.re, value.re, total.re),
            f64::compensate(sum.im, value.im, total.im),
        )
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug)]
pub struct Neumaier<T: Summand> {
    sum: T,
    comp: T,
}

impl<T: Summand> Default for Neumaier<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Summand> Neumaier<T> {
    pub fn new() -> Self {
        Neumaier {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, value: T) {
        let total = self.sum + value;
        self.comp = self.comp + T::compensate(self.sum, value, total);
        self.sum = total;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

impl<T: Summand> FromIterator<T> for Neumaier<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Neumaier::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn neumaier_sum<T: Summand, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().collect::<Neumaier<T>>().value()
}

/// Pairwise reduction with a fixed tree shape: the split point is always
/// the midpoint of the slice.
pub fn pairwise<T: Summand>(values: &[T]) -> T {
    match values.len() {
        0 => T::zero(),
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise(&values[..mid]) + pairwise(&values[mid..])
        }
    }
}

/// Default chunk length for [`par_sum`].
pub const CHUNK: usize = 1024;

/// Deterministic parallel sum of `f(chunk)` over `0..n`.
///
/// `f` receives a sub-range and returns the partial sum over it; it should
/// use a [`Neumaier`] accumulator internally.
pub fn par_sum<T, F>(n: usize, chunk: usize, f: F) -> T
where
    T: Summand,
    F: Fn(Range<usize>) -> T + Sync,
{
    let chunk = chunk.max(1);
    let chunks = n.div_ceil(chunk);
    let partials: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|i| f(i * chunk..((i + 1) * chunk).min(n)))
        .collect();
    pairwise(&partials)
}

/// Deterministic parallel compensated sum of `term(i)` over `0..n`.
pub fn par_sum_terms<T, F>(n: usize, term: F) -> T
where
    T: Summand,
    F: Fn(usize) -> T + Sync,
{
    par_sum(n, CHUNK, |range| neumaier_sum(range.map(&term)))
}
