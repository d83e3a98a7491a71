//! Compensated summation.
//!
//! Two flavours are provided. [`CompensatedSum`] is a running Neumaier
//! accumulator, used where terms arrive one at a time (the packing area
//! ledger). [`pairwise_sum`] splits a slice into a balanced tree whose
//! leaves are Neumaier-summed blocks and whose internal nodes merge
//! `(sum, correction)` pairs with an error-free `two_sum`. The tree shape
//! depends only on the slice length, so results are reproducible.

use std::ops::{Add, AddAssign};

use num_complex::Complex;

use crate::scalar::Scalar;

/// Leaf size of the pairwise summation tree.
const PAIRWISE_BLOCK: usize = 32;

/// Error-free transformation: `a + b = s + e` exactly, with `s = fl(a + b)`.
#[inline]
pub fn two_sum<T: Scalar>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Running Kahan-Babuska-Neumaier sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn accumulate(&mut self, x: T) {
        let (s, e) = two_sum(self.sum, x);
        self.sum = s;
        self.comp = self.comp + e;
    }

    /// Best estimate of the accumulated sum.
    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }

    fn merge(self, other: Self) -> Self {
        let (s, e) = two_sum(self.sum, other.sum);
        Self {
            sum: s,
            comp: self.comp + other.comp + e,
        }
    }
}

impl<T: Scalar> AddAssign<T> for CompensatedSum<T> {
    fn add_assign(&mut self, rhs: T) {
        self.accumulate(rhs);
    }
}

impl<T: Scalar> Add for CompensatedSum<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        self.merge(rhs)
    }
}

impl<T: Scalar> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.accumulate(x);
        }
        acc
    }
}

fn pairwise_tree<T: Scalar>(xs: &[T]) -> CompensatedSum<T> {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().copied().collect();
    }
    let mid = xs.len() / 2;
    pairwise_tree(&xs[..mid]).merge(pairwise_tree(&xs[mid..]))
}

/// Pairwise compensated sum of a slice.
pub fn pairwise_sum<T: Scalar>(xs: &[T]) -> T {
    pairwise_tree(xs).value()
}

/// Pairwise compensated sum of complex terms, real and imaginary parts
/// summed independently with the same tree.
pub fn pairwise_sum_complex<T: Scalar>(zs: &[Complex<T>]) -> Complex<T> {
    let re: Vec<T> = zs.iter().map(|z| z.re).collect();
    let im: Vec<T> = zs.iter().map(|z| z.im).collect();
    Complex::new(pairwise_sum(&re), pairwise_sum(&im))
}
