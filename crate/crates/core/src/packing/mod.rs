//! Pairwise-disjoint closed discs inside the open unit disc, with an exact
//! area ledger.

mod greedy;
mod incremental;
mod search;

pub use greedy::{pack_greedy, StopRule};
pub use incremental::GapTracker;
pub use search::{largest_empty_disc, EmptyDisc};

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::summation::CompensatedSum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PackingError {
    #[error("disc {index}: radius {radius} is not positive")]
    NonPositiveRadius { index: usize, radius: f64 },
    #[error("disc {index}: not strictly inside the unit disc (1 - |c| - r = {margin})")]
    NotContained { index: usize, margin: f64 },
    #[error("disc {index}: centre at the origin is reserved for the leading atom")]
    CenterAtOrigin { index: usize },
    #[error("discs {first} and {second} overlap or touch (gap {gap})")]
    Overlap { first: usize, second: usize, gap: f64 },
    #[error("disc {index}: non-finite coordinates")]
    NonFinite { index: usize },
    #[error("shrink factor {0} must lie strictly between 0 and 1")]
    InvalidShrink(f64),
    #[error("search tolerance {0} must be positive and finite")]
    InvalidTolerance(f64),
    #[error("invalid stop rule: {0}")]
    InvalidStopRule(String),
    #[error("residual area did not decrease when adding disc {index}")]
    NotMonotone { index: usize },
    #[error("stored residual area {stored} disagrees with the ledger value {computed}")]
    LedgerMismatch { stored: f64, computed: f64 },
    #[error("region exhausted after {placed} discs: best clearance {best} does not exceed tolerance {tolerance}")]
    RegionExhausted {
        placed: usize,
        best: f64,
        tolerance: f64,
    },
}

/// Closed disc `{ z : |z - center| <= radius }`, strictly inside the unit disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc<T> {
    center: Complex<T>,
    radius: T,
}

impl<T: Scalar> Disc<T> {
    pub fn new(center: Complex<T>, radius: T) -> Result<Self, PackingError> {
        Self::validated(0, center, radius)
    }

    fn validated(index: usize, center: Complex<T>, radius: T) -> Result<Self, PackingError> {
        if !(center.re.is_finite() && center.im.is_finite() && radius.is_finite()) {
            return Err(PackingError::NonFinite { index });
        }
        if radius <= T::zero() {
            return Err(PackingError::NonPositiveRadius {
                index,
                radius: radius.as_f64(),
            });
        }
        let disc = Self { center, radius };
        let margin = disc.boundary_gap();
        if margin <= T::zero() {
            return Err(PackingError::NotContained {
                index,
                margin: margin.as_f64(),
            });
        }
        Ok(disc)
    }

    /// Builds a disc without checking containment; used for geometry
    /// reconstructed from possibly inconsistent measure files.
    pub(crate) fn new_unchecked(center: Complex<T>, radius: T) -> Self {
        Self { center, radius }
    }

    #[inline]
    pub fn center(&self) -> Complex<T> {
        self.center
    }

    #[inline]
    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn area(&self) -> T {
        T::PI() * self.radius * self.radius
    }

    /// `1 - |center| - radius`.
    #[inline]
    pub fn boundary_gap(&self) -> T {
        T::one() - self.center.norm() - self.radius
    }

    /// `|c1 - c2| - (r1 + r2)`; positive iff the closed discs are disjoint.
    #[inline]
    pub fn gap_to(&self, other: &Self) -> T {
        (self.center - other.center).norm() - (self.radius + other.radius)
    }

    /// Signed distance from `point` to the disc boundary, negative inside.
    #[inline]
    pub fn signed_distance(&self, point: Complex<T>) -> T {
        (point - self.center).norm() - self.radius
    }

    /// Closed-disc membership.
    #[inline]
    pub fn contains(&self, point: Complex<T>) -> bool {
        (point - self.center).norm_sqr() <= self.radius * self.radius
    }
}

/// Ordered family of pairwise-disjoint discs plus the parameters that
/// produced it.
///
/// `covered_area = pi * sum r_n^2` is accumulated with a running
/// compensated sum in insertion order, so rebuilding a packing from the
/// same disc list reproduces the ledger bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Packing<T> {
    discs: Vec<Disc<T>>,
    shrink: T,
    tolerance: T,
    stop: Option<StopRule<T>>,
    radius_sq: CompensatedSum<T>,
    covered_area: T,
    residual_area: T,
}

impl<T: Scalar> Packing<T> {
    /// Empty packing carrying its construction parameters.
    pub fn empty(shrink: T, tolerance: T) -> Result<Self, PackingError> {
        if !(shrink > T::zero() && shrink < T::one()) {
            return Err(PackingError::InvalidShrink(shrink.as_f64()));
        }
        if !(tolerance > T::zero() && tolerance.is_finite()) {
            return Err(PackingError::InvalidTolerance(tolerance.as_f64()));
        }
        Ok(Self {
            discs: Vec::new(),
            shrink,
            tolerance,
            stop: None,
            radius_sq: CompensatedSum::new(),
            covered_area: T::zero(),
            residual_area: T::PI(),
        })
    }

    /// Rebuilds a packing from an explicit disc list, re-validating every
    /// invariant. Pairwise disjointness is checked exhaustively.
    pub fn from_discs(
        shrink: T,
        tolerance: T,
        discs: impl IntoIterator<Item = (Complex<T>, T)>,
    ) -> Result<Self, PackingError> {
        let mut packing = Self::empty(shrink, tolerance)?;
        for (center, radius) in discs {
            let index = packing.discs.len();
            let disc = Disc::validated(index, center, radius)?;
            packing.push(disc)?;
        }
        Ok(packing)
    }

    /// Appends a disc after checking it against every disc already placed.
    pub fn push(&mut self, disc: Disc<T>) -> Result<(), PackingError> {
        let index = self.discs.len();
        if disc.center == Complex::new(T::zero(), T::zero()) {
            return Err(PackingError::CenterAtOrigin { index });
        }
        if disc.boundary_gap() <= T::zero() {
            return Err(PackingError::NotContained {
                index,
                margin: disc.boundary_gap().as_f64(),
            });
        }
        for (first, other) in self.discs.iter().enumerate() {
            let gap = other.gap_to(&disc);
            if gap <= T::zero() {
                return Err(PackingError::Overlap {
                    first,
                    second: index,
                    gap: gap.as_f64(),
                });
            }
        }
        let mut radius_sq = self.radius_sq;
        radius_sq.accumulate(disc.radius * disc.radius);
        let covered = T::PI() * radius_sq.value();
        let residual = T::PI() - covered;
        if residual >= self.residual_area || residual <= T::zero() {
            return Err(PackingError::NotMonotone { index });
        }
        self.radius_sq = radius_sq;
        self.covered_area = covered;
        self.residual_area = residual;
        self.discs.push(disc);
        Ok(())
    }

    pub fn discs(&self) -> &[Disc<T>] {
        &self.discs
    }

    pub fn len(&self) -> usize {
        self.discs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.discs.is_empty()
    }

    pub fn shrink(&self) -> T {
        self.shrink
    }

    pub fn tolerance(&self) -> T {
        self.tolerance
    }

    pub fn stop_rule(&self) -> Option<StopRule<T>> {
        self.stop
    }

    pub(crate) fn set_stop_rule(&mut self, stop: StopRule<T>) {
        self.stop = Some(stop);
    }

    pub fn covered_area(&self) -> T {
        self.covered_area
    }

    /// `pi - pi * sum r_n^2`.
    pub fn residual_area(&self) -> T {
        self.residual_area
    }

    /// Sub-packing of the first `n` discs (all of them if `n >= len`).
    pub fn prefix(&self, n: usize) -> Self {
        let mut out = Self::empty(self.shrink, self.tolerance).expect("parameters already valid");
        for disc in self.discs.iter().take(n) {
            out.push(*disc).expect("prefix of a valid packing is valid");
        }
        out.stop = self.stop;
        out
    }

    /// Residual area after each insertion, `(n, residual_n)` for `n = 1..=len`.
    pub fn residual_series(&self) -> Vec<(usize, T)> {
        let mut acc = CompensatedSum::new();
        self.discs
            .iter()
            .enumerate()
            .map(|(i, d)| {
                acc.accumulate(d.radius * d.radius);
                (i + 1, T::PI() - T::PI() * acc.value())
            })
            .collect()
    }

    /// Clearance of `point`; see [`clearance`].
    pub fn clearance(&self, point: Complex<T>) -> T {
        clearance(point, self)
    }
}

/// `min(1 - |c|, min_n (|c - c_n| - r_n))`: the radius of the largest disc
/// centred at `c` that stays inside the unit disc and avoids every placed
/// disc. Negative inside a placed disc or outside the unit disc. The map is
/// 1-Lipschitz in `c`.
pub fn clearance<T: Scalar>(point: Complex<T>, packing: &Packing<T>) -> T {
    packing
        .discs
        .iter()
        .fold(T::one() - point.norm(), |best, d| best.min(d.signed_distance(point)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::complex;

    fn packing(discs: &[(f64, f64, f64)]) -> Packing<f64> {
        Packing::from_discs(
            0.99,
            1e-6,
            discs.iter().map(|&(re, im, r)| (Complex::new(re, im), r)),
        )
        .unwrap()
    }

    #[test]
    fn clearance_of_empty_packing() {
        let p = Packing::<f64>::empty(0.99, 1e-6).unwrap();
        assert_eq!(clearance(complex(0.0, 0.0), &p), 1.0);
        assert!((clearance(complex(0.9, 0.0), &p) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn clearance_with_both_constraints_active() {
        // A centred disc is outside the packing contract, so build it directly.
        let mut p = Packing::<f64>::empty(0.99, 1e-6).unwrap();
        p.discs.push(Disc::new_unchecked(complex(0.0, 0.0), 0.5));
        assert!((clearance(complex(0.75, 0.0), &p) - 0.25).abs() < 1e-15);
        assert!((clearance(complex(0.0, 0.0), &p) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn disc_validation() {
        assert!(matches!(
            Disc::new(complex::<f64>(0.5, 0.0), 0.0),
            Err(PackingError::NonPositiveRadius { .. })
        ));
        assert!(matches!(
            Disc::new(complex::<f64>(0.5, 0.0), 0.5),
            Err(PackingError::NotContained { .. })
        ));
        assert!(Disc::new(complex::<f64>(0.5, 0.0), 0.49).is_ok());
    }

    #[test]
    fn overlap_is_rejected_with_offending_pair() {
        let err = Packing::from_discs(
            0.99,
            1e-6,
            [
                (complex(0.5, 0.0), 0.2),
                (complex(-0.5, 0.0), 0.2),
                (complex(0.5, 0.35), 0.2),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, PackingError::Overlap { first: 0, second: 2, .. }), "{err:?}");
    }

    #[test]
    fn tangent_discs_are_rejected() {
        let err = Packing::from_discs(
            0.99,
            1e-6,
            [(complex(0.25, 0.0), 0.25), (complex(-0.25, 0.0), 0.25)],
        )
        .unwrap_err();
        assert!(matches!(err, PackingError::Overlap { .. }));
    }

    #[test]
    fn origin_centre_is_reserved() {
        let err = Packing::from_discs(0.99, 1e-6, [(complex(0.0, 0.0), 0.3)]).unwrap_err();
        assert_eq!(err, PackingError::CenterAtOrigin { index: 0 });
    }

    #[test]
    fn ledger_and_prefix() {
        let p = packing(&[(0.3, 0.0, 0.2), (-0.5, 0.0, 0.3), (0.0, 0.7, 0.1)]);
        let expected = std::f64::consts::PI * (1.0 - 0.04 - 0.09 - 0.01);
        assert!((p.residual_area() - expected).abs() < 1e-15);
        assert!((p.covered_area() + p.residual_area() - std::f64::consts::PI).abs() < 1e-15);
        let q = p.prefix(2);
        assert_eq!(q.len(), 2);
        assert_eq!(q.residual_series(), p.residual_series()[..2].to_vec());
        assert_eq!(p.residual_series().last().unwrap().1, p.residual_area());
    }

    #[test]
    fn shrink_bounds() {
        assert!(matches!(Packing::<f64>::empty(1.0, 1e-6), Err(PackingError::InvalidShrink(_))));
        assert!(matches!(Packing::<f64>::empty(0.0, 1e-6), Err(PackingError::InvalidShrink(_))));
        assert!(matches!(Packing::<f64>::empty(0.5, 0.0), Err(PackingError::InvalidTolerance(_))));
    }
}
