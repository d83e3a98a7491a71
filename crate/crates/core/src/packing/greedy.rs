use num_complex::Complex;

use super::{Disc, GapTracker, Packing, PackingError};
use crate::scalar::Scalar;

/// When the greedy construction stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule<T> {
    /// Stop once this many discs are placed.
    MaxDiscs(usize),
    /// Stop once the residual area is at most this value.
    TargetResidual(T),
}

impl<T: Scalar> StopRule<T> {
    fn reached(&self, packing: &Packing<T>) -> bool {
        match *self {
            StopRule::MaxDiscs(n) => packing.len() >= n,
            StopRule::TargetResidual(r) => packing.residual_area() <= r,
        }
    }
}

/// Greedy near-maximal packing of the unit disc.
///
/// Each step places `Disc(c*, shrink * v*)` where `(c*, v*)` is a
/// certified largest-empty-disc candidate (within `tolerance` of the
/// maximum clearance), found by a [`GapTracker`] that reuses its quadtree
/// between steps. A maximiser exactly at the origin is moved to
/// `(tolerance, 0)` and its clearance recomputed, so no disc is centred at 0.
pub fn pack_greedy<T: Scalar>(
    stop: StopRule<T>,
    shrink: T,
    tolerance: T,
) -> Result<Packing<T>, PackingError> {
    let mut packing = Packing::empty(shrink, tolerance)?;
    if let StopRule::TargetResidual(r) = stop {
        if !(r > T::zero() && r.is_finite()) {
            return Err(PackingError::InvalidStopRule(format!(
                "target residual {r} must be positive"
            )));
        }
    }
    packing.set_stop_rule(stop);
    let origin = Complex::new(T::zero(), T::zero());
    let mut tracker = GapTracker::new(&packing, tolerance)?;
    while !stop.reached(&packing) {
        let found = tracker.query(&packing)?;
        let (center, value) = if found.center == origin {
            let moved = Complex::new(tolerance, T::zero());
            (moved, packing.clearance(moved))
        } else {
            (found.center, found.clearance)
        };
        let index = packing.len();
        let disc = Disc::validated(index, center, shrink * value)?;
        packing.push(disc)?;
    }
    Ok(packing)
}
