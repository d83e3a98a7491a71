//! Persistent best-first variant of the largest-empty-disc search.
//!
//! Adding a disc can only lower the clearance function, so a cell bound
//! computed against an earlier packing is still a valid upper bound. The
//! tracker keeps every quadtree leaf in a max-heap keyed by its (possibly
//! stale) bound. A query pops leaves in bound order: stale leaves are
//! re-evaluated against the discs added since and pushed back, fresh ones
//! are split. It stops once the top bound is at most `best + tolerance`,
//! which certifies the best refreshed value exactly as the stateless search
//! does. Leaves whose bound falls to `tolerance` are dropped for good.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex;

use super::search::{cell_center, evaluate_cell, half_diagonal};
use super::{EmptyDisc, Packing, PackingError};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
struct Leaf<T> {
    ix: u32,
    iy: u32,
    level: u32,
    value: T,
    bound: T,
    /// Disc count of the packing this leaf was last evaluated against.
    synced: usize,
    list: Vec<u32>,
}

#[derive(Debug, Clone, Copy)]
struct Entry<T> {
    bound: T,
    level: u32,
    iy: u32,
    ix: u32,
    slot: usize,
}

impl<T: Scalar> PartialEq for Entry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Entry<T> {}

impl<T: Scalar> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Entry<T> {
    /// Largest bound first; ties go to coarser cells, then row-major order.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .partial_cmp(&other.bound)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.level.cmp(&self.level))
            .then_with(|| other.iy.cmp(&self.iy))
            .then_with(|| other.ix.cmp(&self.ix))
    }
}

/// Largest-empty-disc search that carries its quadtree across insertions.
#[derive(Debug, Clone)]
pub struct GapTracker<T> {
    tolerance: T,
    leaves: Vec<Option<Leaf<T>>>,
    free: Vec<usize>,
    heap: BinaryHeap<Entry<T>>,
    scratch: Vec<T>,
}

impl<T: Scalar> GapTracker<T> {
    pub fn new(packing: &Packing<T>, tolerance: T) -> Result<Self, PackingError> {
        if !(tolerance > T::zero() && tolerance.is_finite()) {
            return Err(PackingError::InvalidTolerance(tolerance.as_f64()));
        }
        let mut tracker = Self {
            tolerance,
            leaves: Vec::new(),
            free: Vec::new(),
            heap: BinaryHeap::new(),
            scratch: Vec::new(),
        };
        let all: Vec<u32> = (0..packing.len() as u32).collect();
        let root = tracker.evaluate(packing, 0, 0, 0, &all);
        tracker.insert(root);
        Ok(tracker)
    }

    /// Number of live quadtree leaves.
    pub fn leaf_count(&self) -> usize {
        self.heap.len()
    }

    fn evaluate(&mut self, packing: &Packing<T>, ix: u32, iy: u32, level: u32, parent_list: &[u32]) -> Leaf<T> {
        let half_width = T::one() / T::from_u64(1u64 << level).unwrap();
        let mut list = Vec::new();
        let cell = evaluate_cell(
            packing,
            ix,
            iy,
            half_width,
            half_diagonal(half_width),
            parent_list,
            &mut self.scratch,
            &mut list,
        );
        Leaf {
            ix,
            iy,
            level,
            value: cell.value,
            bound: cell.bound,
            synced: packing.len(),
            list,
        }
    }

    fn insert(&mut self, leaf: Leaf<T>) {
        if leaf.bound <= self.tolerance {
            return;
        }
        let entry = Entry {
            bound: leaf.bound,
            level: leaf.level,
            iy: leaf.iy,
            ix: leaf.ix,
            slot: 0,
        };
        let slot = match self.free.pop() {
            Some(s) => {
                self.leaves[s] = Some(leaf);
                s
            }
            None => {
                self.leaves.push(Some(leaf));
                self.leaves.len() - 1
            }
        };
        self.heap.push(Entry { slot, ..entry });
    }

    /// Searches `packing`, which must extend the packing of the previous
    /// call (discs are only ever appended).
    pub fn query(&mut self, packing: &Packing<T>) -> Result<EmptyDisc<T>, PackingError> {
        let tol = self.tolerance;
        let mut best: Option<(T, Complex<T>)> = None;
        let mut examined = 0usize;
        let mut parent_list = Vec::new();
        while let Some(top) = self.heap.peek().copied() {
            if let Some((value, _)) = best {
                if top.bound <= value + tol {
                    break;
                }
            }
            self.heap.pop();
            let leaf = self.leaves[top.slot].take().expect("heap entry has a leaf");
            self.free.push(top.slot);
            examined += 1;
            let candidates = if leaf.synced < packing.len() {
                parent_list.clear();
                parent_list.extend_from_slice(&leaf.list);
                parent_list.extend(leaf.synced as u32..packing.len() as u32);
                let fresh = self.evaluate(packing, leaf.ix, leaf.iy, leaf.level, &parent_list);
                self.offer_best(&mut best, &fresh);
                self.insert(fresh);
                continue;
            } else {
                leaf
            };
            self.offer_best(&mut best, &candidates);
            for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let child = self.evaluate(
                    packing,
                    2 * candidates.ix + dx,
                    2 * candidates.iy + dy,
                    candidates.level + 1,
                    &candidates.list,
                );
                examined += 1;
                self.offer_best(&mut best, &child);
                self.insert(child);
            }
        }
        match best {
            Some((value, center)) if value > tol => Ok(EmptyDisc {
                center,
                clearance: value,
                cells_examined: examined,
            }),
            _ => Err(PackingError::RegionExhausted {
                placed: packing.len(),
                best: best.map_or(f64::NEG_INFINITY, |(v, _)| v.as_f64()),
                tolerance: tol.as_f64(),
            }),
        }
    }

    fn offer_best(&self, best: &mut Option<(T, Complex<T>)>, leaf: &Leaf<T>) {
        if best.is_none_or(|(v, _)| leaf.value > v) {
            let half_width = T::one() / T::from_u64(1u64 << leaf.level).unwrap();
            *best = Some((leaf.value, cell_center(leaf.ix, leaf.iy, half_width)));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::{clearance, largest_empty_disc, Disc};
    use crate::scalar::complex;

    #[test]
    fn fresh_tracker_agrees_with_stateless_search() {
        let p = Packing::from_discs(
            0.99f64,
            1e-6,
            [(complex(0.5, 0.0), 0.25), (complex(-0.3, 0.4), 0.2)],
        )
        .unwrap();
        let a = largest_empty_disc(&p, 1e-6).unwrap();
        let b = GapTracker::new(&p, 1e-6).unwrap().query(&p).unwrap();
        assert!((a.clearance - b.clearance).abs() <= 1e-6);
        assert_eq!(b.clearance, clearance(b.center, &p));
    }

    #[test]
    fn incremental_queries_stay_within_tolerance() {
        let tol = 1e-6f64;
        let mut p = Packing::empty(0.9, tol).unwrap();
        let mut tracker = GapTracker::new(&p, tol).unwrap();
        for _ in 0..25 {
            let inc = tracker.query(&p).unwrap();
            let fresh = largest_empty_disc(&p, tol).unwrap();
            assert!(
                (inc.clearance - fresh.clearance).abs() <= tol,
                "{} vs {}",
                inc.clearance,
                fresh.clearance
            );
            assert_eq!(inc.clearance, clearance(inc.center, &p));
            let center = if inc.center == complex(0.0, 0.0) {
                complex(tol, 0.0)
            } else {
                inc.center
            };
            let r = 0.9 * p.clearance(center);
            p.push(Disc::new(center, r).unwrap()).unwrap();
        }
    }
}
