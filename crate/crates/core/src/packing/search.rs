//! Certified largest-empty-disc search.
//!
//! Lipschitz branch-and-bound on a quadtree over `[-1, 1]^2`. A cell with
//! centre `c` and half-diagonal `h` cannot contain a point with clearance
//! above `clearance(c) + h`, so it is discarded once that bound drops to
//! `best + tolerance`. Surviving cells split into four children level by
//! level until nothing survives.
//!
//! Each cell carries the list of discs that can be the active constraint
//! somewhere inside it: disc `j` is kept when its signed distance at the
//! centre is at most `clearance(c) + 2h`. Children filter their parent's
//! list, so deep cells only look at a handful of discs.
//!
//! The Lipschitz bound alone is first order in the cell size, which makes
//! long near-flat ridges (the annulus left by an almost concentric disc)
//! need cells as small as the tolerance. Each cell therefore also gets a
//! second-order bound: for any convex combination of the active distance
//! terms, `max min_i f_i <= max sum_i w_i f_i`, and the combination is
//! bounded by its linearisation at the centre plus a curvature term
//! (`1 - |x|` is concave; `|x - c_j| - r_j` has Hessian norm at most
//! `1 / dist(c_j, cell)`). Weights are the min-norm point of the convex
//! hull of the active gradients, so on a ridge the linear part vanishes.
//! The cell bound is the smaller of the two.
//!
//! Ties are broken in row-major order (smallest row, then smallest column)
//! within a level, and earlier levels win over later ones.

use num_complex::Complex;
use rayon::prelude::*;

use super::{Packing, PackingError};
use crate::scalar::Scalar;

/// Number of surviving parent cells above which children are evaluated on
/// the rayon pool.
const PARALLEL_THRESHOLD: usize = 4096;
const CHUNK: usize = 1024;
const MAX_LEVELS: u32 = 60;

/// Result of a largest-empty-disc search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmptyDisc<T> {
    pub center: Complex<T>,
    /// Clearance at `center`; within `tolerance` of the global maximum.
    pub clearance: T,
    /// Quadtree cells evaluated.
    pub cells_examined: usize,
}

#[derive(Debug, Clone, Copy)]
pub(super) struct Cell<T> {
    pub(super) ix: u32,
    pub(super) iy: u32,
    pub(super) value: T,
    pub(super) bound: T,
    start: u32,
    len: u32,
}

#[derive(Debug, Clone, Copy)]
struct Best<T> {
    value: T,
    ix: u32,
    iy: u32,
    level: u32,
}

impl<T: Scalar> Best<T> {
    /// Same-level comparison: larger value, then row-major position.
    fn beats(&self, other: &Self) -> bool {
        self.value > other.value
            || (self.value == other.value && (self.iy, self.ix) < (other.iy, other.ix))
    }
}

struct Level<T> {
    cells: Vec<Cell<T>>,
    lists: Vec<u32>,
    best: Option<Best<T>>,
    examined: usize,
}

/// Half-diagonal of a cell of the given half-width, rounded up.
pub(super) fn half_diagonal<T: Scalar>(half_width: T) -> T {
    half_width * T::SQRT_2() * (T::one() + T::lit(16.0) * T::epsilon())
}

pub(super) fn cell_center<T: Scalar>(ix: u32, iy: u32, half_width: T) -> Complex<T> {
    let two = T::lit(2.0);
    let x = -T::one() + (two * T::from_u32(ix).unwrap() + T::one()) * half_width;
    let y = -T::one() + (two * T::from_u32(iy).unwrap() + T::one()) * half_width;
    Complex::new(x, y)
}

#[derive(Debug, Clone, Copy)]
struct Term<T> {
    value: T,
    grad: Complex<T>,
    curvature: T,
}

/// Keeps the three smallest-valued terms, sorted ascending.
fn offer<T: Scalar>(top: &mut [Option<Term<T>>; 3], term: Term<T>) {
    let mut t = term;
    for slot in top.iter_mut() {
        match slot {
            Some(cur) if cur.value <= t.value => {}
            Some(cur) => std::mem::swap(cur, &mut t),
            None => {
                *slot = Some(t);
                return;
            }
        }
    }
}

/// Convex weights minimising `|sum w_i g_i|` over the given gradients.
fn min_norm_weights<T: Scalar>(g: &[Complex<T>]) -> Vec<T> {
    let n = g.len();
    let mut best_w = vec![T::zero(); n];
    let mut best = T::infinity();
    let mut consider = |w: Vec<T>| {
        let v = w
            .iter()
            .zip(g)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (&wi, gi)| acc + gi * wi);
        let norm = v.norm_sqr();
        if norm < best {
            best = norm;
            best_w = w;
        }
    };
    for i in 0..n {
        let mut w = vec![T::zero(); n];
        w[i] = T::one();
        consider(w);
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = g[i] - g[j];
            let dd = d.norm_sqr();
            if dd > T::zero() {
                // minimise |g_j + t (g_i - g_j)| over t in [0, 1]
                let t = (-(g[j].re * d.re + g[j].im * d.im) / dd)
                    .max(T::zero())
                    .min(T::one());
                let mut w = vec![T::zero(); n];
                w[i] = t;
                w[j] = T::one() - t;
                consider(w);
            }
        }
    }
    if n == 3 {
        // origin inside the triangle: barycentric coordinates of 0
        let (a, b, c) = (g[0], g[1], g[2]);
        let det = (b.re - a.re) * (c.im - a.im) - (c.re - a.re) * (b.im - a.im);
        if det != T::zero() {
            let l1 = (b.re * c.im - c.re * b.im) / det;
            let l2 = (c.re * a.im - a.re * c.im) / det;
            let l3 = T::one() - l1 - l2;
            if l1 >= T::zero() && l2 >= T::zero() && l3 >= T::zero() {
                consider(vec![l1, l2, l3]);
            }
        }
    }
    best_w
}

/// Second-order upper bound of `min_i f_i` over the cell.
fn curvature_bound<T: Scalar>(terms: &[Term<T>], half_width: T, half_diag: T) -> T {
    let grads: Vec<Complex<T>> = terms.iter().map(|t| t.grad).collect();
    let w = min_norm_weights(&grads);
    let mut value = T::zero();
    let mut grad = Complex::new(T::zero(), T::zero());
    let mut curv = T::zero();
    for (wi, t) in w.iter().zip(terms) {
        value = value + *wi * t.value;
        grad = grad + t.grad * *wi;
        curv = curv + *wi * t.curvature;
    }
    value
        + (grad.re.abs() + grad.im.abs()) * half_width
        + T::lit(0.5) * curv * half_diag * half_diag
}

/// Evaluates one cell against its parent's candidate list and appends the
/// filtered list to `lists`.
#[allow(clippy::too_many_arguments)]
pub(super) fn evaluate_cell<T: Scalar>(
    packing: &Packing<T>,
    ix: u32,
    iy: u32,
    half_width: T,
    half_diag: T,
    parent_list: &[u32],
    scratch: &mut Vec<T>,
    lists: &mut Vec<u32>,
) -> Cell<T> {
    let discs = packing.discs();
    let c = cell_center(ix, iy, half_width);
    scratch.clear();
    let radius = c.norm();
    let mut value = T::one() - radius;
    let mut top: [Option<Term<T>>; 3] = [None; 3];
    // 1 - |x| is concave; at the origin 0 is a valid supergradient.
    let boundary_grad = if radius > T::zero() {
        -c / radius
    } else {
        Complex::new(T::zero(), T::zero())
    };
    offer(
        &mut top,
        Term {
            value,
            grad: boundary_grad,
            curvature: T::zero(),
        },
    );
    for &j in parent_list {
        let disc = &discs[j as usize];
        let offset = c - disc.center();
        let dist = offset.norm();
        let d = dist - disc.radius();
        scratch.push(d);
        value = value.min(d);
        // Terms whose centre may lie in the cell are not smooth there; any
        // subset of terms still bounds the minimum from above.
        let gap = dist - half_diag;
        if gap > T::zero() {
            offer(
                &mut top,
                Term {
                    value: d,
                    grad: offset / dist,
                    curvature: T::one() / gap,
                },
            );
        }
    }
    let lipschitz = value + half_diag;
    let terms: Vec<Term<T>> = top.iter().flatten().copied().collect();
    let second_order = curvature_bound(&terms, half_width, half_diag);
    let slack = T::lit(16.0) * T::epsilon() * (second_order.abs() + T::one());
    let bound = lipschitz.min(second_order + slack);
    let keep = value + half_diag + half_diag;
    let start = lists.len() as u32;
    for (&j, &d) in parent_list.iter().zip(scratch.iter()) {
        if d <= keep {
            lists.push(j);
        }
    }
    Cell {
        ix,
        iy,
        value,
        bound,
        start,
        len: lists.len() as u32 - start,
    }
}

/// Splits `parents` into children, keeping those whose bound exceeds
/// `threshold`, and tracks the best child.
#[allow(clippy::too_many_arguments)]
fn expand<T: Scalar>(
    packing: &Packing<T>,
    parents: &[Cell<T>],
    parent_lists: &[u32],
    level: u32,
    half_width: T,
    half_diag: T,
    threshold: T,
) -> Level<T> {
    let mut out = Level {
        cells: Vec::with_capacity(parents.len() * 2),
        lists: Vec::new(),
        best: None,
        examined: 0,
    };
    let mut scratch = Vec::new();
    for parent in parents {
        let plist = &parent_lists[parent.start as usize..(parent.start + parent.len) as usize];
        for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let ix = 2 * parent.ix + dx;
            let iy = 2 * parent.iy + dy;
            let mark = out.lists.len();
            let cell = evaluate_cell(
                packing,
                ix,
                iy,
                half_width,
                half_diag,
                plist,
                &mut scratch,
                &mut out.lists,
            );
            out.examined += 1;
            let cand = Best {
                value: cell.value,
                ix,
                iy,
                level,
            };
            if out.best.as_ref().is_none_or(|b| cand.beats(b)) {
                out.best = Some(cand);
            }
            if cell.bound > threshold {
                out.cells.push(cell);
            } else {
                out.lists.truncate(mark);
            }
        }
    }
    out
}

fn merge_levels<T: Scalar>(parts: Vec<Level<T>>) -> Level<T> {
    let mut merged = Level {
        cells: Vec::new(),
        lists: Vec::new(),
        best: None,
        examined: 0,
    };
    for part in parts {
        let offset = merged.lists.len() as u32;
        merged.lists.extend_from_slice(&part.lists);
        merged.cells.extend(part.cells.into_iter().map(|mut c| {
            c.start += offset;
            c
        }));
        merged.examined += part.examined;
        if let Some(b) = part.best {
            if merged.best.as_ref().is_none_or(|m| b.beats(m)) {
                merged.best = Some(b);
            }
        }
    }
    merged
}

/// Finds a point whose clearance is within `tolerance` of the global
/// maximum of [`clearance`](super::clearance) over the plane.
///
/// Deterministic for a fixed packing and tolerance, independent of the
/// rayon thread count. Fails with [`PackingError::RegionExhausted`] when
/// the best clearance found does not exceed `tolerance`.
pub fn largest_empty_disc<T: Scalar>(
    packing: &Packing<T>,
    tolerance: T,
) -> Result<EmptyDisc<T>, PackingError> {
    if !(tolerance > T::zero() && tolerance.is_finite()) {
        return Err(PackingError::InvalidTolerance(tolerance.as_f64()));
    }
    // Rounding slack on the Lipschitz radius.
    let diag = half_diagonal::<T>;

    let all: Vec<u32> = (0..packing.len() as u32).collect();
    let mut lists = Vec::with_capacity(all.len());
    let mut scratch = Vec::new();
    let mut half_width = T::one();
    let root = evaluate_cell(
        packing,
        0,
        0,
        half_width,
        diag(half_width),
        &all,
        &mut scratch,
        &mut lists,
    );
    let mut best = Best {
        value: root.value,
        ix: 0,
        iy: 0,
        level: 0,
    };
    let mut cells = vec![root];
    let mut examined = 1usize;

    for level in 1..=MAX_LEVELS {
        let threshold = best.value + tolerance;
        cells.retain(|c| c.bound > threshold);
        if cells.is_empty() {
            break;
        }
        half_width = half_width / T::lit(2.0);
        let child_diag = diag(half_width);
        let next = if cells.len() >= PARALLEL_THRESHOLD {
            let parts: Vec<Level<T>> = cells
                .par_chunks(CHUNK)
                .map(|chunk| {
                    expand(packing, chunk, &lists, level, half_width, child_diag, threshold)
                })
                .collect();
            merge_levels(parts)
        } else {
            expand(packing, &cells, &lists, level, half_width, child_diag, threshold)
        };
        examined += next.examined;
        if let Some(b) = next.best {
            if b.value > best.value {
                best = b;
            }
        }
        cells = next.cells;
        lists = next.lists;
    }

    let hw = T::one() / T::from_u64(1u64 << best.level).unwrap();
    let center = cell_center(best.ix, best.iy, hw);
    if best.value <= tolerance {
        return Err(PackingError::RegionExhausted {
            placed: packing.len(),
            best: best.value.as_f64(),
            tolerance: tolerance.as_f64(),
        });
    }
    Ok(EmptyDisc {
        center,
        clearance: best.value,
        cells_examined: examined,
    })
}
