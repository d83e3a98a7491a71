//! How close can an `l1`-normalised weight vector come to annihilating the
//! first `K + 1` moments of a finite point set?
//!
//! The value `min_{||l||_1 = 1} max_{k <= K} |sum_n l_n a_n^k|` is not a convex
//! program (the constraint is a sphere), but for a fixed phase vector `s`
//! the problem
//!
//! ```text
//! min t   s.t.  |sum_n l_n a_n^k| <= t  (k = 0..K),   Re sum_n conj(s_n) l_n = 1
//! ```
//!
//! is, and its value over all `s` is the original one: `Re <s, l> <= ||l||_1`
//! with equality when `s` carries the phases of `l`. Each modulus is replaced
//! by the maximum over 32 rotated real parts, which makes every subproblem a
//! small LP, solved through its dual with the in-repo simplex. Phase vectors
//! come from sign patterns, random starts and the fixpoint iteration
//! `s <- phase(l)`; the best weights found are reported together with the
//! polygon brackets. The search over phases is a heuristic, so the result is
//! an upper bound on the true minimum that is verified but not certified
//! globally optimal.

mod simplex;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::real17;
use crate::measure::AnnihilatingMeasure;
use crate::summation::pairwise_sum_complex;
use crate::verify::Point;

pub use simplex::LpError;

pub const MAX_POINTS: usize = 64;
pub const MAX_DEGREE: usize = 64;
pub const POLYGON_SIDES: usize = 32;
/// All sign patterns are tried up to this many points.
const SIGN_PATTERN_LIMIT: usize = 12;
const RANDOM_STARTS: usize = 16;
const REFINED_STARTS: usize = 8;
const MAX_ALTERNATIONS: usize = 50;
const START_SEED: u64 = 0x1e55_0bad;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndependenceError {
    #[error("at least two points are required, got {0}")]
    TooFewPoints(usize),
    #[error("degree cap must be at least 1")]
    ZeroDegree,
    #[error("{points} points with degree cap {degree} exceed the desk-scale limit of {MAX_POINTS} points and degree {MAX_DEGREE}")]
    InfeasibleScale { points: usize, degree: usize },
    #[error("points {first} and {second} coincide")]
    Degenerate { first: usize, second: usize },
    #[error("point {index} ({re}, {im}) lies outside the closed unit disc or is not finite")]
    OutsideDisc { index: usize, re: f64, im: f64 },
    #[error("linear program failed: {0:?}")]
    Solver(LpError),
    #[error("the measure has {available} atoms, {requested} requested")]
    PrefixTooShort { available: usize, requested: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceProblem {
    points: Vec<Complex<f64>>,
    degree_cap: usize,
}

impl IndependenceProblem {
    pub fn new(points: Vec<Complex<f64>>, degree_cap: usize) -> Result<Self, IndependenceError> {
        if points.len() < 2 {
            return Err(IndependenceError::TooFewPoints(points.len()));
        }
        if degree_cap == 0 {
            return Err(IndependenceError::ZeroDegree);
        }
        for (index, p) in points.iter().enumerate() {
            if !(p.re.is_finite() && p.im.is_finite() && p.norm() <= 1.0) {
                return Err(IndependenceError::OutsideDisc {
                    index,
                    re: p.re,
                    im: p.im,
                });
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(IndependenceError::Degenerate { first: i, second: j });
                }
            }
        }
        Ok(Self { points, degree_cap })
    }

    pub fn points(&self) -> &[Complex<f64>] {
        &self.points
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    /// `{j / (count + 1) : j = 1..count}` on the real segment.
    pub fn segment(count: usize, degree_cap: usize) -> Result<Self, IndependenceError> {
        let points = (1..=count)
            .map(|j| Complex::new(j as f64 / (count + 1) as f64, 0.0))
            .collect();
        Self::new(points, degree_cap)
    }
}

/// `max_{0 <= k <= K} |sum_n w_n a_n^k|`.
pub fn max_moment(points: &[Complex<f64>], weights: &[Complex<f64>], degree_cap: usize) -> f64 {
    assert_eq!(points.len(), weights.len(), "one weight per point");
    let mut terms: Vec<Complex<f64>> = weights.to_vec();
    let mut max = 0.0f64;
    for k in 0..=degree_cap {
        if k > 0 {
            for (t, p) in terms.iter_mut().zip(points) {
                *t *= p;
            }
        }
        max = max.max(pairwise_sum_complex(&terms).norm());
    }
    max
}

/// Like [`max_moment`] with each modulus replaced by the 32-gon gauge
/// `max_p Re(e^{-i theta_p} z)`, which lies in `[|z| cos(pi/32), |z|]`.
pub fn polygon_max_moment(points: &[Complex<f64>], weights: &[Complex<f64>], degree_cap: usize) -> f64 {
    let dirs = directions();
    let mut terms: Vec<Complex<f64>> = weights.to_vec();
    let mut max = 0.0f64;
    for k in 0..=degree_cap {
        if k > 0 {
            for (t, p) in terms.iter_mut().zip(points) {
                *t *= p;
            }
        }
        let m = pairwise_sum_complex(&terms);
        for d in &dirs {
            max = max.max((d.conj() * m).re);
        }
    }
    max
}

fn directions() -> Vec<Complex<f64>> {
    (0..POLYGON_SIDES)
        .map(|p| Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * p as f64 / POLYGON_SIDES as f64))
        .collect()
}

pub fn l1_norm(weights: &[Complex<f64>]) -> f64 {
    let abs: Vec<f64> = weights.iter().map(|w| w.norm()).collect();
    crate::summation::pairwise_sum(&abs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverRecord {
    pub method: String,
    pub polygon_sides: usize,
    pub phase_starts: usize,
    pub lp_solves: usize,
    /// Subproblems abandoned because of rounding trouble.
    pub lp_failures: usize,
    pub pivots: usize,
    /// `1 - cos(pi / sides)`: relative width of the brackets.
    #[serde(with = "real17")]
    pub polygon_error: f64,
    pub globally_certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceCertificate {
    pub points: Vec<Point>,
    pub degree_cap: usize,
    /// Exact max moment of `optimal_weights`.
    #[serde(with = "real17")]
    pub optimal_value: f64,
    /// Polygon-gauge value of the weights; `<= optimal_value`.
    #[serde(with = "real17")]
    pub lower_bracket: f64,
    /// `lower_bracket / cos(pi/32)`; `>= optimal_value`.
    #[serde(with = "real17")]
    pub upper_bracket: f64,
    pub optimal_weights: Vec<Point>,
    pub solver: SolverRecord,
}

impl IndependenceCertificate {
    pub fn weights(&self) -> Vec<Complex<f64>> {
        self.optimal_weights.iter().map(|p| Complex::new(p.re, p.im)).collect()
    }

    pub fn point_list(&self) -> Vec<Complex<f64>> {
        self.points.iter().map(|p| Complex::new(p.re, p.im)).collect()
    }
}

struct PhaseLp {
    /// `G[row][j]`: real-linear coefficients of `Re(e^{-i theta} m_k)` in
    /// `(Re l, Im l)`.
    rows: Vec<Vec<f64>>,
    vars: usize,
}

impl PhaseLp {
    fn new(problem: &IndependenceProblem) -> Self {
        let n = problem.points.len();
        let dirs = directions();
        let mut rows = Vec::with_capacity((problem.degree_cap + 1) * dirs.len());
        let mut powers = vec![Complex::new(1.0, 0.0); n];
        for k in 0..=problem.degree_cap {
            if k > 0 {
                for (p, a) in powers.iter_mut().zip(&problem.points) {
                    *p *= a;
                }
            }
            for d in &dirs {
                let mut row = vec![0.0; 2 * n];
                for (j, p) in powers.iter().enumerate() {
                    let g = d.conj() * p;
                    row[j] = g.re;
                    row[n + j] = -g.im;
                }
                rows.push(row);
            }
        }
        Self { rows, vars: 2 * n }
    }

    /// Solves the phase-`s` subproblem through its dual
    /// `max mu  s.t.  sum y = 1, G^T y = mu b, y >= 0`; the weights are the
    /// multipliers of the `G^T y = mu b` rows.
    fn solve(&self, phases: &[Complex<f64>]) -> Result<(Vec<Complex<f64>>, usize), LpError> {
        let n = phases.len();
        let r = self.rows.len();
        let cols = r + 2;
        let mut a = Vec::with_capacity(self.vars + 1);
        let mut first = vec![1.0; cols];
        first[r] = 0.0;
        first[r + 1] = 0.0;
        a.push(first);
        for j in 0..self.vars {
            let b = if j < n { phases[j].re } else { phases[j - n].im };
            let mut row = Vec::with_capacity(cols);
            row.extend(self.rows.iter().map(|g| g[j]));
            row.push(-b);
            row.push(b);
            a.push(row);
        }
        let mut rhs = vec![0.0; self.vars + 1];
        rhs[0] = 1.0;
        let mut cost = vec![0.0; cols];
        cost[r] = -1.0;
        cost[r + 1] = 1.0;
        let sol = simplex::solve(&a, &rhs, &cost)?;
        let v = &sol.duals[1..];
        let weights = (0..n).map(|j| Complex::new(v[j], v[n + j])).collect();
        Ok((weights, sol.pivots))
    }
}

struct Search<'a> {
    problem: &'a IndependenceProblem,
    lp: PhaseLp,
    lp_solves: usize,
    failures: usize,
    pivots: usize,
    best: Option<(f64, Vec<Complex<f64>>)>,
}

impl Search<'_> {
    /// Solves one phase LP; returns the normalised weights and their value.
    fn run(&mut self, phases: &[Complex<f64>]) -> Result<Option<(f64, Vec<Complex<f64>>)>, IndependenceError> {
        self.lp_solves += 1;
        // A subproblem lost to rounding is just a wasted start.
        let Ok((raw, pivots)) = self.lp.solve(phases) else {
            self.failures += 1;
            return Ok(None);
        };
        self.pivots += pivots;
        let norm = l1_norm(&raw);
        if !(norm > 0.0 && norm.is_finite()) {
            return Ok(None);
        }
        let weights: Vec<Complex<f64>> = raw.iter().map(|w| w / norm).collect();
        let value = max_moment(&self.problem.points, &weights, self.problem.degree_cap);
        if self.best.as_ref().is_none_or(|(b, _)| value < *b) {
            self.best = Some((value, weights.clone()));
        }
        Ok(Some((value, weights)))
    }

    fn refine(&mut self, mut phases: Vec<Complex<f64>>) -> Result<(), IndependenceError> {
        let mut last = f64::INFINITY;
        for _ in 0..MAX_ALTERNATIONS {
            let Some((value, weights)) = self.run(&phases)? else { return Ok(()) };
            if !(value < last * (1.0 - 1e-9)) {
                return Ok(());
            }
            last = value;
            for (s, w) in phases.iter_mut().zip(&weights) {
                let m = w.norm();
                if m > 1e-14 {
                    *s = w / m;
                }
            }
        }
        Ok(())
    }
}

/// Non-zero `l` with `sum_n l_n a_n^k = 0` for `k <= K`, when `N > K + 1`,
/// by Gaussian elimination with complete pivoting.
fn moment_kernel(problem: &IndependenceProblem) -> Vec<Complex<f64>> {
    let n = problem.points.len();
    let rows = problem.degree_cap + 1;
    let mut m: Vec<Vec<Complex<f64>>> = Vec::with_capacity(rows);
    let mut powers = vec![Complex::new(1.0, 0.0); n];
    for k in 0..rows {
        if k > 0 {
            for (p, a) in powers.iter_mut().zip(&problem.points) {
                *p *= a;
            }
        }
        m.push(powers.clone());
    }
    let mut cols: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    while rank < rows {
        let mut best = (0.0, rank, rank);
        for (i, row) in m.iter().enumerate().skip(rank) {
            for c in rank..n {
                let v = row[cols[c]].norm();
                if v > best.0 {
                    best = (v, i, c);
                }
            }
        }
        if best.0 == 0.0 {
            break;
        }
        m.swap(rank, best.1);
        cols.swap(rank, best.2);
        let pc = cols[rank];
        let pivot = m[rank][pc];
        for i in rank + 1..rows {
            let f = m[i][pc] / pivot;
            if f != Complex::new(0.0, 0.0) {
                for &c in &cols[rank..] {
                    let delta = f * m[rank][c];
                    m[i][c] -= delta;
                }
            }
        }
        rank += 1;
    }
    // One free column set to 1, pivot columns by back substitution.
    let mut w = vec![Complex::new(0.0, 0.0); n];
    w[cols[rank]] = Complex::new(1.0, 0.0);
    for r in (0..rank).rev() {
        let pc = cols[r];
        let mut acc = Complex::new(0.0, 0.0);
        for &c in &cols[r + 1..] {
            acc += m[r][c] * w[c];
        }
        w[pc] = -acc / m[r][pc];
    }
    w
}

/// Best `l1`-normalised approximate annihilator found by the phase search.
pub fn min_l1_annihilator(problem: &IndependenceProblem) -> Result<IndependenceCertificate, IndependenceError> {
    let n = problem.points.len();
    if n > MAX_POINTS || problem.degree_cap > MAX_DEGREE {
        return Err(IndependenceError::InfeasibleScale {
            points: n,
            degree: problem.degree_cap,
        });
    }
    let mut search = Search {
        problem,
        lp: PhaseLp::new(problem),
        lp_solves: 0,
        failures: 0,
        pivots: 0,
        best: None,
    };
    let kernel = n > problem.degree_cap + 1;
    let starts = if kernel { Vec::new() } else { phase_starts(n) };
    if kernel {
        // More points than moments: the moment matrix has a kernel and the
        // minimum is zero.
        let w = moment_kernel(problem);
        let norm = l1_norm(&w);
        let w: Vec<Complex<f64>> = w.iter().map(|x| x / norm).collect();
        search.best = Some((max_moment(&problem.points, &w, problem.degree_cap), w));
    } else {
        let mut scored = Vec::with_capacity(starts.len());
        for (i, s) in starts.iter().enumerate() {
            if let Some((value, _)) = search.run(s)? {
                scored.push((value, i));
            }
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, i) in scored.iter().take(REFINED_STARTS) {
            search.refine(starts[i].clone())?;
        }
    }
    let (value, weights) = search
        .best
        .clone()
        .ok_or(IndependenceError::Solver(LpError::IterationLimit))?;
    let lower = polygon_max_moment(&problem.points, &weights, problem.degree_cap).min(value);
    let cos = (std::f64::consts::PI / POLYGON_SIDES as f64).cos();
    let method = if kernel {
        "moment-matrix kernel by complete-pivoting elimination"
    } else {
        "phase-pattern LP over a 32-gon gauge, dense simplex on the dual"
    };
    Ok(IndependenceCertificate {
        points: problem.points.iter().map(|&p| p.into()).collect(),
        degree_cap: problem.degree_cap,
        optimal_value: value,
        lower_bracket: lower,
        upper_bracket: (lower / cos).max(value),
        optimal_weights: weights.iter().map(|&w| w.into()).collect(),
        solver: SolverRecord {
            method: method.to_string(),
            polygon_sides: POLYGON_SIDES,
            phase_starts: starts.len(),
            lp_solves: search.lp_solves,
            lp_failures: search.failures,
            pivots: search.pivots,
            polygon_error: 1.0 - cos,
            globally_certified: kernel,
        },
    })
}

/// All-ones, alternating, every sign pattern for small `n`, then seeded
/// random phases.
fn phase_starts(n: usize) -> Vec<Vec<Complex<f64>>> {
    let one = Complex::new(1.0, 0.0);
    let mut starts: Vec<Vec<Complex<f64>>> = vec![
        vec![one; n],
        (0..n).map(|j| if j % 2 == 0 { one } else { -one }).collect(),
    ];
    if n <= SIGN_PATTERN_LIMIT {
        // First sign fixed: s and -s give the same subproblem up to sign.
        for mask in 1u64..(1u64 << (n - 1)) {
            let s: Vec<Complex<f64>> = (0..n)
                .map(|j| if j > 0 && (mask >> (j - 1)) & 1 == 1 { -one } else { one })
                .collect();
            if !starts.contains(&s) {
                starts.push(s);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    for _ in 0..RANDOM_STARTS {
        starts.push(
            (0..n)
                .map(|_| Complex::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
                .collect(),
        );
    }
    starts
}

/// Segment points against the Wolff prefix of the same size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    pub segment: IndependenceCertificate,
    pub wolff: IndependenceCertificate,
    /// Max moment of the Wolff weights of the prefix, normalised by their
    /// total variation: a feasible point of the Wolff problem.
    #[serde(with = "real17")]
    pub wolff_feasible_value: f64,
    /// `segment / wolff`; absent when the Wolff value is exactly zero.
    #[serde(with = "real17::option")]
    pub ratio: Option<f64>,
}

/// Runs [`min_l1_annihilator`] on `count` equispaced segment points and on
/// the first `count` atoms of `measure`.
pub fn contrast_experiment(
    count: usize,
    measure: &AnnihilatingMeasure<f64>,
    degree_cap: usize,
) -> Result<ContrastReport, IndependenceError> {
    if measure.len() < count {
        return Err(IndependenceError::PrefixTooShort {
            available: measure.len(),
            requested: count,
        });
    }
    let segment = min_l1_annihilator(&IndependenceProblem::segment(count, degree_cap)?)?;
    let prefix = measure.prefix(count);
    let wolff_problem = IndependenceProblem::new(prefix.points(), degree_cap)?;
    let wolff = min_l1_annihilator(&wolff_problem)?;
    let tv = prefix.total_variation();
    let normalised: Vec<Complex<f64>> = prefix.weights().iter().map(|&w| Complex::new(w / tv, 0.0)).collect();
    let wolff_feasible_value = max_moment(&prefix.points(), &normalised, degree_cap);
    let ratio = (wolff.optimal_value > 0.0).then(|| segment.optimal_value / wolff.optimal_value);
    Ok(ContrastReport {
        segment,
        wolff,
        wolff_feasible_value,
        ratio,
    })
}
