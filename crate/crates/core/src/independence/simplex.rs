//! Dense two-phase tableau simplex for `min c.x  s.t.  A x = b, x >= 0`.
//!
//! Dantzig pricing, switching to Bland's rule after a run of degenerate
//! pivots so the method cannot cycle. Artificial columns are kept in the
//! tableau after phase one (barred from re-entering) so the simplex
//! multipliers of the original rows can be read off their reduced costs.

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;
const FEASIBILITY_EPS: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;
const MAX_PIVOTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpError {
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Multipliers `y` with `c - A^T y >= 0` at the optimum.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    value: f64,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        let (pivot_row, pivot_rhs) = (self.rows[r].clone(), self.rhs[r]);
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][col];
            if f != 0.0 {
                for (v, &pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.rhs[i] -= f * pivot_rhs;
                self.rows[i][col] = 0.0;
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for (v, &pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.value -= f * pivot_rhs;
            self.cost[col] = 0.0;
        }
        self.basis[r] = col;
        self.pivots += 1;
    }

    fn reset_cost(&mut self, c: &[f64]) {
        self.cost = c.to_vec();
        self.value = 0.0;
        for (i, &b) in self.basis.iter().enumerate() {
            let f = c[b];
            if f != 0.0 {
                for (v, &t) in self.cost.iter_mut().zip(&self.rows[i]) {
                    *v -= f * t;
                }
                self.value -= f * self.rhs[i];
            }
        }
    }

    /// Minimises the current cost row over columns `< allowed`.
    fn optimise(&mut self, allowed: usize) -> Result<(), LpError> {
        let mut degenerate = 0usize;
        // Columns whose only positive entries are rounding noise.
        let mut blocked = vec![false; allowed];
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Err(LpError::IterationLimit);
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut most = -COST_EPS;
            for j in 0..allowed {
                if blocked[j] {
                    continue;
                }
                let d = self.cost[j];
                if d < most {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    most = d;
                }
            }
            let Some(col) = enter else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a > PIVOT_EPS {
                    let ratio = self.rhs[i].max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some((l, best)) => ratio < best || (ratio == best && self.basis[i] < self.basis[l]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, ratio)) = leave else {
                if self.rows.iter().any(|r| r[col] > 0.0) {
                    blocked[col] = true;
                    continue;
                }
                return Err(LpError::Unbounded);
            };
            degenerate = if ratio == 0.0 { degenerate + 1 } else { 0 };
            self.pivot(row, col);
        }
    }
}

pub fn solve(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpSolution, LpError> {
    let m = a.len();
    let n = c.len();
    let width = n + m;
    let mut signs = vec![1.0; m];
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        debug_assert_eq!(a[i].len(), n);
        let s = if b[i] < 0.0 { -1.0 } else { 1.0 };
        signs[i] = s;
        let mut row = vec![0.0; width];
        for (v, &x) in row.iter_mut().zip(&a[i]) {
            *v = s * x;
        }
        row[n + i] = 1.0;
        rows.push(row);
        rhs.push(s * b[i]);
    }
    let mut t = Tableau {
        rows,
        rhs,
        cost: Vec::new(),
        value: 0.0,
        basis: (n..n + m).collect(),
        pivots: 0,
    };
    let mut phase_one = vec![0.0; width];
    for v in &mut phase_one[n..] {
        *v = 1.0;
    }
    t.reset_cost(&phase_one);
    t.optimise(n)?;
    if -t.value > FEASIBILITY_EPS {
        return Err(LpError::Infeasible);
    }
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(col) = (0..n).max_by(|&x, &y| t.rows[r][x].abs().total_cmp(&t.rows[r][y].abs())) {
                if t.rows[r][col].abs() > FEASIBILITY_EPS {
                    t.pivot(r, col);
                }
            }
        }
    }
    let mut phase_two = c.to_vec();
    phase_two.resize(width, 0.0);
    t.reset_cost(&phase_two);
    t.optimise(n)?;

    let mut x = vec![0.0; n];
    for (i, &bj) in t.basis.iter().enumerate() {
        if bj < n {
            x[bj] = t.rhs[i];
        }
    }
    let duals = (0..m).map(|i| -signs[i] * t.cost[n + i]).collect();
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution {
        x,
        duals,
        objective,
        pivots: t.pivots,
    })
}
