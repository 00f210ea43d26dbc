//! Dense two-phase tableau simplex with Bland's anti-cycling rule.

use super::{Cmp, LinearProgram, LpError, LpSolution, Sense};

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;
/// Entries this small after a pivot are treated as exact zeros.
const ROUND_OFF: f64 = 1e-13;

/// How an original variable is rebuilt from non-negative tableau columns.
struct VarMap {
    shift: f64,
    terms: Vec<(usize, f64)>,
}

struct Tableau {
    /// `rows × (cols + 1)`, last column is the right-hand side.
    a: Vec<f64>,
    rows: usize,
    cols: usize,
    basis: Vec<usize>,
    /// Reduced costs followed by minus the objective value.
    cost: Vec<f64>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * (self.cols + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.a[i * (self.cols + 1) + self.cols]
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.cols + 1;
        let piv = self.at(r, e);
        for v in &mut self.a[r * w..(r + 1) * w] {
            *v /= piv;
        }
        let prow: Vec<f64> = self.a[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.a[i * w + e];
            if f != 0.0 {
                for (v, p) in self.a[i * w..(i + 1) * w].iter_mut().zip(&prow) {
                    *v -= f * p;
                    if v.abs() < ROUND_OFF {
                        *v = 0.0;
                    }
                }
                self.a[i * w + e] = 0.0;
            }
        }
        let f = self.cost[e];
        if f != 0.0 {
            for (v, p) in self.cost.iter_mut().zip(&prow) {
                *v -= f * p;
            }
            self.cost[e] = 0.0;
        }
        self.basis[r] = e;
    }

    /// Runs Bland's rule on columns `< allowed` until optimal.
    fn iterate(&mut self, allowed: usize) -> Result<(), LpError> {
        let limit = 50 * (self.rows + self.cols) + 1000;
        for _ in 0..limit {
            let entering = (0..allowed).find(|&j| self.cost[j] > COST_TOL);
            let Some(e) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let aij = self.at(i, e);
                if aij > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / aij;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best - 1e-12
                                || (ratio <= best + 1e-12 && self.basis[i] < self.basis[r])
                            {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Err(LpError::Unbounded),
                Some((r, _)) => self.pivot(r, e),
            }
        }
        Err(LpError::Numeric(format!("no convergence in {limit} pivots")))
    }
}

pub(super) fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = lp.num_vars();
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    // Extra rows `y <= cap` for finite upper bounds on shifted columns.
    let mut caps: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (l, u) = (lp.lower[j], lp.upper[j]);
        if l > u {
            return Err(LpError::Infeasible);
        }
        let map = if l.is_finite() && u.is_finite() && l < 0.0 && u > 0.0 {
            caps.push((ncols, u));
            caps.push((ncols + 1, -l));
            ncols += 2;
            VarMap {
                shift: 0.0,
                terms: vec![(ncols - 2, 1.0), (ncols - 1, -1.0)],
            }
        } else if l.is_finite() {
            if u.is_finite() {
                caps.push((ncols, u - l));
            }
            ncols += 1;
            VarMap {
                shift: l,
                terms: vec![(ncols - 1, 1.0)],
            }
        } else if u.is_finite() {
            ncols += 1;
            VarMap {
                shift: u,
                terms: vec![(ncols - 1, -1.0)],
            }
        } else {
            ncols += 2;
            VarMap {
                shift: 0.0,
                terms: vec![(ncols - 2, 1.0), (ncols - 1, -1.0)],
            }
        };
        maps.push(map);
    }
    let nstruct = ncols;

    // Rows over structural columns, rhs made non-negative.
    let mut rows: Vec<(Vec<f64>, Cmp, f64)> = Vec::with_capacity(lp.rows.len() + caps.len());
    for row in &lp.rows {
        let mut dense = vec![0.0; nstruct];
        let mut rhs = row.rhs;
        for &(j, a) in &row.coeffs {
            rhs -= a * maps[j].shift;
            for &(c, s) in &maps[j].terms {
                dense[c] += a * s;
            }
        }
        rows.push((dense, row.cmp, rhs));
    }
    for &(c, cap) in &caps {
        let mut dense = vec![0.0; nstruct];
        dense[c] = 1.0;
        rows.push((dense, Cmp::Le, cap));
    }
    for (dense, cmp, rhs) in rows.iter_mut() {
        // `a·x >= 0` becomes `-a·x <= 0`, which starts from a slack basis.
        if *rhs < 0.0 || (*rhs == 0.0 && *cmp == Cmp::Ge) {
            dense.iter_mut().for_each(|v| *v = -*v);
            *rhs = -*rhs;
            *cmp = match *cmp {
                Cmp::Le => Cmp::Ge,
                Cmp::Ge => Cmp::Le,
                Cmp::Eq => Cmp::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Cmp::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Cmp::Le).count();
    let cols = nstruct + n_slack + n_art;
    let art_start = nstruct + n_slack;
    let w = cols + 1;
    let mut a = vec![0.0; m * w];
    let mut basis = vec![0usize; m];
    let (mut next_slack, mut next_art) = (nstruct, art_start);
    for (i, (dense, cmp, rhs)) in rows.iter().enumerate() {
        a[i * w..i * w + nstruct].copy_from_slice(dense);
        a[i * w + cols] = *rhs;
        match cmp {
            Cmp::Le => {
                a[i * w + next_slack] = 1.0;
                basis[i] = next_slack;
                next_slack += 1;
            }
            Cmp::Ge => {
                a[i * w + next_slack] = -1.0;
                next_slack += 1;
                a[i * w + next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
            Cmp::Eq => {
                a[i * w + next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
        }
    }
    let mut tab = Tableau {
        a,
        rows: m,
        cols,
        basis,
        cost: vec![0.0; w],
    };

    // Phase 1: maximise minus the sum of artificials.
    if n_art > 0 {
        for i in 0..m {
            if tab.basis[i] >= art_start {
                for j in 0..art_start {
                    tab.cost[j] += tab.at(i, j);
                }
                tab.cost[cols] += tab.rhs(i);
            }
        }
        tab.iterate(art_start)?;
        let rhs_scale = 1.0 + rows.iter().map(|r| r.2).fold(0.0, f64::max);
        if tab.cost[cols] > FEAS_TOL * rhs_scale {
            return Err(LpError::Infeasible);
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        for i in 0..m {
            if tab.basis[i] >= art_start {
                if let Some(j) = (0..art_start).find(|&j| tab.at(i, j).abs() > 1e-8) {
                    tab.pivot(i, j);
                }
            }
        }
    }

    // Phase 2.
    let sign = if lp.sense == Sense::Maximize { 1.0 } else { -1.0 };
    let mut c = vec![0.0; cols];
    for (j, map) in maps.iter().enumerate() {
        for &(col, s) in &map.terms {
            c[col] += sign * lp.objective[j] * s;
        }
    }
    tab.cost = vec![0.0; w];
    tab.cost[..cols].copy_from_slice(&c);
    for i in 0..m {
        let cb = if tab.basis[i] < cols { c[tab.basis[i]] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..=cols {
                tab.cost[j] -= cb * tab.at(i, j);
            }
        }
    }
    for i in 0..m {
        tab.cost[tab.basis[i]] = 0.0;
    }
    tab.iterate(art_start)?;

    let mut y = vec![0.0; cols];
    for i in 0..m {
        y[tab.basis[i]] = tab.rhs(i);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|map| map.shift + map.terms.iter().map(|&(c, s)| s * y[c]).sum::<f64>())
        .collect();
    let objective = lp.objective_at(&x);
    Ok(LpSolution { x, objective })
}
