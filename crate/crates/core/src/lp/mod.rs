//! Linear programs with bounded variables.
//!
//! Two interchangeable backends sit behind [`LinearProgram::solve`]: a dense
//! tableau simplex with Bland's pivoting rule (bit-reproducible, used for
//! desk-scale problems) and the sparse revised simplex of `microlp` for the
//! few instances whose dense tableau would not fit comfortably in memory.

mod dense;
mod sparse;

use thiserror::Error;

/// Largest dense tableau (rows × columns) solved in-repo.
pub const DENSE_LIMIT: usize = 400_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Pick by problem size.
    Auto,
    Dense,
    Sparse,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("infeasible")]
    Infeasible,
    #[error("unbounded")]
    Unbounded,
    #[error("{0}")]
    Numeric(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            objective: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn add_var(&mut self, obj: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(obj);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, cmp: Cmp, rhs: f64) {
        self.rows.push(Row { coeffs, cmp, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Rough size of the dense tableau the in-repo backend would build.
    pub fn dense_size(&self) -> usize {
        let mut cols = 0;
        let mut rows = self.rows.len();
        for (l, u) in self.lower.iter().zip(&self.upper) {
            let split = !l.is_finite() && !u.is_finite() || (*l < 0.0 && *u > 0.0);
            cols += if split { 2 } else { 1 };
            if l.is_finite() && u.is_finite() {
                rows += if split { 2 } else { 1 };
            }
        }
        rows * (cols + 2 * rows + 1)
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        self.solve_with(Backend::Auto)
    }

    pub fn solve_with(&self, backend: Backend) -> Result<LpSolution, LpError> {
        let use_dense = match backend {
            Backend::Dense => true,
            Backend::Sparse => false,
            Backend::Auto => self.dense_size() <= DENSE_LIMIT,
        };
        let sol = match (use_dense, backend) {
            (true, Backend::Auto) => match dense::solve(self) {
                Err(LpError::Numeric(_)) => sparse::solve(self)?,
                other => other?,
            },
            (true, _) => dense::solve(self)?,
            (false, _) => sparse::solve(self)?,
        };
        let viol = self.max_violation(&sol.x);
        let scale = 1.0 + sol.x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if viol > 1e-7 * scale {
            return Err(LpError::Numeric(format!("solution violates constraints by {viol:e}")));
        }
        Ok(sol)
    }

    /// Largest violation of rows or bounds at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (j, v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match row.cmp {
                Cmp::Le => lhs - row.rhs,
                Cmp::Ge => row.rhs - lhs,
                Cmp::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// Hashable identity of a row's left-hand side, for de-duplication.
pub fn row_key(coeffs: &[(usize, f64)]) -> Vec<(usize, u64)> {
    let mut key: Vec<(usize, u64)> = coeffs.iter().map(|&(j, a)| (j, (a + 0.0).to_bits())).collect();
    key.sort_unstable();
    key
}
