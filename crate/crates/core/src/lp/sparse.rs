//! Large programs go to microlp's sparse revised simplex.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::{Cmp, LinearProgram, LpError, LpSolution, Sense};

pub(super) fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let direction = match lp.sense {
        Sense::Maximize => OptimizationDirection::Maximize,
        Sense::Minimize => OptimizationDirection::Minimize,
    };
    let mut problem = Problem::new(direction);
    let vars: Vec<_> = (0..lp.num_vars())
        .map(|j| problem.add_var(lp.objective[j], (lp.lower[j], lp.upper[j])))
        .collect();
    for row in &lp.rows {
        let expr: Vec<_> = row.coeffs.iter().map(|&(j, a)| (vars[j], a)).collect();
        let op = match row.cmp {
            Cmp::Le => ComparisonOp::Le,
            Cmp::Ge => ComparisonOp::Ge,
            Cmp::Eq => ComparisonOp::Eq,
        };
        problem.add_constraint(expr.as_slice(), op, row.rhs);
    }
    let outcome = problem.solve().map_err(|e| match e {
        microlp::Error::Infeasible => LpError::Infeasible,
        microlp::Error::Unbounded => LpError::Unbounded,
        other => LpError::Numeric(other.to_string()),
    })?;
    let solution = outcome
        .into_solution()
        .map_err(|_| LpError::Numeric("solver interrupted".into()))?;
    let x: Vec<f64> = vars.iter().map(|&v| solution.var_value(v)).collect();
    let objective = lp.objective_at(&x);
    Ok(LpSolution { x, objective })
}
