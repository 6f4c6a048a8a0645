use super::lp::{Constraint, LinearProgram, LpError, Relation};
use super::{SolverError, SplitProblem, SplitSolution};

/// Exact minimum of `sum_j ratio_j * unit_cost_j` subject to `sum_j ratio_j = 1`
/// and `ratio_j * demand <= min(link_cap_j, capacity_j - load_j)`, solved with
/// the two-phase simplex.
pub fn simplex_min_cost(p: &SplitProblem) -> Result<SplitSolution, SolverError> {
    p.validate()?;
    let n = p.candidates.len();
    let mut constraints =
        vec![Constraint { coeffs: vec![1.0; n], relation: Relation::Eq, rhs: 1.0 }];
    for j in 0..n {
        let bound = p.limit(j) / p.demand;
        if bound < 1.0 {
            let mut coeffs = vec![0.0; n];
            coeffs[j] = 1.0;
            constraints.push(Constraint { coeffs, relation: Relation::Le, rhs: bound });
        }
    }
    let lp = LinearProgram {
        objective: p.candidates.iter().map(|c| c.unit_cost).collect(),
        constraints,
    };
    let sol = lp.solve().map_err(|e| match e {
        LpError::Infeasible => SolverError::Infeasible,
        LpError::Unbounded => SolverError::InvalidProblem("unbounded split LP".into()),
    })?;
    let ratios = sol.x;
    let objective_value = p.total_cost(&ratios);
    Ok(SplitSolution { ratios, objective_value })
}
