//! Numeric kernels behind the multipath heuristics: a greedy-bisection
//! min-max splitter and a simplex-based min-cost splitter.

mod bisection;
pub mod lp;
mod min_cost;

use thiserror::Error;

pub use bisection::greedy_bisection_minmax;
pub use min_cost::simplex_min_cost;

/// How the min-max splitter measures a candidate's load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// `(load + assigned) / capacity`
    #[default]
    Utilization,
    /// `load + assigned`
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub load: f64,
    pub capacity: f64,
    pub unit_cost: f64,
}

/// Split `demand` across candidates. `link_caps[j]` bounds the amount (in
/// demand units) candidate `j` can receive over the network.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitProblem {
    pub candidates: Vec<SplitCandidate>,
    pub demand: f64,
    pub link_caps: Vec<f64>,
    pub mode: LoadMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSolution {
    /// Fraction of the demand per candidate; sums to 1.
    pub ratios: Vec<f64>,
    pub objective_value: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("split problem is infeasible")]
    Infeasible,
    #[error("invalid split problem: {0}")]
    InvalidProblem(String),
}

impl SplitProblem {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidProblem(m.to_string()));
        if self.candidates.is_empty() {
            return bad("no candidates");
        }
        if self.link_caps.len() != self.candidates.len() {
            return bad("one link cap per candidate");
        }
        if !(self.demand > 0.0 && self.demand.is_finite()) {
            return bad("demand must be positive");
        }
        for c in &self.candidates {
            if !(c.load >= 0.0 && c.capacity >= c.load && c.capacity > 0.0) || !c.unit_cost.is_finite() {
                return bad("candidate loads must lie within positive capacities");
            }
        }
        if self.link_caps.iter().any(|c| !(*c >= 0.0)) {
            return bad("link caps must be nonnegative");
        }
        Ok(())
    }

    /// Most candidate `j` can absorb: limited by its link cap and spare capacity.
    pub fn limit(&self, j: usize) -> f64 {
        let c = &self.candidates[j];
        self.link_caps[j].min(c.capacity - c.load).max(0.0)
    }

    pub fn is_feasible(&self) -> bool {
        let total: f64 = (0..self.candidates.len()).map(|j| self.limit(j).min(self.demand)).sum();
        total >= self.demand * (1.0 - 1e-12)
    }

    /// Peak resulting load of a ratio vector, measured in this problem's mode.
    pub fn peak_load(&self, ratios: &[f64]) -> f64 {
        self.candidates
            .iter()
            .zip(ratios)
            .map(|(c, r)| {
                let after = c.load + r * self.demand;
                match self.mode {
                    LoadMode::Absolute => after,
                    LoadMode::Utilization => after / c.capacity,
                }
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn total_cost(&self, ratios: &[f64]) -> f64 {
        self.candidates.iter().zip(ratios).map(|(c, r)| c.unit_cost * r).sum()
    }
}
