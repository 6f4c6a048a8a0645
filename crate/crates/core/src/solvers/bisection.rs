use super::{LoadMode, SolverError, SplitProblem, SplitSolution};

const MAX_ITERATIONS: usize = 200;

/// Amount candidate `j` takes if every candidate is filled up to `level`.
fn fill(p: &SplitProblem, j: usize, level: f64) -> f64 {
    let c = &p.candidates[j];
    let room = match p.mode {
        LoadMode::Absolute => level - c.load,
        LoadMode::Utilization => level * c.capacity - c.load,
    };
    room.clamp(0.0, p.limit(j))
}

fn total_fill(p: &SplitProblem, level: f64) -> f64 {
    (0..p.candidates.len()).map(|j| fill(p, j, level)).sum()
}

fn level_of(p: &SplitProblem, j: usize, amount: f64) -> f64 {
    let c = &p.candidates[j];
    match p.mode {
        LoadMode::Absolute => c.load + amount,
        LoadMode::Utilization => (c.load + amount) / c.capacity,
    }
}

/// Minimizes the peak resulting load `max_j level(load_j + ratio_j * demand)`
/// by bisecting on the peak level; each probe fills candidates greedily up to
/// the level. Stops when the bracket is narrower than `tol` (in level units).
/// Ratios are water-filled in candidate order so earlier candidates take
/// their full share first.
pub fn greedy_bisection_minmax(p: &SplitProblem, tol: f64) -> Result<SplitSolution, SolverError> {
    p.validate()?;
    if !p.is_feasible() {
        return Err(SolverError::Infeasible);
    }
    let n = p.candidates.len();
    let mut low = (0..n).map(|j| level_of(p, j, 0.0)).fold(f64::NEG_INFINITY, f64::max);
    let mut high = (0..n).map(|j| level_of(p, j, p.demand)).fold(f64::NEG_INFINITY, f64::max);
    if total_fill(p, low) >= p.demand {
        high = low;
    }
    let tol = tol.max(f64::EPSILON * high.abs());
    let mut iterations = 0;
    while high - low > tol && iterations < MAX_ITERATIONS {
        let mid = 0.5 * (low + high);
        if total_fill(p, mid) >= p.demand {
            high = mid;
        } else {
            low = mid;
        }
        iterations += 1;
    }

    let mut remaining = p.demand;
    let mut amounts = vec![0.0; n];
    for (j, a) in amounts.iter_mut().enumerate() {
        *a = fill(p, j, high).min(remaining);
        remaining -= *a;
    }
    // Rounding can leave a sliver; place it wherever the limit still allows.
    if remaining > 0.0 {
        for (j, a) in amounts.iter_mut().enumerate() {
            let extra = (p.limit(j) - *a).max(0.0).min(remaining);
            *a += extra;
            remaining -= extra;
        }
    }
    let ratios: Vec<f64> = amounts.iter().map(|a| a / p.demand).collect();
    let objective_value = p.peak_load(&ratios);
    Ok(SplitSolution { ratios, objective_value })
}
