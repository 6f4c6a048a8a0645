use crate::topology::PhysicalNetwork;

/// Weights of the composite load-balance objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self { alpha: 1.0 / 3.0, beta: 1.0 / 3.0, gamma: 1.0 / 3.0 }
    }
}

impl ObjectiveWeights {
    pub fn is_valid(&self) -> bool {
        let w = [self.alpha, self.beta, self.gamma];
        w.iter().all(|x| *x >= 0.0 && x.is_finite()) && w.iter().sum::<f64>() > 0.0
    }
}

/// Imbalance of ECN compute, link bandwidth and switch table usage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadBalanceIndicators {
    /// Peak over mean ECN utilization (>= 1).
    pub lbi_c: f64,
    /// Population standard deviation of link utilization (>= 0).
    pub lbi_n: f64,
    /// Peak over mean switch table utilization (>= 1).
    pub lbi_s: f64,
    /// Peak over mean link utilization, reported alongside `lbi_n`.
    pub link_peak_ratio: f64,
    /// Composite objective under the default weights.
    pub composite: f64,
}

impl LoadBalanceIndicators {
    pub fn from_utilizations(ecn: &[f64], links: &[f64], switches: &[f64]) -> Self {
        let lbi_c = peak_over_mean(ecn);
        let lbi_n = population_std(links);
        let lbi_s = peak_over_mean(switches);
        let mut lbi = Self {
            lbi_c,
            lbi_n,
            lbi_s,
            link_peak_ratio: peak_over_mean(links),
            composite: 0.0,
        };
        lbi.composite = composite_objective(&lbi, &ObjectiveWeights::default());
        lbi
    }

    pub fn with_weights(mut self, w: &ObjectiveWeights) -> Self {
        self.composite = composite_objective(&self, w);
        self
    }
}

/// `max / mean`, defined as 1 when the mean is zero.
pub(crate) fn peak_over_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 1.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean <= 0.0 {
        return 1.0;
    }
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max) / mean
}

pub(crate) fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

pub fn compute_lbi(net: &PhysicalNetwork) -> LoadBalanceIndicators {
    let ecn: Vec<f64> = net.ecns().map(|n| n.compute_utilization()).collect();
    let links: Vec<f64> = net.links().iter().map(|l| l.utilization()).collect();
    let switches: Vec<f64> = net.switches().map(|n| n.switch_load / n.switch_capacity).collect();
    LoadBalanceIndicators::from_utilizations(&ecn, &links, &switches)
}

pub fn composite_objective(lbi: &LoadBalanceIndicators, w: &ObjectiveWeights) -> f64 {
    w.alpha * lbi.lbi_c + w.beta * lbi.lbi_n + w.gamma * lbi.lbi_s
}
