//! CSV tables. Rows follow sweep order (algorithm, seed, request count), and
//! every real number is printed with six significant digits, so identical
//! results always produce identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use chainsim_core::placement::Algorithm;
use chainsim_core::simulator::SimulationResult;

pub const RESULTS_HEADER: &str = "algorithm,scenario,seed,n_requests,accepted,acceptance_ratio,\
network_utilization,link_util_stddev,lbi_c,lbi_n,lbi_s,lbi_composite,wall_ms";

/// Metric columns averaged in `summary.csv`, in order.
pub const SUMMARY_METRICS: [&str; 7] =
    ["acceptance_ratio", "network_utilization", "link_util_stddev", "lbi_c", "lbi_n", "lbi_s", "lbi_composite"];

/// `%g`-style formatting with six significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub algorithm: String,
    pub scenario: String,
    pub seed: u64,
    pub n_requests: usize,
    pub accepted: usize,
    /// `acceptance_ratio` through `wall_ms`, in header order.
    pub metrics: [f64; 8],
}

impl ResultRow {
    pub fn to_line(&self) -> String {
        let mut cells = vec![
            self.algorithm.clone(),
            self.scenario.clone(),
            self.seed.to_string(),
            self.n_requests.to_string(),
            self.accepted.to_string(),
        ];
        cells.extend(self.metrics.iter().map(|&m| fmt_sig(m)));
        cells.join(",")
    }

    pub fn parse(line: &str) -> Option<Self> {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 13 {
            return None;
        }
        let mut metrics = [0.0; 8];
        for (m, c) in metrics.iter_mut().zip(&cells[5..]) {
            *m = c.parse().ok()?;
        }
        Some(Self {
            algorithm: cells[0].to_string(),
            scenario: cells[1].to_string(),
            seed: cells[2].parse().ok()?,
            n_requests: cells[3].parse().ok()?,
            accepted: cells[4].parse().ok()?,
            metrics,
        })
    }
}

pub fn result_rows(results: &[SimulationResult], timing: bool) -> Vec<ResultRow> {
    results
        .iter()
        .flat_map(|r| {
            r.points.iter().map(move |p| ResultRow {
                algorithm: r.algorithm.name().to_string(),
                scenario: r.scenario.name().to_string(),
                seed: r.seed,
                n_requests: p.n_requests,
                accepted: p.accepted,
                metrics: [
                    p.acceptance_ratio,
                    p.network_utilization,
                    p.link_util_stddev,
                    p.lbi.lbi_c,
                    p.lbi.lbi_n,
                    p.lbi.lbi_s,
                    p.lbi.composite,
                    if timing { p.wall_ms } else { 0.0 },
                ],
            })
        })
        .collect()
}

pub fn results_csv(results: &[SimulationResult], timing: bool) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for row in result_rows(results, timing) {
        out.push_str(&row.to_line());
        out.push('\n');
    }
    out
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-(algorithm, request count) aggregate over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub scenario: String,
    pub n_requests: usize,
    pub runs: usize,
    /// `(mean, std)` for each of [`SUMMARY_METRICS`].
    pub stats: [(f64, f64); 7],
}

impl SummaryRow {
    pub fn mean(&self, metric: &str) -> Option<f64> {
        SUMMARY_METRICS.iter().position(|m| *m == metric).map(|i| self.stats[i].0)
    }
}

pub fn summarize(results: &[SimulationResult]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(Algorithm, usize), (String, Vec<[f64; 7]>)> = BTreeMap::new();
    for r in results {
        for p in &r.points {
            let entry = groups.entry((r.algorithm, p.n_requests)).or_insert_with(|| (r.scenario.name().to_string(), Vec::new()));
            entry.1.push([
                p.acceptance_ratio,
                p.network_utilization,
                p.link_util_stddev,
                p.lbi.lbi_c,
                p.lbi.lbi_n,
                p.lbi.lbi_s,
                p.lbi.composite,
            ]);
        }
    }
    groups
        .into_iter()
        .map(|((algorithm, n_requests), (scenario, samples))| {
            let mut stats = [(0.0, 0.0); 7];
            for (i, s) in stats.iter_mut().enumerate() {
                let column: Vec<f64> = samples.iter().map(|x| x[i]).collect();
                *s = mean_std(&column);
            }
            SummaryRow { algorithm, scenario, n_requests, runs: samples.len(), stats }
        })
        .collect()
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("algorithm,scenario,n_requests,runs");
    for m in SUMMARY_METRICS {
        out.push_str(&format!(",{m}_mean,{m}_std"));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{},{}", r.algorithm.name(), r.scenario, r.n_requests, r.runs));
        for (mean, std) in r.stats {
            out.push_str(&format!(",{},{}", fmt_sig(mean), fmt_sig(std)));
        }
        out.push('\n');
    }
    out
}

/// Writes `results.csv` and `summary.csv` into `dir`, creating it if needed.
pub fn emit_csv(results: &[SimulationResult], dir: &Path, timing: bool) -> io::Result<Vec<SummaryRow>> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), results_csv(results, timing))?;
    let summary = summarize(results);
    fs::write(dir.join("summary.csv"), summary_csv(&summary))?;
    Ok(summary)
}
