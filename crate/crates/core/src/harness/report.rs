use std::collections::BTreeMap;
use std::io::Write;

use super::ReplicationRecord;
use crate::error::{Error, Result};
use crate::exact::exact_sum;

/// Per-`n` aggregate of the replication records.
#[derive(Debug, Clone, PartialEq)]
pub struct NSummary {
    pub n: usize,
    pub replications: usize,
    pub mean_mise_adaptive: f64,
    pub sd_mise_adaptive: f64,
    pub mean_mise_oracle: f64,
    pub sd_mise_oracle: f64,
    /// `mean_mise_adaptive / mean_mise_oracle`, `NaN` if the oracle mean is zero.
    pub ratio: f64,
    pub m_star: usize,
    pub minimax_rate: f64,
    /// `b²_{m*} ∨ δ^T_{m*} / n` when known.
    pub benchmark: Option<f64>,
    /// Counts of each selected dimension.
    pub m_hat_histogram: BTreeMap<usize, usize>,
}

/// Mean and sample standard deviation (zero for a single value).
fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = exact_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = exact_sum(values.iter().map(|v| (v - mean).powi(2)));
    (mean, (ss / (n - 1.0)).sqrt())
}

fn group_by_n(records: &[ReplicationRecord]) -> BTreeMap<usize, Vec<&ReplicationRecord>> {
    let mut groups: BTreeMap<usize, Vec<&ReplicationRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.n).or_default().push(r);
    }
    groups
}

/// Aggregates records per sample size. Sums are exact, so the result does
/// not depend on record order.
pub fn summarize(records: &[ReplicationRecord], benchmarks: &BTreeMap<usize, f64>) -> Vec<NSummary> {
    group_by_n(records)
        .into_iter()
        .map(|(n, group)| {
            let adaptive: Vec<f64> = group.iter().map(|r| r.mise_adaptive).collect();
            let oracle: Vec<f64> = group.iter().map(|r| r.mise_oracle).collect();
            let (mean_a, sd_a) = mean_sd(&adaptive);
            let (mean_o, sd_o) = mean_sd(&oracle);
            let mut hist = BTreeMap::new();
            for r in &group {
                *hist.entry(r.m_hat).or_insert(0) += 1;
            }
            NSummary {
                n,
                replications: group.len(),
                mean_mise_adaptive: mean_a,
                sd_mise_adaptive: sd_a,
                mean_mise_oracle: mean_o,
                sd_mise_oracle: sd_o,
                ratio: if mean_o > 0.0 { mean_a / mean_o } else { f64::NAN },
                m_star: group.iter().map(|r| r.m_star).max().unwrap_or(0),
                minimax_rate: group[0].minimax_rate,
                benchmark: benchmarks.get(&n).copied(),
                m_hat_histogram: hist,
            }
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(summary: &[NSummary], writer: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "n",
        "replications",
        "mean_mise_adaptive",
        "sd_mise_adaptive",
        "mean_mise_oracle",
        "sd_mise_oracle",
        "ratio",
        "m_star",
        "minimax_rate",
        "benchmark",
        "m_hat_histogram",
    ])?;
    for s in summary {
        let hist = s
            .m_hat_histogram
            .iter()
            .map(|(m, c)| format!("{m}:{c}"))
            .collect::<Vec<_>>()
            .join(" ");
        wtr.write_record([
            s.n.to_string(),
            s.replications.to_string(),
            s.mean_mise_adaptive.to_string(),
            s.sd_mise_adaptive.to_string(),
            s.mean_mise_oracle.to_string(),
            s.sd_mise_oracle.to_string(),
            s.ratio.to_string(),
            s.m_star.to_string(),
            s.minimax_rate.to_string(),
            s.benchmark.map(|b| b.to_string()).unwrap_or_default(),
            hist,
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Least-squares slope of `log(mise)` on `log(n)`.
pub fn rate_slope(n_grid: &[usize], mise_means: &[f64]) -> Result<f64> {
    if n_grid.len() != mise_means.len() {
        return Err(Error::Dimension(format!(
            "{} sample sizes but {} means",
            n_grid.len(),
            mise_means.len()
        )));
    }
    if n_grid.len() < 3 {
        return Err(Error::Dimension("slope needs at least 3 points".into()));
    }
    if let Some(bad) = mise_means.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("mean MISE {bad} is not positive")));
    }
    if n_grid.contains(&0) {
        return Err(Error::Domain("sample sizes must be positive".into()));
    }
    let x: Vec<f64> = n_grid.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = mise_means.iter().map(|v| v.ln()).collect();
    let k = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / k, y.iter().sum::<f64>() / k);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("sample sizes must not all be equal".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRatio {
    pub n: usize,
    pub mean_mise_adaptive: f64,
    pub mean_mise_oracle: f64,
    /// `max(mean oracle MISE, minimax_rate / n)`.
    pub denominator: f64,
    pub ratio: f64,
    /// Set when the oracle mean fell below the guard and the guard was used.
    pub guarded: bool,
    pub benchmark: Option<f64>,
}

/// Adaptive-to-oracle risk ratios per sample size.
pub fn oracle_ratio_report(records: &[ReplicationRecord], benchmarks: &BTreeMap<usize, f64>) -> Vec<OracleRatio> {
    summarize(records, benchmarks)
        .into_iter()
        .map(|s| {
            let guard = s.minimax_rate / s.n as f64;
            let guarded = !(s.mean_mise_oracle >= guard);
            let denominator = if guarded { guard } else { s.mean_mise_oracle };
            OracleRatio {
                n: s.n,
                mean_mise_adaptive: s.mean_mise_adaptive,
                mean_mise_oracle: s.mean_mise_oracle,
                denominator,
                ratio: s.mean_mise_adaptive / denominator,
                guarded,
                benchmark: s.benchmark,
            }
        })
        .collect()
}
