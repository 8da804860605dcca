//! Seeded Monte Carlo experiments comparing the adaptive estimator with the
//! infeasible oracle-dimension estimator.
//!
//! Every replication draws from its own ChaCha8 stream, keyed by the config
//! seed and the pair `(n, rep)`, so results do not depend on scheduling.

mod config;
mod report;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dgp::generate_sample_with;
use crate::error::{Error, Result};
use crate::galerkin::{assemble, l2_error, threshold_ls_estimate_with, Sample};
use crate::selection::adaptive_estimate;
use crate::theory::{oracle_benchmark, theoretical_quantities, TheoreticalQuantities};

pub use config::{CaseKind, DesignConfig, ExperimentConfig, OperatorKind, SignPattern, SimulationDesign};
pub use report::{
    oracle_ratio_report, rate_slope, summarize, write_summary_csv, NSummary, OracleRatio,
};

pub const RECORD_HEADER: [&str; 9] = [
    "n",
    "rep",
    "m_hat",
    "M_cap",
    "mise_adaptive",
    "m_star",
    "mise_oracle",
    "minimax_rate",
    "thresholded_frac",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub n: usize,
    pub rep: usize,
    pub m_hat: usize,
    /// Random truncation index `M̂`.
    #[serde(rename = "M_cap")]
    pub m_cap: usize,
    pub mise_adaptive: f64,
    pub m_star: usize,
    pub mise_oracle: f64,
    pub minimax_rate: f64,
    #[serde(rename = "thresholded_frac")]
    pub thresholded_fraction: f64,
}

/// Random stream of replication `rep` at sample size `n`.
pub fn replication_rng(seed: u64, n: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | rep as u64);
    rng
}

/// Population quantities for one sample size, shared by all replications.
pub fn quantities_for(config: &ExperimentConfig, sim: &SimulationDesign, n: usize) -> Result<TheoreticalQuantities> {
    theoretical_quantities(&sim.design, &sim.phi, &sim.case, n, config.penalty.cap(n))
}

/// Draws the sample of replication `rep` at size `n`.
pub fn draw_sample(config: &ExperimentConfig, sim: &SimulationDesign, n: usize, rep: usize) -> Result<Sample> {
    let mut rng = replication_rng(config.seed, n, rep);
    generate_sample_with(&sim.design, &sim.phi, &sim.error, &sim.dependence, n, &mut rng)
}

pub fn run_replication(config: &ExperimentConfig, n: usize, rep: usize) -> Result<ReplicationRecord> {
    config.validate()?;
    let sim = config.design.build()?;
    let theory = quantities_for(config, &sim, n)?;
    replicate(config, &sim, &theory, n, rep)
}

fn replicate(
    config: &ExperimentConfig,
    sim: &SimulationDesign,
    theory: &TheoreticalQuantities,
    n: usize,
    rep: usize,
) -> Result<ReplicationRecord> {
    let sample = draw_sample(config, sim, n, rep)?;
    let basis = sim.basis();
    let fit = adaptive_estimate(&sample, basis, basis, &config.penalty)?;
    let oracle_system = match fit.candidate(theory.m_star) {
        Some(est) => est.clone(),
        None => {
            let system = assemble(&sample, theory.m_star, basis, basis)?;
            threshold_ls_estimate_with(&system, config.penalty.threshold_form)
        }
    };
    Ok(ReplicationRecord {
        n,
        rep,
        m_hat: fit.trace.m_selected,
        m_cap: fit.trace.m_hat_cap,
        mise_adaptive: l2_error(&fit.estimate, &sim.phi),
        m_star: theory.m_star,
        mise_oracle: l2_error(&oracle_system, &sim.phi),
        minimax_rate: theory.minimax_rate,
        thresholded_fraction: fit.thresholded_fraction(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    /// Records sorted by `(n, rep)`.
    pub records: Vec<ReplicationRecord>,
    pub summary: Vec<NSummary>,
    /// `b²_{m*} ∨ δ^T_{m*} / n` per sample size.
    pub benchmarks: BTreeMap<usize, f64>,
    pub theory: BTreeMap<usize, TheoreticalQuantities>,
}

/// Runs every `(n, rep)` pair and, if `outputs` is set, writes
/// `records.csv` and `summary.csv` there.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let sim = config.design.build()?;
    let theory: BTreeMap<usize, TheoreticalQuantities> = config
        .n_grid
        .iter()
        .map(|&n| Ok((n, quantities_for(config, &sim, n)?)))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = config
        .n_grid
        .iter()
        .flat_map(|&n| (0..config.replications).map(move |rep| (n, rep)))
        .collect();
    let run = |&(n, rep): &(usize, usize)| replicate(config, &sim, &theory[&n], n, rep);
    let mut records: Vec<ReplicationRecord> = if config.parallel {
        jobs.par_iter().map(run).collect::<Result<_>>()?
    } else {
        jobs.iter().map(run).collect::<Result<_>>()?
    };
    records.sort_by_key(|r| (r.n, r.rep));
    let benchmarks: BTreeMap<usize, f64> = theory.iter().map(|(&n, q)| (n, oracle_benchmark(q, n))).collect();
    let summary = summarize(&records, &benchmarks);
    if let Some(dir) = &config.outputs {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_records_file(dir.join("records.csv"), &records)?;
        let path = dir.join("summary.csv");
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        write_summary_csv(&summary, std::io::BufWriter::new(file)).map_err(|e| Error::csv(&path, e))?;
    }
    Ok(ExperimentOutput {
        records,
        summary,
        benchmarks,
        theory,
    })
}

pub fn write_records<W: Write>(records: &[ReplicationRecord], writer: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(RECORD_HEADER)?;
    for r in records {
        wtr.serialize(RecordRow::from(r))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_records_file(path: impl AsRef<Path>, records: &[ReplicationRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_records(records, std::io::BufWriter::new(file)).map_err(|e| Error::csv(path, e))
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<ReplicationRecord>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?;
    if headers.iter().ne(RECORD_HEADER) {
        return Err(Error::Sample(format!("{}: unexpected header", path.display())));
    }
    rdr.deserialize().map(|row| row.map_err(|e| Error::csv(path, e))).collect()
}

// header is written explicitly, rows go through serde without one
#[derive(Serialize)]
struct RecordRow<'a>(
    usize,
    usize,
    usize,
    usize,
    &'a f64,
    usize,
    &'a f64,
    &'a f64,
    &'a f64,
);

impl<'a> From<&'a ReplicationRecord> for RecordRow<'a> {
    fn from(r: &'a ReplicationRecord) -> Self {
        RecordRow(
            r.n,
            r.rep,
            r.m_hat,
            r.m_cap,
            &r.mise_adaptive,
            r.m_star,
            &r.mise_oracle,
            &r.minimax_rate,
            &r.thresholded_fraction,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text_design: &str, extra: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml_str(&format!(
            "seed = 7\nreplications = 2\nn_grid = [200, 400]\n{extra}\n[design]\n{text_design}"
        ))
        .unwrap()
    }

    const PP: &str = "case = \"PP\"\np = 2.0\na = 1.0\nJ = 4\nr = 1.0\nsigma_eps = 0.5\nc_endo = 0.3\n";

    #[test]
    fn replication_is_deterministic() {
        let cfg = config(PP, "");
        let a = run_replication(&cfg, 400, 1).unwrap();
        let b = run_replication(&cfg, 400, 1).unwrap();
        assert_eq!(a, b);
        assert!(a.m_hat <= a.m_cap);
        assert!(a.mise_adaptive >= 0.0 && a.mise_oracle >= 0.0);
        let other = run_replication(&cfg, 400, 0).unwrap();
        assert_ne!(a.mise_adaptive, other.mise_adaptive);
    }

    #[test]
    fn tiny_samples_have_unit_cap() {
        let cfg = config(PP, "");
        let r = run_replication(&cfg, 15, 0).unwrap();
        assert_eq!((r.m_cap, r.m_hat), (1, 1));
    }

    #[test]
    fn noiseless_identity_design_is_accurate() {
        let design = "case = \"PP\"\np = 2.0\na = 1.0\nJ = 2\nr = 0.25\nsigma_eps = 0.0\nc_endo = 0.0\noperator = \"identity\"\n";
        let cfg = config(design, "");
        let r = run_replication(&cfg, 10_000, 0).unwrap();
        assert!(r.mise_adaptive < 1e-3, "{}", r.mise_adaptive);
    }

    #[test]
    fn record_csv_round_trip() {
        let cfg = config(PP, "");
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.records.len(), 4);
        let mut buf = Vec::new();
        write_records(&out.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,rep,m_hat,M_cap,mise_adaptive,m_star,mise_oracle,minimax_rate,thresholded_frac\n"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_records_file(&path, &out.records).unwrap();
        assert_eq!(read_records(&path).unwrap(), out.records);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            format!("seed = 1\nreplications = 0\nn_grid = [100]\n[design]\n{PP}"),
            format!("seed = 1\nreplications = 1\nn_grid = [200, 100]\n[design]\n{PP}"),
            format!("seed = 1\nreplications = 1\nn_grid = [100]\n[design]\n{}", PP.replace("a = 1.0", "a = 0.4")),
            format!("seed = 1\nreplications = 1\nn_grid = [100]\nbogus = 3\n[design]\n{PP}"),
        ];
        for text in bad {
            assert!(matches!(ExperimentConfig::from_toml_str(&text), Err(Error::Config(_))), "{text}");
        }
    }
}
