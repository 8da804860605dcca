use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use npiv::basis::{BasisFamily, BasisKind};
use npiv::galerkin::{Sample, ThresholdForm};
use npiv::harness::{self, ExperimentConfig};
use npiv::selection::{adaptive_estimate, PenaltyConfig};
use npiv::{Error, Result};

#[derive(Parser)]
#[command(name = "npiv", version, about = "Adaptive Galerkin estimation for nonparametric instrumental regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Cosine,
    Trig,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the adaptive estimator to a `y,z,w` CSV file.
    Estimate {
        data: PathBuf,
        #[arg(long, default_value_t = npiv::selection::KAPPA_IID)]
        kappa: f64,
        #[arg(long, value_enum, default_value_t = BasisArg::Cosine)]
        basis: BasisArg,
        /// Compare ‖[T̂]⁻¹‖ rather than its square against n.
        #[arg(long)]
        unsquared: bool,
        /// Largest candidate dimension (default ⌊n^{1/4}⌋).
        #[arg(long)]
        max_dim: Option<usize>,
        /// Write the selection trace here instead of stdout.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Draw one synthetic sample and print it as CSV.
    Simulate {
        config: PathBuf,
        /// Sample size (default: first entry of n_grid).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        rep: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run the Monte Carlo experiment described by a config file.
    Experiment {
        config: PathBuf,
        /// Overrides `outputs` from the config.
        #[arg(long)]
        outputs: Option<PathBuf>,
    },
    /// Run the experiment and report log-log MISE slopes.
    Rates { config: PathBuf },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn stdout_csv_err(e: csv::Error) -> Error {
    Error::csv("<stdout>", e)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate {
            data,
            kappa,
            basis,
            unsquared,
            max_dim,
            trace,
        } => {
            let sample = Sample::read_csv(&data)?;
            let basis = BasisFamily::new(match basis {
                BasisArg::Cosine => BasisKind::ConstantPlusCosine,
                BasisArg::Trig => BasisKind::FullTrigonometric,
            });
            let config = PenaltyConfig {
                kappa,
                threshold_form: if unsquared { ThresholdForm::Unsquared } else { ThresholdForm::Squared },
                max_dimension: max_dim,
                ..PenaltyConfig::iid()
            };
            let fit = adaptive_estimate(&sample, &basis, &basis, &config)?;
            println!("n = {}", sample.len());
            println!("m_hat = {}", fit.trace.m_selected);
            println!("M_hat = {}", fit.trace.m_hat_cap);
            println!("thresholded = {}", fit.estimate.thresholded);
            let theta: Vec<String> = fit.estimate.theta.iter().map(|v| v.to_string()).collect();
            println!("theta = [{}]", theta.join(", "));
            match trace {
                Some(path) => {
                    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                    fit.trace.write_csv(file).map_err(|e| Error::csv(&path, e))?;
                }
                None => {
                    println!();
                    fit.trace.write_csv(std::io::stdout().lock()).map_err(stdout_csv_err)?;
                }
            }
        }
        Command::Simulate { config, n, rep, output } => {
            let config = ExperimentConfig::from_file(&config)?;
            let sim = config.design.build()?;
            let n = n.unwrap_or(config.n_grid[0]);
            let sample = harness::draw_sample(&config, &sim, n, rep)?;
            match output {
                Some(path) => sample.write_csv(&path)?,
                None => sample.to_csv_writer(std::io::stdout().lock()).map_err(stdout_csv_err)?,
            }
        }
        Command::Experiment { config, outputs } => {
            let mut config = ExperimentConfig::from_file(&config)?;
            if outputs.is_some() {
                config.outputs = outputs;
            }
            let out = harness::run_experiment(&config)?;
            let mut stdout = std::io::stdout().lock();
            let dep = config.design.dependence;
            writeln!(
                stdout,
                "dependence = {} (absolutely continuous pair laws: {})",
                dep.label(),
                if dep.has_pair_densities() { "yes" } else { "no" }
            )
            .map_err(|e| Error::io("<stdout>", e))?;
            harness::write_summary_csv(&out.summary, &mut stdout).map_err(stdout_csv_err)?;
            if let Some(dir) = &config.outputs {
                writeln!(stdout, "records written to {}", dir.join("records.csv").display())
                    .map_err(|e| Error::io("<stdout>", e))?;
            }
        }
        Command::Rates { config } => {
            let config = ExperimentConfig::from_file(&config)?;
            let out = harness::run_experiment(&config)?;
            println!("n,mean_mise_adaptive,mean_mise_oracle,minimax_rate,m_star,M_minus,benchmark,growth_ratio");
            for s in &out.summary {
                let q = &out.theory[&s.n];
                println!(
                    "{},{},{},{},{},{},{},{}",
                    s.n,
                    s.mean_mise_adaptive,
                    s.mean_mise_oracle,
                    s.minimax_rate,
                    s.m_star,
                    q.m_minus,
                    s.benchmark.map(|b| b.to_string()).unwrap_or_default(),
                    q.growth_ratio
                );
            }
            let grid: Vec<usize> = out.summary.iter().map(|s| s.n).collect();
            let column = |f: fn(&harness::NSummary) -> f64| -> Vec<f64> { out.summary.iter().map(f).collect() };
            let slope = |values: Vec<f64>| match harness::rate_slope(&grid, &values) {
                Ok(s) => format!("{s:.4}"),
                Err(e) => format!("n/a ({e})"),
            };
            println!();
            println!("slope_adaptive = {}", slope(column(|s| s.mean_mise_adaptive)));
            println!("slope_oracle = {}", slope(column(|s| s.mean_mise_oracle)));
            println!("slope_minimax = {}", slope(column(|s| s.minimax_rate)));
        }
    }
    Ok(())
}
