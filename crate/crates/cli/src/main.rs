//! `stricttest`: classify stochastic exponentials, bubbles and pairs of
//! diffusion laws from a configuration file.
//!
//! Exit codes: 0 conclusive, 2 unknown, 1 input error.

mod grid;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use stricttest_core::bubbles::{bubble_classify, driftless_dichotomy, VolModel};
use stricttest_core::classify::classify_martingale;
use stricttest_core::coeffspec::{parse_problem, ProblemSpec};
use stricttest_core::error::SimError;
use stricttest_core::mcsim::{self, Estimator, SimConfig};
use stricttest_core::quad::ProbeOptions;
use stricttest_core::septime::{arrangement_of_exponential, mutual_arrangement, SdePair};

use grid::GridAxis;

#[derive(Debug, Parser)]
#[command(
    name = "stricttest",
    version,
    about = "Martingale, bubble and arrangement tests for one-dimensional diffusions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
struct ProbeArgs {
    /// Mixed absolute/relative tolerance of numeric tail probes.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Maximum number of ladder rungs per tail probe.
    #[arg(long = "ladder-depth", default_value_t = 60)]
    ladder_depth: usize,
}

impl ProbeArgs {
    fn options(self) -> Result<ProbeOptions> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            bail!("--tol must lie in (0, 1), got {}", self.tol);
        }
        if self.ladder_depth < 4 {
            bail!(
                "--ladder-depth must be at least 4, got {}",
                self.ladder_depth
            );
        }
        Ok(ProbeOptions {
            tol: self.tol,
            depth: self.ladder_depth,
            ..ProbeOptions::default()
        })
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Direct,
    Auxiliary,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether Z is a strict local, non-UI or UI martingale.
    Classify {
        config: PathBuf,
        #[command(flatten)]
        probe: ProbeArgs,
    },
    /// Bubble type of a local-volatility price process on (0, inf).
    Bubble {
        config: PathBuf,
        #[command(flatten)]
        probe: ProbeArgs,
    },
    /// Mutual arrangement of two laws: the `mu_tilde`/`sigma_tilde` pair when
    /// given, otherwise the law of Y against the auxiliary diffusion.
    Arrangement {
        config: PathBuf,
        #[command(flatten)]
        probe: ProbeArgs,
    },
    /// Classify over a parameter grid and write `params..., verdict` rows.
    Sweep {
        config: PathBuf,
        /// `name=start:stop:step` or `name=v1,v2,...`; repeat for more axes,
        /// the first one varying slowest.
        #[arg(long = "grid", required = true)]
        grid: Vec<String>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        probe: ProbeArgs,
    },
    /// Monte-Carlo estimate of E Z_T.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 10_000)]
        paths: u64,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        /// `l_n,r_n`; arctan quantile 0.999 toward each endpoint when absent.
        #[arg(long)]
        truncation: Option<String>,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Both)]
        estimator: EstimatorArg,
        /// Per-path CSV prefix: writes `<out>.direct.csv` and/or
        /// `<out>.auxiliary.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        probe: ProbeArgs,
    },
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Conclusive,
    Unknown,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(Outcome::Conclusive) => ExitCode::SUCCESS,
        Ok(Outcome::Unknown) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read_config(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_spec(path: &Path) -> Result<ProblemSpec> {
    let text = read_config(path)?;
    parse_problem(&text).with_context(|| format!("invalid config {}", path.display()))
}

fn outcome(conclusive: bool) -> Outcome {
    if conclusive {
        Outcome::Conclusive
    } else {
        Outcome::Unknown
    }
}

fn run(command: Command) -> Result<Outcome> {
    let started = Instant::now();
    match command {
        Command::Classify { config, probe } => {
            let opts = probe.options()?;
            let spec = load_spec(&config)?;
            let c = classify_martingale(&spec, &opts);
            print!(
                "{}",
                report::classification(&config, &spec, &c, started.elapsed())
            );
            Ok(outcome(c.verdict.is_conclusive()))
        }
        Command::Bubble { config, probe } => {
            let opts = probe.options()?;
            let text = read_config(&config)?;
            let model = VolModel::from_config(&text)
                .with_context(|| format!("invalid bubble model {}", config.display()))?;
            let r = bubble_classify(&model, &opts)?;
            let dichotomy = (model.mu0 == 0.0)
                .then(|| driftless_dichotomy(&model, &opts))
                .transpose()?;
            print!(
                "{}",
                report::bubble(&config, &model, &r, dichotomy.as_ref(), started.elapsed())
            );
            Ok(outcome(r.label() != "unknown"))
        }
        Command::Arrangement { config, probe } => {
            let opts = probe.options()?;
            let spec = load_spec(&config)?;
            let paired = spec.mu_tilde.is_some() || spec.sigma_tilde.is_some();
            let a = if paired {
                mutual_arrangement(&SdePair::from_spec(&spec), &opts)
            } else {
                arrangement_of_exponential(&spec, &opts)
            };
            print!(
                "{}",
                report::arrangement(&config, &spec, paired, &a, started.elapsed())
            );
            Ok(outcome(a.flags().iter().all(|(_, f)| f.is_known())))
        }
        Command::Sweep {
            config,
            grid,
            out,
            probe,
        } => {
            let opts = probe.options()?;
            let spec = load_spec(&config)?;
            let axes = grid
                .iter()
                .map(|g| g.parse::<GridAxis>())
                .collect::<Result<Vec<_>>>()?;
            for axis in &axes {
                if spec.params.get(&axis.name).is_none() {
                    bail!("`{}` is not a parameter of {}", axis.name, config.display());
                }
            }
            let points = grid::product(&axes);
            if points.is_empty() {
                bail!("the grid is empty");
            }
            let names: Vec<&str> = axes.iter().map(|a| a.name.as_str()).collect();
            let rows: Vec<Result<String>> = mcsim::thread_pool().install(|| {
                points
                    .par_iter()
                    .map(|values| {
                        let bindings: Vec<(&str, f64)> =
                            names.iter().copied().zip(values.iter().copied()).collect();
                        let s = spec.with_params(&bindings)?;
                        let verdict = classify_martingale(&s, &opts).verdict;
                        let cells: Vec<String> =
                            values.iter().map(|v| grid::format_value(*v)).collect();
                        Ok(format!("{},{}", cells.join(","), verdict))
                    })
                    .collect()
            });
            let mut csv = format!("{},verdict\n", names.join(","));
            let mut unknown = 0;
            for row in rows {
                let row = row?;
                unknown += usize::from(row.ends_with(",Unknown"));
                csv.push_str(&row);
                csv.push('\n');
            }
            match out {
                Some(path) => {
                    fs::write(&path, &csv)
                        .with_context(|| format!("cannot write {}", path.display()))?;
                    eprintln!(
                        "{} rows written to {} ({unknown} unknown, {:.2?})",
                        points.len(),
                        path.display(),
                        started.elapsed()
                    );
                }
                None => print!("{csv}"),
            }
            Ok(outcome(unknown == 0))
        }
        Command::Simulate {
            config,
            horizon,
            step,
            paths,
            seed,
            truncation,
            estimator,
            out,
            probe,
        } => {
            let opts = probe.options()?;
            let spec = load_spec(&config)?;
            let truncation = truncation.map(|t| grid::parse_pair(&t)).transpose()?;
            let cfg = SimConfig {
                horizon,
                step,
                paths,
                truncation,
                seed,
                estimator: match estimator {
                    EstimatorArg::Direct => Estimator::Direct,
                    EstimatorArg::Auxiliary => Estimator::Auxiliary,
                    EstimatorArg::Both => Estimator::Both,
                },
            };
            let levels = cfg.levels(&spec)?;
            let c = classify_martingale(&spec, &opts);
            let direct = matches!(cfg.estimator, Estimator::Direct | Estimator::Both)
                .then(|| mcsim::simulate_ez_with(&spec, &cfg, levels, &c))
                .transpose();
            let survival = matches!(cfg.estimator, Estimator::Auxiliary | Estimator::Both)
                .then(|| mcsim::simulate_survival_with(&spec, &cfg, levels, &c))
                .transpose();
            let (direct, survival) = match (direct, survival) {
                (Err(SimError::Refused(m)), _) | (_, Err(SimError::Refused(m))) => {
                    println!("refused: {m}");
                    return Ok(Outcome::Unknown);
                }
                (d, s) => (d?, s?),
            };
            if let Some(prefix) = &out {
                if let Some(d) = &direct {
                    let path = prefix.with_extension("direct.csv");
                    let f = fs::File::create(&path)
                        .with_context(|| format!("cannot write {}", path.display()))?;
                    mcsim::write_direct_csv(&d.records, std::io::BufWriter::new(f))?;
                }
                if let Some(s) = &survival {
                    let path = prefix.with_extension("auxiliary.csv");
                    let f = fs::File::create(&path)
                        .with_context(|| format!("cannot write {}", path.display()))?;
                    mcsim::write_survival_csv(&s.records, std::io::BufWriter::new(f))?;
                }
            }
            print!(
                "{}",
                report::simulation(
                    &config,
                    &cfg,
                    &c,
                    direct.as_ref().map(|d| &d.report),
                    survival.as_ref().map(|s| &s.report),
                    started.elapsed()
                )
            );
            Ok(Outcome::Conclusive)
        }
    }
}
