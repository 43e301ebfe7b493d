use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use newsvendor_core::ambiguity::{build_confidence_set, extreme_set, mle, prune_dominated, AmbiguitySet};
use newsvendor_core::dro::{cs_solve, full_minimax, CsConfig, MinimaxConfig};
use newsvendor_core::fd::{fd_solve, LineSearchConfig};
use newsvendor_core::model::sample_demand;
use newsvendor_core::{DemandModel, Family, Instance};
use newsvendor_harness::config::ExperimentConfig;
use newsvendor_harness::experiment::run_matrix;
use newsvendor_harness::io::{read_ambiguity, read_json, read_samples, write_samples};
use newsvendor_harness::report::{render_markdown, write_report};

#[derive(Parser)]
#[command(name = "newsvendor", version, about = "Budget-constrained multi-period newsvendor solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Cs,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Stage {
    Confidence,
    Pruned,
    Extreme,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for a known demand model with the fixed-distribution heuristic.
    SolveFixed {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distributionally robust solve over an ambiguity set or one built from samples.
    SolveDro {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, conflicts_with_all = ["samples", "family"])]
        ambiguity: Option<PathBuf>,
        #[arg(long, requires = "family")]
        samples: Option<PathBuf>,
        #[arg(long)]
        family: Option<Family>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long = "grid-points", default_value_t = 5)]
        grid_points: usize,
        #[arg(long, value_enum, default_value_t = Solver::Cs)]
        solver: Solver,
        #[arg(long = "timeout-s", default_value_t = 120.0)]
        timeout_s: f64,
        /// Iteration trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum-likelihood parameters of a sample file.
    Estimate {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        family: Family,
    },
    /// Confidence-set grid (optionally pruned or reduced to extremes) as JSONL.
    BuildAmbiguity {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        family: Family,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long = "grid-points", default_value_t = 5)]
        grid_points: usize,
        #[arg(long, value_enum, default_value_t = Stage::Confidence)]
        stage: Stage,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw demand paths from a model as CSV.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the experiment matrix (desk defaults without --config).
    Experiment {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long = "timeout-s")]
        timeout_s: Option<f64>,
        /// Print the effective configuration and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Summarize a results directory into markdown and SVG.
    Report {
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn fitted_set(samples: &Path, family: Family, alpha: f64, m: usize) -> Result<AmbiguitySet> {
    let data = read_samples(samples)?;
    let est = mle(&data, family)?;
    Ok(build_confidence_set(&est, alpha, m)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SolveFixed { instance, model, out } => {
            let inst: Instance = read_json(&instance)?;
            let model: DemandModel = read_json(&model)?;
            let report = fd_solve(&inst, &model, &LineSearchConfig::default())?;
            emit(out.as_deref(), &serde_json::to_string_pretty(&report)?)
        }
        Command::SolveDro {
            instance,
            ambiguity,
            samples,
            family,
            alpha,
            grid_points,
            solver,
            timeout_s,
            trace,
            out,
        } => {
            let inst: Instance = read_json(&instance)?;
            let set = match (ambiguity, samples, family) {
                (Some(path), _, _) => read_ambiguity(&path)?,
                (None, Some(path), Some(f)) => fitted_set(&path, f, alpha, grid_points)?,
                _ => bail!("give either --ambiguity or --samples with --family"),
            };
            if !(timeout_s > 0.0 && timeout_s.is_finite()) {
                bail!("--timeout-s must be positive");
            }
            let minimax = MinimaxConfig { timeout: Some(Duration::from_secs_f64(timeout_s)), ..MinimaxConfig::default() };
            let report = match solver {
                Solver::Cs => cs_solve(&inst, &set, &CsConfig { minimax, ..CsConfig::default() })?,
                Solver::Full => full_minimax(&inst, &set, &minimax)?,
            };
            if let Some(path) = trace {
                let file = fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
                report.write_trace_csv(io::BufWriter::new(file))?;
            }
            emit(out.as_deref(), &serde_json::to_string_pretty(&report)?)
        }
        Command::Estimate { samples, family } => {
            let est = mle(&read_samples(&samples)?, family)?;
            emit(None, &serde_json::to_string_pretty(&est.model)?)
        }
        Command::BuildAmbiguity { samples, family, alpha, grid_points, stage, out } => {
            let set = fitted_set(&samples, family, alpha, grid_points)?;
            let set = match stage {
                Stage::Confidence => set,
                Stage::Pruned => prune_dominated(&set)?,
                Stage::Extreme => extreme_set(&set)?,
            };
            let mut buf = Vec::new();
            set.write_jsonl(&mut buf)?;
            emit(out.as_deref(), std::str::from_utf8(&buf)?)
        }
        Command::Sample { model, n, seed, out } => {
            let model: DemandModel = read_json(&model)?;
            let samples = sample_demand(&model, n, seed)?;
            let mut buf = Vec::new();
            write_samples(&samples, &mut buf)?;
            emit(out.as_deref(), std::str::from_utf8(&buf)?)
        }
        Command::Experiment { config, out, seed, workers, timeout_s, print_config } => {
            let mut cfg = match config {
                Some(path) => read_json::<ExperimentConfig>(&path)?,
                None => ExperimentConfig::desk(),
            };
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = timeout_s {
                cfg.timeout_s = t;
            }
            cfg.validate()?;
            if print_config {
                return emit(None, &serde_json::to_string_pretty(&cfg)?);
            }
            let res = run_matrix(&cfg, workers)?;
            eprintln!(
                "{} instances, {} with errors; results in {}",
                res.instances,
                res.failures,
                cfg.output_dir.display()
            );
            Ok(())
        }
        Command::Report { out } => {
            let (summary, files) = write_report(&out)?;
            for f in &files {
                eprintln!("wrote {}", f.display());
            }
            emit(None, &render_markdown(&summary))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
