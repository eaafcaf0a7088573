//! `equicorr`: batch runner and calculator for threshold-selection
//! experiments on equicorrelated Gaussian observations.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use equicorr_core::harness::{format_sig6, load_config, reproduce_tables, run_grid, write_csv_path};
use equicorr_core::model::{determined_threshold, exact_risk, ModelParams};
use equicorr_core::thresholds::ThresholdMethod;

/// Default master seed; the EQUICORR_SEED environment variable
/// overrides it, and --seed overrides both.
const DEFAULT_SEED: u64 = 0xC0FFEE;

#[derive(Parser)]
#[command(
    name = "equicorr",
    about = "Threshold selection and Monte Carlo evaluation for high-variance \
             coordinate detection in equicorrelated Gaussian data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment cells of a JSON config and write one CSV.
    Run {
        /// Config file: a JSON array of cells.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Master seed (default: EQUICORR_SEED env var, else a fixed
        /// built-in constant).
        #[arg(long)]
        seed: Option<u64>,
        /// Override the replication count of every cell.
        #[arg(long)]
        reps: Option<usize>,
        /// Worker threads; any value yields byte-identical output.
        #[arg(long, default_value_t = 4)]
        workers: usize,
    },
    /// Run the built-in benchmark grid (both signs of rho) and write
    /// the error, discrepancy, and analytic cross-check CSVs.
    ReproduceTables {
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Replications per cell.
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = 4)]
        workers: usize,
    },
    /// Print the exact expected loss of a fixed cut, or a risk curve.
    Risk {
        #[command(flatten)]
        params: ParamArgs,
        /// Evaluate the risk at this cut.
        #[arg(long, conflicts_with = "curve")]
        c: Option<f64>,
        /// Print `c,risk` for this many cuts over [0, 4*sqrt(sigma0_sq+tau_sq)].
        #[arg(long)]
        curve: Option<usize>,
    },
    /// Print the cut produced by a parameter-only method.
    Threshold {
        /// Method name: determined | fixed (data-driven methods need
        /// observations and are not available here).
        #[arg(long)]
        method: String,
        /// Cut value for the fixed method.
        #[arg(long)]
        c: Option<f64>,
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    m: usize,
    /// Sparsity exponent (p = m^-beta); exactly one of --beta/--p.
    #[arg(long)]
    beta: Option<f64>,
    /// Explicit signal probability.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long = "sigma0-sq")]
    sigma0_sq: f64,
    #[arg(long = "tau-sq")]
    tau_sq: f64,
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    #[arg(long, default_value_t = 1.0)]
    delta0: f64,
    #[arg(long = "delta-a", default_value_t = 1.0)]
    delta_a: f64,
}

impl ParamArgs {
    fn build(&self) -> Result<ModelParams> {
        let params = ModelParams {
            m: self.m,
            beta: self.beta,
            p: self.p,
            sigma0_sq: self.sigma0_sq,
            tau_sq: self.tau_sq,
            rho: self.rho,
            delta0: self.delta0,
            delta_a: self.delta_a,
            eps_sd: 0.0,
            rho1: 0.0,
        };
        params.validate()?;
        Ok(params)
    }
}

fn master_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("EQUICORR_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .with_context(|| format!("EQUICORR_SEED={text:?} is not a u64")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn main() {
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            reps,
            workers,
        } => {
            let mut cells = load_config(&config)?;
            if let Some(reps) = reps {
                for cell in &mut cells {
                    cell.reps = reps;
                }
            }
            let table = run_grid(&cells, master_seed(seed)?, workers)?;
            write_csv_path(&table, &out)?;
            println!(
                "wrote {} ({} cells, {} rows)",
                out.display(),
                table.rows.len(),
                table.rows.iter().map(|(c, _)| c.methods.len() + 1).sum::<usize>()
            );
        }
        Command::ReproduceTables {
            out,
            seed,
            reps,
            workers,
        } => {
            reproduce_tables(&out, master_seed(seed)?, reps, workers)?;
            println!("wrote 5 csv files under {}", out.display());
        }
        Command::Risk { params, c, curve } => {
            let params = params.build()?;
            match (c, curve) {
                (Some(c), None) => {
                    let breakdown = exact_risk(&params, c)?;
                    println!("{:.6}", breakdown.risk);
                }
                (None, Some(points)) => {
                    if points < 2 {
                        bail!("--curve needs at least 2 points");
                    }
                    let hi = 4.0 * (params.sigma0_sq + params.tau_sq).sqrt();
                    println!("c,risk");
                    for g in 0..points {
                        let c = hi * g as f64 / (points as f64 - 1.0);
                        let breakdown = exact_risk(&params, c)?;
                        println!("{},{}", format_sig6(c), format_sig6(breakdown.risk));
                    }
                }
                (None, None) => bail!("provide --c <cut> or --curve <points>"),
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            }
        }
        Command::Threshold { method, c, params } => {
            let params = params.build()?;
            let method = match method.as_str() {
                "determined" => ThresholdMethod::Determined,
                "fixed" => ThresholdMethod::FixedC {
                    c: c.context("--method fixed requires --c")?,
                },
                other if ["T1", "T2", "T3", "algorithm", "top_fraction", "poisson_k"]
                    .contains(&other) =>
                {
                    bail!(
                        "method {other:?} is data-driven; this subcommand only evaluates \
                         parameter-only methods (determined, fixed)"
                    )
                }
                other => bail!("unknown method {other:?}"),
            };
            let cut = match method {
                ThresholdMethod::Determined => determined_threshold(&params)?,
                ThresholdMethod::FixedC { c } => c,
                _ => unreachable!(),
            };
            println!("{cut:.6}");
        }
    }
    Ok(())
}
