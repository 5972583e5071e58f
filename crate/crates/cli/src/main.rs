#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use fbvol::io::fmt_f64;
use fbvol::sweep::{analyse, persist_run, run_epsilon_sweep};
use fbvol::{parse_config, run_verification_suite, RunConfig};
use fbvol_core::oracles::{oracle_1d_curve, oracle_1d_minimizer, oracle_annulus_curve, oracle_annulus_minimizer};
use fbvol_core::solve_penalized;

#[derive(Parser)]
#[command(name = "fbvol", version, about = "Volume-penalized p-Dirichlet free-boundary toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for one ε and write the field and free-boundary reports.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// ε to solve for; defaults to the smallest in `epsilon_list`.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Solve for every ε in `epsilon_list` and write sweep.csv.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Minimize the 1D ramp energy over the support length.
    Oracle1d {
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 4000)]
        s_grid: usize,
        /// Print the scanned curve `s,energy` instead of the minimizer.
        #[arg(long)]
        curve: bool,
    },
    /// Minimize the radial annulus energy over the support radius.
    AnnulusOracle {
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        c0: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 2000)]
        r_grid: usize,
        /// Print the scanned curve `r,energy` instead of the minimizer.
        #[arg(long)]
        curve: bool,
    },
    /// Run the configured property checks and write verify.csv.
    Verify {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// `key=value` override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn load(&self) -> Result<(RunConfig, PathBuf)> {
        let mut cfg = parse_config(&self.config, &self.set)?;
        if let Some(seed) = self.seed {
            cfg.solver.seed = seed;
        }
        let out = self.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
        std::fs::create_dir_all(&out)?;
        Ok((cfg, out))
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` when a verification check did not pass.
fn run(cli: Cli) -> Result<bool> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Solve { run, epsilon } => {
            let (cfg, dir) = run.load()?;
            let eps = epsilon.unwrap_or(*cfg.epsilon_list.last().expect("nonempty list"));
            if !(eps > 0.0) {
                bail!("epsilon must be positive");
            }
            let domain = cfg.domain();
            let bdata = cfg.boundary_data(&domain);
            let sol = solve_penalized(domain, &bdata, &cfg.params(eps), &cfg.solver)?;
            let r = analyse(eps, sol, cfg.vol_tol);
            persist_run(&dir, &r)?;
            let b = r.solution.breakdown;
            writeln!(out, "epsilon,positivity,dirichlet,penalty,total,lambda_mean,lambda_std,iters,converged")?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                fmt_f64(eps),
                fmt_f64(b.positivity),
                fmt_f64(b.dirichlet),
                fmt_f64(b.penalty),
                fmt_f64(b.total),
                fmt_f64(r.report.lambda_mean),
                fmt_f64(r.report.lambda_std),
                r.solution.outer_iters,
                r.solution.converged
            )?;
            Ok(true)
        }
        Command::Sweep { run } => {
            let (cfg, dir) = run.load()?;
            let (report, _) = run_epsilon_sweep(&cfg, &dir)?;
            out.write_all(&std::fs::read(dir.join("sweep.csv"))?)?;
            match report.epsilon_attained {
                Some(e) => writeln!(out, "# epsilon_attained = {}", fmt_f64(e))?,
                None => writeln!(out, "# epsilon_attained = none")?,
            }
            Ok(true)
        }
        Command::Oracle1d { b, p, epsilon, alpha, s_grid, curve } => {
            if curve {
                writeln!(out, "s,energy")?;
                for (s, e) in oracle_1d_curve(b, p, epsilon, alpha, s_grid)? {
                    writeln!(out, "{},{}", fmt_f64(s), fmt_f64(e))?;
                }
            } else {
                let o = oracle_1d_minimizer(b, p, epsilon, alpha, s_grid)?;
                writeln!(out, "s_star,lambda_star,energy,branch")?;
                writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_f64(o.s_star),
                    fmt_f64(o.lambda_star),
                    fmt_f64(o.energy),
                    o.branch.name()
                )?;
            }
            Ok(true)
        }
        Command::AnnulusOracle { delta, c0, p, n, epsilon, r_grid, curve } => {
            if curve {
                writeln!(out, "r,energy")?;
                for (r, e) in oracle_annulus_curve(delta, c0, p, n, epsilon, r_grid)? {
                    writeln!(out, "{},{}", fmt_f64(r), fmt_f64(e))?;
                }
            } else {
                let o = oracle_annulus_minimizer(delta, c0, p, n, epsilon, r_grid)?;
                writeln!(out, "r_star,energy")?;
                writeln!(out, "{},{}", fmt_f64(o.r_star), fmt_f64(o.energy))?;
            }
            Ok(true)
        }
        Command::Verify { run } => {
            let (cfg, dir) = run.load()?;
            let report = run_verification_suite(&cfg);
            let path = dir.join("verify.csv");
            report.write_csv(&path)?;
            out.write_all(&std::fs::read(Path::new(&path))?)?;
            Ok(report.all_pass())
        }
    }
}
