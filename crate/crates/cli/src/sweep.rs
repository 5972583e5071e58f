//! The ε sweep: one independent solve per ε, assembled in descending order.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fbvol_core::freeboundary::{
    density_ratios, estimate_lambda, extract_free_boundary, gradient_bound_fit, linear_growth_check,
    FreeBoundaryReport, GradientFit, LinearGrowth,
};
use fbvol_core::{solve_penalized, solve_penalized_from, ScalarField, Solution};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::io;

/// Everything computed for one ε.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub epsilon: f64,
    pub solution: Solution,
    /// Free boundary with λ statistics (NaN when no node qualifies) and
    /// density ratios for `r = 4h, …, 16h`.
    pub report: FreeBoundaryReport,
    pub growth: Option<LinearGrowth>,
    pub fit: Option<GradientFit>,
    pub vol_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub positivity: f64,
    pub vol_gap: f64,
    pub lambda_mean: f64,
    pub lambda_std: f64,
    pub energy: f64,
    pub iters: usize,
    pub converged: bool,
    /// Tolerance used to decide attainment; not part of `sweep.csv`.
    pub vol_tol: f64,
}

impl SweepRow {
    pub fn attained(&self) -> bool {
        self.vol_gap <= self.vol_tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// Descending ε.
    pub rows: Vec<SweepRow>,
    /// Largest ε whose row attains the volume.
    pub epsilon_attained: Option<f64>,
}

impl SweepReport {
    pub fn from_runs(runs: &[SweepRun], alpha: f64) -> Self {
        let rows: Vec<SweepRow> = runs
            .iter()
            .map(|r| SweepRow {
                epsilon: r.epsilon,
                positivity: r.solution.breakdown.positivity,
                vol_gap: (r.solution.breakdown.positivity - alpha).abs(),
                lambda_mean: r.report.lambda_mean,
                lambda_std: r.report.lambda_std,
                energy: r.solution.breakdown.total,
                iters: r.solution.outer_iters,
                converged: r.solution.converged,
                vol_tol: r.vol_tol,
            })
            .collect();
        let epsilon_attained = rows.iter().find(|r| r.attained()).map(|r| r.epsilon);
        Self { rows, epsilon_attained }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
        w.write_record(["epsilon", "positivity", "vol_gap", "lambda_mean", "lambda_std", "energy", "iters", "converged"])?;
        for r in &self.rows {
            w.write_record([
                io::fmt_f64(r.epsilon),
                io::fmt_f64(r.positivity),
                io::fmt_f64(r.vol_gap),
                io::fmt_f64(r.lambda_mean),
                io::fmt_f64(r.lambda_std),
                io::fmt_f64(r.energy),
                r.iters.to_string(),
                r.converged.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Solves for every ε of the configuration. Solves run in parallel unless
/// `warm_start` is set, in which case each starts from the previous field.
pub fn solve_all(cfg: &RunConfig) -> Result<Vec<SweepRun>> {
    let domain = cfg.domain();
    let bdata = cfg.boundary_data(&domain);
    let one = |eps: f64, init: Option<&ScalarField>| -> Result<SweepRun> {
        let params = cfg.params(eps);
        let sol = match init {
            Some(u) => solve_penalized_from(u, &bdata, &params, &cfg.solver)?,
            None => solve_penalized(domain.clone(), &bdata, &params, &cfg.solver)?,
        };
        Ok(analyse(eps, sol, cfg.vol_tol))
    };
    if cfg.warm_start {
        let mut runs: Vec<SweepRun> = Vec::with_capacity(cfg.epsilon_list.len());
        for &eps in &cfg.epsilon_list {
            let run = one(eps, runs.last().map(|r| &r.solution.field))?;
            runs.push(run);
        }
        Ok(runs)
    } else {
        cfg.epsilon_list.par_iter().map(|&eps| one(eps, None)).collect()
    }
}

/// Free-boundary diagnostics of one solve.
pub fn analyse(epsilon: f64, solution: Solution, vol_tol: Option<f64>) -> SweepRun {
    let u = &solution.field;
    let d = u.domain();
    let h = d.h();
    let mut report = estimate_lambda(u).unwrap_or_else(|_| extract_free_boundary(u));
    let radii: Vec<f64> = (4..=16).map(|k| k as f64 * h).collect();
    if let Ok(t) = density_ratios(u, &radii) {
        report.density = t;
    }
    let growth = linear_growth_check(u, 2.0, None).ok();
    let fit = gradient_bound_fit(u, &[2.0 * h, 4.0 * h, 8.0 * h, 16.0 * h]).ok();
    // two lattice layers along the free boundary
    let edges = report.perimeter / h.powi(d.dim() as i32 - 1);
    let vol_tol = vol_tol.unwrap_or(2.0 * d.cell_measure() * edges.round().max(1.0));
    SweepRun {
        epsilon,
        solution,
        report,
        growth,
        fit,
        vol_tol,
    }
}

/// `eps_<value>` under `out`.
pub fn run_dir(out: &Path, epsilon: f64) -> PathBuf {
    out.join(format!("eps_{}", io::fmt_f64(epsilon)))
}

/// Writes the solution and free-boundary files of one run into `dir`.
pub fn persist_run(dir: &Path, run: &SweepRun) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    io::write_solution(dir, &run.solution)?;
    io::write_fb_csv(&dir.join("fb.csv"), &run.report)?;
    io::write_density_csv(&dir.join("density.csv"), &run.report)?;
    io::write_summary_csv(&dir.join("summary.csv"), &run.report, run.growth.as_ref(), run.fit.as_ref())?;
    Ok(())
}

/// Solves, persists every run under `out/eps_<value>/` and writes
/// `out/sweep.csv`.
pub fn run_epsilon_sweep(cfg: &RunConfig, out: &Path) -> Result<(SweepReport, Vec<SweepRun>)> {
    let runs = solve_all(cfg)?;
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    for run in &runs {
        persist_run(&run_dir(out, run.epsilon), run)?;
    }
    let report = SweepReport::from_runs(&runs, cfg.alpha);
    report.write_csv(&out.join("sweep.csv"))?;
    Ok((report, runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_str;

    fn interval(eps: &str, extra: &str) -> RunConfig {
        let text = format!(
            "problem = \"interval_1d\"\nalpha = 0.5\nepsilon_list = {eps}\nboundary.left = 1\ngeometry.n = 64\n{extra}"
        );
        parse_str(&text, &[]).unwrap()
    }

    #[test]
    fn attainment_in_one_dimension() {
        let cfg = interval("[0.5, 0.36, 0.25, 0.1]", "");
        let runs = solve_all(&cfg).unwrap();
        let rep = SweepReport::from_runs(&runs, cfg.alpha);
        let eps: Vec<f64> = rep.rows.iter().map(|r| r.epsilon).collect();
        assert_eq!(eps, vec![0.5, 0.36, 0.25, 0.1]);
        assert_eq!(rep.epsilon_attained, Some(0.25));
        let h = 1.0 / 64.0;
        assert!(rep.rows.iter().all(|r| r.vol_tol == 2.0 * h));
        // λ = b / s on every row
        for r in &rep.rows {
            assert!((r.lambda_mean - 1.0 / r.positivity).abs() < 0.1, "{r:?}");
        }
    }

    #[test]
    fn attainment_is_stable_under_larger_epsilons() {
        let a = SweepReport::from_runs(&solve_all(&interval("[0.25, 0.1]", "")).unwrap(), 0.5);
        let b = SweepReport::from_runs(&solve_all(&interval("[2.0, 0.25, 0.1]", "")).unwrap(), 0.5);
        assert_eq!(a.epsilon_attained, b.epsilon_attained);
    }

    #[test]
    fn warm_start_reaches_the_same_rows() {
        let cold = SweepReport::from_runs(&solve_all(&interval("[0.36, 0.1]", "")).unwrap(), 0.5);
        let warm = SweepReport::from_runs(&solve_all(&interval("[0.36, 0.1]", "warm_start = true\n")).unwrap(), 0.5);
        for (c, w) in cold.rows.iter().zip(&warm.rows) {
            assert!((c.positivity - w.positivity).abs() <= 2.0 / 64.0);
            assert!((c.energy - w.energy).abs() < 1e-6);
        }
    }

    #[test]
    fn persisted_sweep_is_deterministic_and_round_trips() {
        let cfg = interval("[0.36, 0.1]", "");
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_epsilon_sweep(&cfg, a.path()).unwrap();
        run_epsilon_sweep(&cfg, b.path()).unwrap();
        let sa = std::fs::read(a.path().join("sweep.csv")).unwrap();
        assert_eq!(sa, std::fs::read(b.path().join("sweep.csv")).unwrap());
        let header = String::from_utf8(sa).unwrap();
        assert!(header.starts_with("epsilon,positivity,vol_gap,lambda_mean,lambda_std,energy,iters,converged\n"));

        let dir = run_dir(a.path(), 0.1);
        assert!(dir.ends_with("eps_0.1"));
        let domain = cfg.domain();
        let u = io::read_grid_dump(&dir.join("field.txt"), domain).unwrap();
        let stored = io::read_breakdown_csv(&dir.join("breakdown.csv")).unwrap();
        let again = fbvol_core::total_energy(&u, cfg.p, &cfg.params(0.1)).unwrap();
        assert!((again.total - stored[2]).abs() <= f64::EPSILON * stored[2].abs());
        for f in ["fb.csv", "density.csv", "summary.csv", "trace.csv", "mask.txt"] {
            assert!(dir.join(f).exists(), "{f}");
        }
    }
}
