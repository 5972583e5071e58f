//! Grid dumps and CSV reports.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! dumped field reads back bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use fbvol_core::freeboundary::{FreeBoundaryReport, GradientFit, LinearGrowth};
use fbvol_core::{EnergyBreakdown, GridDomain, ScalarField, Solution, TraceRow};

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Plain-text matrix: `nx ny h` on the first line, then one lattice row per
/// line from `j = 0` up.
pub fn write_grid_dump(path: &Path, u: &ScalarField) -> Result<()> {
    let d = u.domain();
    let mut w = create(path)?;
    writeln!(w, "{} {} {}", d.nx(), d.ny(), fmt_f64(d.h()))?;
    for row in u.data().chunks(d.nx()) {
        let line: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

/// Same layout as [`write_grid_dump`] with 1 on `{u > 0}` and 0 elsewhere.
pub fn write_mask_dump(path: &Path, u: &ScalarField) -> Result<()> {
    let d = u.domain();
    let mut w = create(path)?;
    writeln!(w, "{} {} {}", d.nx(), d.ny(), fmt_f64(d.h()))?;
    for (j, row) in u.data().chunks(d.nx()).enumerate() {
        let line: Vec<&str> = row
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let n = d.index(i, j);
                if d.is_present(n) && *v > 0.0 {
                    "1"
                } else {
                    "0"
                }
            })
            .collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a grid dump back onto `domain`, checking the header against it.
pub fn read_grid_dump(path: &Path, domain: Arc<GridDomain>) -> Result<ScalarField> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut lines = BufReader::new(f).lines();
    let header = lines.next().context("empty grid dump")??;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 {
        bail!("grid dump header must be `nx ny h`");
    }
    let (nx, ny, h): (usize, usize, f64) = (parts[0].parse()?, parts[1].parse()?, parts[2].parse()?);
    if nx != domain.nx() || ny != domain.ny() || h != domain.h() {
        bail!("grid dump is {nx}x{ny} with h={h}, domain is {}x{} with h={}", domain.nx(), domain.ny(), domain.h());
    }
    let mut data = Vec::with_capacity(nx * ny);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let before = data.len();
        for tok in line.split_whitespace() {
            data.push(tok.parse::<f64>().with_context(|| format!("bad value `{tok}`"))?);
        }
        if data.len() - before != nx {
            bail!("grid dump row has {} values, expected {nx}", data.len() - before);
        }
    }
    Ok(ScalarField::from_data(domain, data)?)
}

pub fn write_trace_csv(path: &Path, trace: &[TraceRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["iter", "dirichlet", "penalty", "total", "positivity", "toggles"])?;
    for r in trace {
        let b = &r.breakdown;
        w.write_record([
            r.iter.to_string(),
            fmt_f64(b.dirichlet),
            fmt_f64(b.penalty),
            fmt_f64(b.total),
            fmt_f64(b.positivity),
            r.toggles.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_breakdown_csv(path: &Path, b: &EnergyBreakdown) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["dirichlet", "penalty", "total", "positivity"])?;
    w.write_record([b.dirichlet, b.penalty, b.total, b.positivity].map(fmt_f64))?;
    w.flush()?;
    Ok(())
}

/// `(dirichlet, penalty, total, positivity)` from a breakdown CSV.
pub fn read_breakdown_csv(path: &Path) -> Result<[f64; 4]> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let rec = r.records().next().context("breakdown CSV has no row")??;
    let mut out = [0.0; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = rec.get(k).context("short breakdown row")?.parse()?;
    }
    Ok(out)
}

pub fn write_fb_csv(path: &Path, rep: &FreeBoundaryReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["node", "x", "y", "flux", "nx", "ny"])?;
    for f in &rep.nodes {
        w.write_record([
            f.node.to_string(),
            fmt_f64(f.position[0]),
            fmt_f64(f.position[1]),
            fmt_f64(f.flux),
            fmt_f64(f.normal[0]),
            fmt_f64(f.normal[1]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_density_csv(path: &Path, rep: &FreeBoundaryReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["cx", "cy", "r", "ratio"])?;
    for r in &rep.density.rows {
        w.write_record([r.center[0], r.center[1], r.r, r.ratio].map(fmt_f64))?;
    }
    w.flush()?;
    Ok(())
}

/// One summary row; quantities that could not be computed are NaN.
pub fn write_summary_csv(
    path: &Path,
    rep: &FreeBoundaryReport,
    growth: Option<&LinearGrowth>,
    fit: Option<&GradientFit>,
) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["lambda_mean", "lambda_std", "perimeter", "c_low", "C_high", "C_fit", "gamma_fit"])?;
    w.write_record(
        [
            rep.lambda_mean,
            rep.lambda_std,
            rep.perimeter,
            growth.map_or(f64::NAN, |g| g.c_low),
            growth.map_or(f64::NAN, |g| g.c_high),
            fit.map_or(f64::NAN, |f| f.c),
            fit.map_or(f64::NAN, |f| f.gamma),
        ]
        .map(fmt_f64),
    )?;
    w.flush()?;
    Ok(())
}

/// Field, positivity mask, trace and breakdown of a solve under `dir`.
pub fn write_solution(dir: &Path, sol: &Solution) -> Result<()> {
    write_grid_dump(&dir.join("field.txt"), &sol.field)?;
    write_mask_dump(&dir.join("mask.txt"), &sol.field)?;
    write_trace_csv(&dir.join("trace.csv"), &sol.trace)?;
    write_breakdown_csv(&dir.join("breakdown.csv"), &sol.breakdown)?;
    Ok(())
}
