use alloc::vec::Vec;

use num_traits::Float;

use super::extract::{estimate_lambda, extract_free_boundary, for_ball};
use crate::energy::dirichlet_p_energy;
use crate::error::{invalid, Error, Result};
use crate::grid::{GridDomain, ScalarField};
use crate::solver::{harmonic_replacement, lattice_ball, SolverConfig};
use crate::stencil::cell_center_gradient;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearGrowth {
    pub c_low: f64,
    pub c_high: f64,
    pub count: usize,
}

/// Bounds of `u(x) / dist(x, {u = 0})` over positive interior nodes at
/// distance ≥ `margin · h` from ∂Ω, and within `max_dist` of the zero set
/// when given. Distances are exact lattice-point distances to the nearest
/// zero node.
pub fn linear_growth_check(
    u: &ScalarField,
    margin: f64,
    max_dist: Option<f64>,
) -> Result<LinearGrowth> {
    let d = u.domain();
    let data = u.data();
    // the nearest zero node always has a positive 4-neighbour
    let zeros: Vec<[f64; 2]> = (0..d.len())
        .filter(|&m| d.is_present(m) && data[m] <= 0.0 && d.neighbours4(m).any(|k| data[k] > 0.0))
        .map(|m| d.position(m))
        .collect();
    if zeros.is_empty() {
        return Err(Error::EmptyFreeBoundary);
    }
    let bdist = d.boundary_distance_field();
    let limit = margin * d.h() * (1.0 - 1e-12);
    let (mut lo, mut hi, mut count) = (f64::INFINITY, 0.0f64, 0usize);
    for &n in d.interior_nodes() {
        if !(data[n] > 0.0) || bdist[n] < limit {
            continue;
        }
        let x = d.position(n);
        let dist = zeros
            .iter()
            .map(|z| (x[0] - z[0]).hypot(x[1] - z[1]))
            .fold(f64::INFINITY, f64::min);
        if max_dist.is_some_and(|m| dist > m) {
            continue;
        }
        let q = data[n] / dist;
        lo = lo.min(q);
        hi = hi.max(q);
        count += 1;
    }
    if count == 0 {
        return Err(Error::NoQualifyingNodes("no positive node away from the boundary".into()));
    }
    Ok(LinearGrowth {
        c_low: lo,
        c_high: hi,
        count,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientFit {
    /// `C` and `γ` of `m(r)/λ − 1 ≈ C r^γ`.
    pub c: f64,
    pub gamma: f64,
    pub lambda: f64,
    /// `(r, m(r))` samples.
    pub samples: Vec<(f64, f64)>,
    /// Set when `m(r) = λ` at every radius; then `c = gamma = 0`.
    pub degenerate: bool,
}

/// Fits `sup_{B_r}|∇u| ≤ λ(1 + C r^γ)` around the free boundary.
///
/// `m(r)` is the largest cell-center gradient over cells inside `{u > 0}` whose
/// centers lie within `r` of some free-boundary node at lattice distance
/// ≥ 2 from ∂Ω, and `λ` the mean flux.
pub fn gradient_bound_fit(u: &ScalarField, radii: &[f64]) -> Result<GradientFit> {
    if radii.len() < 3 {
        return Err(Error::InsufficientData("gradient fit needs at least 3 radii".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(invalid("radii must be positive"));
    }
    let rep = estimate_lambda(u)?;
    let lambda = rep.lambda_mean;
    let d = u.domain();
    let data = u.data();
    let centers: Vec<[f64; 2]> = rep
        .nodes
        .iter()
        .filter(|f| d.is_deep(f.node, 2))
        .map(|f| f.position)
        .collect();
    let cells: Vec<([f64; 2], f64)> = d
        .cells()
        .filter(|&c| cell_corners(d, c).iter().all(|&m| data[m] > 0.0))
        .map(|c| (cell_center(d, c), cell_center_gradient(d, data, c)))
        .collect();
    let mut samples = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut m: f64 = 0.0;
        for (x, g) in &cells {
            if *g > m && centers.iter().any(|c| (x[0] - c[0]).hypot(x[1] - c[1]) <= r) {
                m = *g;
            }
        }
        samples.push((r, m));
    }
    let excess: Vec<f64> = samples.iter().map(|(_, m)| m / lambda - 1.0).collect();
    if excess.iter().all(|e| *e <= 1e-9) {
        return Ok(GradientFit {
            c: 0.0,
            gamma: 0.0,
            lambda,
            samples,
            degenerate: true,
        });
    }
    let xs: Vec<f64> = samples.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = excess.iter().map(|e| e.max(1e-12).ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    Ok(GradientFit {
        c: intercept.exp(),
        gamma: slope,
        lambda,
        samples,
        degenerate: false,
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

fn cell_corners(d: &GridDomain, c: usize) -> Vec<usize> {
    if d.is_1d() {
        alloc::vec![c, c + 1]
    } else {
        let nx = d.nx();
        alloc::vec![c, c + 1, c + nx, c + nx + 1]
    }
}

fn cell_center(d: &GridDomain, c: usize) -> [f64; 2] {
    let x = d.position(c);
    let h = 0.5 * d.h();
    if d.is_1d() {
        [x[0] + h, x[1]]
    } else {
        [x[0] + h, x[1] + h]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NondegeneracySample {
    pub center: [f64; 2],
    pub r: f64,
    /// `∫_{B_r} |∇(u − v)|^p` with `v` the p-harmonic replacement.
    pub lhs: f64,
    /// `|B_r ∩ {u = 0}| · ((1/r) ⨍_{B_r} u)^p`.
    pub rhs: f64,
}

impl NondegeneracySample {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NondegeneracyReport {
    pub samples: Vec<NondegeneracySample>,
    /// Smallest `lhs / rhs` over samples with `rhs > 0`.
    pub c_min: f64,
}

/// Both sides of the nondegeneracy integral inequality on up to
/// `max_samples` balls of radius `r` centered at free-boundary nodes spread
/// evenly along the free boundary. Balls must stay clear of ∂Ω by `2h`.
pub fn nondegeneracy_samples(
    u: &ScalarField,
    config: &SolverConfig,
    r: f64,
    max_samples: usize,
) -> Result<NondegeneracyReport> {
    let d = u.domain();
    let h = d.h();
    if !(r >= 2.0 * h) || max_samples == 0 {
        return Err(invalid("need r ≥ 2h and at least one sample"));
    }
    let rep = extract_free_boundary(u);
    if rep.is_empty() {
        return Err(Error::EmptyFreeBoundary);
    }
    let bdist = d.boundary_distance_field();
    let eligible: Vec<usize> = rep
        .nodes
        .iter()
        .filter(|f| bdist[f.node] >= r + 2.0 * h)
        .map(|f| f.node)
        .collect();
    if eligible.is_empty() {
        return Err(Error::NoQualifyingNodes("no free-boundary node far enough from ∂Ω".into()));
    }
    let step = eligible.len().div_ceil(max_samples);
    let cell = d.cell_measure();
    let p = config.p;
    let mut samples = Vec::new();
    for &n in eligible.iter().step_by(step) {
        let center = d.position(n);
        let ball = lattice_ball(d, center, r);
        let (v, _) = harmonic_replacement(u, &ball, config)?;
        let diff = ScalarField::from_data(
            u.domain_arc().clone(),
            u.data().iter().zip(v.data()).map(|(a, b)| a - b).collect(),
        )?;
        let lhs = dirichlet_p_energy(&diff, p)?;
        let (mut zeros, mut total, mut sum) = (0usize, 0usize, 0.0);
        for_ball(d, n, r, |m| {
            total += 1;
            sum += u.get(m).max(0.0);
            if u.get(m) <= 0.0 {
                zeros += 1;
            }
        });
        let avg = sum / total as f64;
        let rhs = zeros as f64 * cell * (avg / r).powf(p);
        samples.push(NondegeneracySample { center, r, lhs, rhs });
    }
    let c_min = samples
        .iter()
        .filter(|s| s.rhs > 0.0)
        .map(|s| s.ratio())
        .fold(f64::INFINITY, f64::min);
    Ok(NondegeneracyReport { samples, c_min })
}
