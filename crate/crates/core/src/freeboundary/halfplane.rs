use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::grid::{BoundaryData, GridDomain, ScalarField, SegmentTag};
use crate::solver::relax::relax_until;
use crate::solver::{Ctx, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeProfile {
    /// `inf_j α_j`.
    pub alpha_est: f64,
    /// `(2^{-j}, α_j)` with `α_j = sup_{B⁺_{2^{-j}}} u / x_N`.
    pub levels: Vec<(f64, f64)>,
    /// `(r, sup_{B⁺_r} |u − α x_N| / r)` at the dyadic radii.
    pub residual_curve: Vec<(f64, f64)>,
}

/// Dyadic slope estimates of a field on the half-disk lattice that vanishes
/// on the base row. Levels need `2^{-j} ≥ 2h`; at least 3 are required.
pub fn halfplane_slope_profile(u: &ScalarField) -> Result<SlopeProfile> {
    let d = u.domain();
    check_halfdisk_field(u)?;
    let h = d.h();
    let mut radii = Vec::new();
    let mut r = 1.0;
    while r >= 2.0 * h * (1.0 - 1e-12) {
        radii.push(r);
        r *= 0.5;
    }
    if radii.len() < 3 {
        return Err(Error::InsufficientData("fewer than 3 dyadic levels resolvable".into()));
    }
    let levels: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| {
            let a = upper_half(d, r)
                .map(|(n, x)| u.get(n) / x[1])
                .fold(0.0, f64::max);
            (r, a)
        })
        .collect();
    let alpha_est = levels.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
    let residual_curve = radii.iter().map(|&r| (r, residual_at(u, alpha_est, r))).collect();
    Ok(SlopeProfile {
        alpha_est,
        levels,
        residual_curve,
    })
}

/// `sup_{B⁺_r} |u − α x_N| / r` over interior nodes.
pub fn residual_at(u: &ScalarField, alpha: f64, r: f64) -> f64 {
    upper_half(u.domain(), r)
        .map(|(n, x)| (u.get(n) - alpha * x[1]).abs())
        .fold(0.0, f64::max)
        / r
}

fn upper_half(d: &GridDomain, r: f64) -> impl Iterator<Item = (usize, [f64; 2])> + '_ {
    let rr = r * (1.0 + 1e-12);
    d.interior_nodes().iter().filter_map(move |&n| {
        let x = d.position(n);
        (x[1] > 0.0 && x[0].hypot(x[1]) <= rr).then_some((n, x))
    })
}

fn check_halfdisk_field(u: &ScalarField) -> Result<()> {
    let d = u.domain();
    if d.is_1d() || d.origin()[1] != 0.0 {
        return Err(invalid("field must live on a half-disk lattice"));
    }
    for &n in d.interior_nodes() {
        if !(u.get(n) >= 0.0) {
            return Err(invalid("field must be nonnegative"));
        }
    }
    for &(n, tag) in d.boundary_nodes() {
        if tag == SegmentTag::Base && u.get(n) != 0.0 {
            return Err(invalid("field must vanish on the base row"));
        }
    }
    Ok(())
}

/// Half-disk problem with data `x_N` on the arc, reduced to `δ₀ x_N` on a
/// cap.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessConfig {
    /// Half-disk resolution (`h = 1/n`).
    pub n: usize,
    pub delta0: f64,
    /// Polar angle of the cap center, in `(0, π)`.
    pub cap_angle: f64,
    /// Angular width of the reduced cap. The data ramps back to `x_N` over
    /// a further quarter of this width on each side.
    pub cap_width: f64,
    pub solver: SolverConfig,
}

impl FlatnessConfig {
    pub fn new(n: usize, p: f64, delta0: f64) -> Self {
        Self {
            n,
            delta0,
            cap_angle: core::f64::consts::FRAC_PI_2,
            cap_width: core::f64::consts::FRAC_PI_4,
            solver: SolverConfig::new(p),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.delta0) {
            return Err(invalid("delta0 must lie in [0, 1]"));
        }
        let pi = core::f64::consts::PI;
        if !(self.cap_angle > 0.0 && self.cap_angle < pi) {
            return Err(invalid("cap center must lie on the upper arc"));
        }
        if !(self.cap_width > 0.0 && self.cap_width < pi) {
            return Err(invalid("cap width must lie in (0, π)"));
        }
        self.solver.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessResult {
    /// `sup ψ / x_N` over interior nodes with `|x| < 1/4`.
    pub gamma_measured: f64,
    pub field: ScalarField,
    pub converged: bool,
    pub sweeps: usize,
}

/// Boundary data of the flatness problem on `domain`.
pub fn flatness_boundary_data(domain: &GridDomain, cfg: &FlatnessConfig) -> Result<BoundaryData> {
    cfg.validate()?;
    let half = 0.5 * cfg.cap_width;
    let ramp = 0.25 * cfg.cap_width;
    BoundaryData::from_fn(domain, None, |tag, x| {
        if tag == SegmentTag::Base {
            return 0.0;
        }
        let off = (x[1].atan2(x[0]) - cfg.cap_angle).abs();
        let t = ((off - half) / ramp).clamp(0.0, 1.0);
        x[1] * (cfg.delta0 + (1.0 - cfg.delta0) * t)
    })
}

/// Solves the p-harmonic problem of [`FlatnessConfig`] by relaxation from
/// `x_N` and measures the slope ratio near the origin. `converged` is false
/// when the sweep cap `solver.relax_iters` was reached.
pub fn flatness_decay_check(cfg: &FlatnessConfig) -> Result<FlatnessResult> {
    let domain = Arc::new(GridDomain::build_halfdisk(cfg.n)?);
    let bdata = flatness_boundary_data(&domain, cfg)?;
    let mut u = ScalarField::from_fn(domain.clone(), |x| x[1].max(0.0));
    u.apply_boundary(&bdata);
    let ctx = Ctx::new(&domain, u.data(), &cfg.solver)?;
    let nodes: Vec<usize> = domain.interior_nodes().to_vec();
    let cap = cfg.solver.relax_iters;
    let sweeps = relax_until(&domain, u.data_mut(), &nodes, &ctx, ctx.omega, cap, ctx.tol, true);
    let gamma_measured = upper_half(&domain, 0.25)
        .map(|(n, x)| u.get(n) / x[1])
        .fold(0.0, f64::max);
    Ok(FlatnessResult {
        gamma_measured,
        field: u,
        converged: sweeps < cap,
        sweeps,
    })
}
