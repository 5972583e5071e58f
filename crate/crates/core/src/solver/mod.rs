//! Minimization of the discrete functional.
//!
//! [`solve_penalized`] alternates nodewise p-harmonic relaxation on the
//! current positivity set with single-node toggles of the free boundary that
//! are accepted only when the exact discrete energy strictly decreases.

pub(crate) mod relax;
mod solve;
mod toggle;

use alloc::vec::Vec;


use crate::energy::EnergyBreakdown;
use crate::error::{invalid, Result};
use crate::grid::{GridDomain, ScalarField};
use crate::num::PowerLaw;

pub use relax::{harmonic_replacement, lattice_ball, p_harmonic_relax, truncate_negative};
pub use solve::{solve_penalized, solve_penalized_from};
pub use toggle::toggle_sweep;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub p: f64,
    /// Gradient regularization used only inside the nodal Newton solves.
    /// Defaults to `1e-10 · (max boundary value) / h`.
    pub eta: Option<f64>,
    pub max_outer: usize,
    /// Sweep cap for each relaxation phase.
    pub relax_iters: usize,
    /// Smaller sweep cap used while toggles are still being accepted;
    /// defaults to twice the lattice width.
    pub outer_sweeps: Option<usize>,
    /// A relaxation phase stops once the largest nodal update falls below
    /// `relax_tol` times the boundary value scale.
    pub relax_tol: f64,
    pub tol_energy: f64,
    pub toggle_passes: usize,
    pub seed: u64,
    /// Over-relaxation factor in `[1, 2)`; chosen from the lattice size when
    /// absent.
    pub omega: Option<f64>,
    /// Chebyshev radius of the patch relaxed around a tentative toggle.
    /// Defaults to the lattice width in 1D and 5 in 2D.
    pub patch_radius: Option<usize>,
    /// Sweep cap for a patch relaxation; defaults to `3·nx` in 1D, 60 in 2D.
    pub patch_sweeps: Option<usize>,
    /// Volume-neutral swaps allowed per outer step.
    pub max_swaps: usize,
}

impl SolverConfig {
    pub fn new(p: f64) -> Self {
        Self {
            p,
            eta: None,
            max_outer: 400,
            relax_iters: 4000,
            outer_sweeps: None,
            relax_tol: 1e-12,
            tol_energy: 1e-9,
            toggle_passes: 4,
            seed: 0,
            omega: None,
            patch_radius: None,
            patch_sweeps: None,
            max_swaps: 256,
        }
    }

    pub fn validate(&self) -> Result<()> {
        PowerLaw::new(self.p)?;
        if let Some(eta) = self.eta {
            if !(eta >= 0.0 && eta.is_finite()) {
                return Err(invalid("eta must be finite and nonnegative"));
            }
        }
        if self.max_outer == 0 || self.relax_iters == 0 || self.toggle_passes == 0 {
            return Err(invalid("iteration caps must be at least 1"));
        }
        if !(self.tol_energy > 0.0) {
            return Err(invalid("tol_energy must be positive"));
        }
        if !(self.relax_tol > 0.0) {
            return Err(invalid("relax_tol must be positive"));
        }
        if let Some(w) = self.omega {
            if !(1.0..2.0).contains(&w) {
                return Err(invalid("omega must lie in [1, 2)"));
            }
        }
        if self.patch_sweeps == Some(0) || self.outer_sweeps == Some(0) {
            return Err(invalid("sweep caps must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub breakdown: EnergyBreakdown,
    pub toggles: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub field: ScalarField,
    pub breakdown: EnergyBreakdown,
    /// Row 0 is the initial candidate, then one row per outer step.
    pub trace: Vec<TraceRow>,
    pub lipschitz_estimate: f64,
    pub converged: bool,
    pub outer_iters: usize,
}

impl Solution {
    pub fn trace_is_monotone(&self) -> bool {
        self.trace
            .windows(2)
            .all(|w| w[1].breakdown.total <= w[0].breakdown.total)
    }
}

/// Resolved numerical settings shared by relaxation and toggling.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Ctx {
    pub law: PowerLaw,
    /// `(η h)²`, in the raw units of the stencil terms.
    pub reg: f64,
    /// Absolute update tolerance.
    pub tol: f64,
    /// Boundary value scale.
    pub scale: f64,
    pub omega: f64,
}

impl Ctx {
    pub fn new(domain: &GridDomain, data: &[f64], cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let law = PowerLaw::new(cfg.p)?;
        let scale = boundary_scale(domain, data);
        let h = domain.h();
        let eta = cfg.eta.unwrap_or(1e-10 * scale / h);
        let extent = domain.nx().max(domain.ny());
        Ok(Self {
            law,
            reg: (eta * h) * (eta * h),
            tol: cfg.relax_tol * scale,
            scale,
            omega: cfg.omega.unwrap_or_else(|| auto_omega(extent)),
        })
    }
}

/// Textbook SOR factor for an `n`-node span, kept below 1.98.
pub(crate) fn auto_omega(n: usize) -> f64 {
    let n = n.max(2) as f64;
    (2.0 / (1.0 + core::f64::consts::PI / n)).clamp(1.0, 1.98)
}

fn boundary_scale(domain: &GridDomain, data: &[f64]) -> f64 {
    let m = domain
        .boundary_nodes()
        .iter()
        .map(|&(n, _)| data[n].abs())
        .fold(0.0, f64::max);
    if m > 0.0 {
        m
    } else {
        1.0
    }
}
