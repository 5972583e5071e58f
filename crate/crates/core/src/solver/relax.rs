use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::{auto_omega, Ctx, SolverConfig};
use crate::error::{invalid, Result};
use crate::grid::{GridDomain, ScalarField};
use crate::num::Sum;
use crate::stencil::{self, NodalProblem};

/// Updates smaller than this (relative to the boundary value scale) change
/// the local energy by less than its rounding error.
const RESOLVABLE: f64 = 1e-6;

/// `max(u, 0)` at interior nodes; boundary values are left alone.
pub fn truncate_negative(u: &ScalarField) -> ScalarField {
    let mut out = u.clone();
    truncate_in_place(&mut out);
    out
}

pub(crate) fn truncate_in_place(u: &mut ScalarField) -> usize {
    let nodes: Vec<usize> = u.domain().interior_nodes().to_vec();
    let data = u.data_mut();
    let mut changed = 0;
    for n in nodes {
        if data[n] < 0.0 {
            data[n] = 0.0;
            changed += 1;
        }
    }
    changed
}

/// Replaces each node of `nodes` in turn by the minimizer of its local
/// energy, over-relaxed by `omega` when that does not raise the local
/// energy. With `keep_positive`, a positive node never drops to `≤ 0`, so
/// the positivity set is unchanged. Returns the largest update.
pub(crate) fn sweep(
    domain: &GridDomain,
    data: &mut [f64],
    nodes: &[usize],
    ctx: &Ctx,
    omega: f64,
    keep_positive: bool,
) -> f64 {
    let law = &ctx.law;
    let mut max_update: f64 = 0.0;
    for &n in nodes {
        let prob = NodalProblem::gather(domain, data, n);
        if prob.is_empty() {
            continue;
        }
        let old = data[n];
        if law.is_quadratic() {
            // a quadratic decreases along the whole over-relaxed step for
            // omega < 2, so no energy check is needed
            let plain = prob.quadratic_min();
            let mut t = old + omega * (plain - old);
            if keep_positive && old > 0.0 && t <= 0.0 {
                if !(plain > 0.0) {
                    continue;
                }
                t = plain;
            }
            max_update = max_update.max((t - old).abs());
            data[n] = t;
            continue;
        }
        let plain = prob.newton(old, law, ctx.reg);
        let (lo, hi) = prob.bracket();
        let over = (old + omega * (plain - old)).clamp(lo, hi);
        let mut t;
        if (plain - old).abs() <= RESOLVABLE * ctx.scale {
            // energy differences here are below rounding; the derivative-based
            // step is trusted and over-relaxed as in the quadratic case
            t = over;
        } else {
            let e_old = prob.energy(old, law);
            t = plain;
            if !(prob.energy(t, law) <= e_old) {
                t = prob.golden(law);
                if !(prob.energy(t, law) <= e_old) {
                    continue;
                }
            }
            if omega > 1.0 && prob.energy(over, law) <= e_old {
                t = over;
            }
        }
        if keep_positive && old > 0.0 && t <= 0.0 {
            if !(plain > 0.0) {
                continue;
            }
            t = plain;
        }
        max_update = max_update.max((t - old).abs());
        data[n] = t;
    }
    max_update
}

/// Sweeps until the largest update is below the tolerance or `max_sweeps`
/// is reached; returns the number of sweeps.
pub(crate) fn relax_until(
    domain: &GridDomain,
    data: &mut [f64],
    nodes: &[usize],
    ctx: &Ctx,
    omega: f64,
    max_sweeps: usize,
    tol: f64,
    keep_positive: bool,
) -> usize {
    for k in 0..max_sweeps {
        if sweep(domain, data, nodes, ctx, omega, keep_positive) <= tol {
            return k + 1;
        }
    }
    max_sweeps
}

/// Nodewise relaxation of the discrete p-energy over `active`.
///
/// Runs up to `config.relax_iters` sweeps (fewer once updates fall below
/// tolerance). Nodes outside `active` keep their values, and a positive node
/// stays positive. The Dirichlet energy never increases.
pub fn p_harmonic_relax(
    u: &ScalarField,
    active: &[usize],
    config: &SolverConfig,
) -> Result<ScalarField> {
    let domain = u.domain();
    check_interior(domain, active)?;
    let ctx = Ctx::new(domain, u.data(), config)?;
    let mut nodes = active.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    let mut out = u.clone();
    relax_until(
        domain,
        out.data_mut(),
        &nodes,
        &ctx,
        ctx.omega,
        config.relax_iters,
        ctx.tol,
        true,
    );
    Ok(out)
}

/// Interior nodes within distance `radius` of `center` (inclusive).
pub fn lattice_ball(domain: &GridDomain, center: [f64; 2], radius: f64) -> Vec<usize> {
    domain
        .interior_nodes()
        .iter()
        .copied()
        .filter(|&n| {
            let x = domain.position(n);
            (x[0] - center[0]).hypot(x[1] - center[1]) <= radius
        })
        .collect()
}

/// Replaces `u` on `ball` by the discrete p-harmonic function with the
/// values of `u` around it. Returns the new field and the decrease of the
/// Dirichlet energy (clamped at 0 against rounding).
pub fn harmonic_replacement(
    u: &ScalarField,
    ball: &[usize],
    config: &SolverConfig,
) -> Result<(ScalarField, f64)> {
    let domain = u.domain();
    check_interior(domain, ball)?;
    if ball.is_empty() {
        return Ok((u.clone(), 0.0));
    }
    let ctx = Ctx::new(domain, u.data(), config)?;
    let mut nodes = ball.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    let omega = config.omega.unwrap_or_else(|| auto_omega(span(domain, &nodes)));
    let mut out = u.clone();
    // enough sweeps for SOR to converge at this span, unless the caller
    // asks for more
    let cap = config.relax_iters.max(40 * span(domain, &nodes));
    relax_until(domain, out.data_mut(), &nodes, &ctx, omega, cap, ctx.tol, false);
    let cells = cells_touching(domain, &nodes);
    let before = raw_energy(domain, u.data(), &cells, &ctx);
    let after = raw_energy(domain, out.data(), &cells, &ctx);
    let drop = (before - after) * stencil::scale(domain, ctx.law.p());
    Ok((out, drop.max(0.0)))
}

fn check_interior(domain: &GridDomain, nodes: &[usize]) -> Result<()> {
    if nodes.iter().any(|&n| n >= domain.len() || !domain.is_interior(n)) {
        return Err(invalid("node set must consist of interior nodes"));
    }
    Ok(())
}

/// Lattice width of the bounding box of `nodes`.
fn span(domain: &GridDomain, nodes: &[usize]) -> usize {
    let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0, usize::MAX, 0);
    for &n in nodes {
        let (i, j) = domain.coords(n);
        i0 = i0.min(i);
        i1 = i1.max(i);
        j0 = j0.min(j);
        j1 = j1.max(j);
    }
    (i1 - i0).max(j1 - j0) + 1
}

/// Complete cells containing at least one node of `nodes`, in index order.
pub(crate) fn cells_touching(domain: &GridDomain, nodes: &[usize]) -> Vec<usize> {
    let mut mark = vec![false; domain.len()];
    for &n in nodes {
        for c in domain.cells_of(n) {
            mark[c] = true;
        }
    }
    (0..domain.len()).filter(|&c| mark[c]).collect()
}

pub(crate) fn raw_energy(domain: &GridDomain, data: &[f64], cells: &[usize], ctx: &Ctx) -> f64 {
    let mut s = Sum::default();
    for &c in cells {
        s.add(stencil::cell_raw(domain, data, c, &ctx.law));
    }
    s.value()
}
