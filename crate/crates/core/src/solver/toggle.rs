use alloc::vec::Vec;

use rand::rngs::Xoshiro256PlusPlus;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use super::relax::{raw_energy, relax_until};
use super::{auto_omega, Ctx, SolverConfig};
use crate::energy::{penalty, PenaltyParams};
use crate::error::Result;
use crate::grid::{GridDomain, ScalarField};
use crate::stencil::{self, NodalProblem};

/// Unrelaxed toggle costs overestimate relaxed ones by at most this factor
/// in practice (2 for a 1D ramp at p = 2); moves whose unrelaxed cost rules
/// them out even after this discount skip the patch relaxation.
const BIAS: f64 = 8.0;

const PATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub(crate) struct PatchSettings {
    radius: usize,
    sweeps: usize,
    omega: f64,
    tol: f64,
    pub margin: f64,
}

impl PatchSettings {
    pub fn new(domain: &GridDomain, cfg: &SolverConfig, params: &PenaltyParams, ctx: &Ctx) -> Self {
        let radius = cfg
            .patch_radius
            .unwrap_or(if domain.is_1d() { domain.nx() } else { 5 });
        let sweeps = cfg
            .patch_sweeps
            .unwrap_or(if domain.is_1d() { 3 * domain.nx() } else { 60 });
        let span = (2 * radius + 1).min(domain.nx().max(domain.ny()));
        let eps = params.epsilon;
        Self {
            radius,
            sweeps,
            omega: cfg.omega.unwrap_or_else(|| auto_omega(span)),
            // energy errors are quadratic in the residual, so a patch need
            // not be relaxed as tightly as the whole field
            tol: ctx.tol.max(PATCH_TOL * ctx.scale),
            margin: 1e-9 * domain.cell_measure() * eps.min(1.0 / eps),
        }
    }
}

/// One pass of free-boundary toggling.
///
/// Candidates are positive interior nodes with a zero lattice neighbour
/// (tentatively set to 0) and zero interior nodes with a positive neighbour
/// (tentatively given their one-node minimizing value), visited in an order
/// shuffled by `config.seed`. A move is first judged with the rest of the
/// field frozen; if that is inconclusive, the surrounding patch of positive
/// nodes is relaxed and the move is judged again. It is kept only when the
/// exact total energy strictly decreases. Returns the new field and the
/// number of accepted moves.
pub fn toggle_sweep(
    u: &ScalarField,
    params: &PenaltyParams,
    config: &SolverConfig,
) -> Result<(ScalarField, usize)> {
    params.validate_for(u.domain())?;
    let ctx = Ctx::new(u.domain(), u.data(), config)?;
    let patch = PatchSettings::new(u.domain(), config, params, &ctx);
    let mut out = u.clone();
    let changed = toggle_pass(&mut out, params, &ctx, &patch, config.seed);
    Ok((out, changed))
}

pub(crate) fn toggle_pass(
    u: &mut ScalarField,
    params: &PenaltyParams,
    ctx: &Ctx,
    ps: &PatchSettings,
    seed: u64,
) -> usize {
    let domain = u.domain_arc().clone();
    let d = &*domain;
    let data = u.data_mut();
    let cm = d.cell_measure();
    let sc = stencil::scale(d, ctx.law.p());
    let mut count = d.interior_nodes().iter().filter(|&&n| data[n] > 0.0).count();

    let mut cands: Vec<usize> = d
        .interior_nodes()
        .iter()
        .copied()
        .filter(|&n| is_candidate(d, data, n))
        .collect();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    cands.shuffle(&mut rng);

    let mut accepted = 0;
    let mut cells = Vec::new();
    let mut patch = Vec::new();
    let mut saved = Vec::new();
    for n in cands {
        if !is_candidate(d, data, n) {
            continue;
        }
        let old = data[n];
        let zero_move = old > 0.0;
        let new_val = if zero_move {
            0.0
        } else {
            let prob = NodalProblem::gather(d, data, n);
            let t = prob.newton(0.0, &ctx.law, ctx.reg);
            if !(t > 0.0) {
                continue;
            }
            t
        };
        let new_count = if zero_move { count - 1 } else { count + 1 };
        let dpen = penalty(new_count as f64 * cm, params) - penalty(count as f64 * cm, params);

        collect_box(d, n, ps.radius, &mut cells);
        let e0 = raw_energy(d, data, &cells, ctx);
        data[n] = new_val;
        let d_frozen = sc * (raw_energy(d, data, &cells, ctx) - e0);
        if d_frozen + dpen < -ps.margin {
            accepted += 1;
            count = new_count;
            continue;
        }
        let optimistic = if d_frozen > 0.0 { d_frozen / BIAS } else { d_frozen * BIAS };
        if optimistic + dpen >= -ps.margin {
            data[n] = old;
            continue;
        }

        // relax the patch before the move, so the comparison is between two
        // relaxed states; that relaxation is kept either way
        data[n] = old;
        collect_patch(d, data, n, ps.radius, &mut patch);
        relax_until(d, data, &patch, ctx, ps.omega, ps.sweeps, ps.tol, true);
        let base = raw_energy(d, data, &cells, ctx);
        saved.clear();
        saved.extend(patch.iter().map(|&m| (m, data[m])));
        if !zero_move {
            let t = NodalProblem::gather(d, data, n).newton(0.0, &ctx.law, ctx.reg);
            if !(t > 0.0) {
                continue;
            }
            data[n] = t;
        } else {
            data[n] = 0.0;
        }
        // the positive set moved by exactly `n`, so this patch lies within
        // the saved one plus `n`
        collect_patch(d, data, n, ps.radius, &mut patch);
        relax_until(d, data, &patch, ctx, ps.omega, ps.sweeps, ps.tol, true);
        let d_relaxed = sc * (raw_energy(d, data, &cells, ctx) - base);
        if d_relaxed + dpen < -ps.margin {
            accepted += 1;
            count = new_count;
        } else {
            for &(m, v) in &saved {
                data[m] = v;
            }
            data[n] = old;
        }
    }
    accepted
}

/// Removal and addition candidates ranked by frozen estimate.
const SWAP_WIDTH: usize = 8;
/// Pair evaluations per round before giving up.
const SWAP_EVALS: usize = 16;

/// Volume-neutral exchanges: a free-boundary node is zeroed and a zero node
/// next to the positivity set is switched on in one move.
///
/// When the positivity measure sits at the kink of the penalty, every single
/// toggle pays either `ε h^N` or `h^N / ε` and is rejected, so single moves
/// cannot reshape the set. Pairs are ranked by their frozen Dirichlet change,
/// judged after relaxing the patches around both nodes, and kept only when
/// the Dirichlet energy strictly decreases. Rounds repeat until one accepts
/// nothing or `max_swaps` exchanges were made.
pub(crate) fn swap_pass(u: &mut ScalarField, ctx: &Ctx, ps: &PatchSettings, max_swaps: usize) -> usize {
    let domain = u.domain_arc().clone();
    let d = &*domain;
    if d.is_1d() {
        // a 1D positivity set has no shape to change
        return 0;
    }
    let data = u.data_mut();
    let sc = stencil::scale(d, ctx.law.p());
    let mut cells = Vec::new();
    let mut other = Vec::new();
    let mut patch = Vec::new();
    let mut saved = Vec::new();
    let mut accepted = 0;
    while accepted < max_swaps {
        let mut removals = Vec::new();
        let mut additions = Vec::new();
        for &n in d.interior_nodes() {
            if !is_candidate(d, data, n) {
                continue;
            }
            let old = data[n];
            let new_val = if old > 0.0 {
                0.0
            } else {
                let t = NodalProblem::gather(d, data, n).newton(0.0, &ctx.law, ctx.reg);
                if !(t > 0.0) {
                    continue;
                }
                t
            };
            let e0 = local_raw(d, data, n, ctx);
            data[n] = new_val;
            let delta = sc * (local_raw(d, data, n, ctx) - e0);
            data[n] = old;
            if old > 0.0 {
                removals.push((delta, n));
            } else {
                additions.push((delta, n));
            }
        }
        let by_delta = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        removals.sort_by(by_delta);
        additions.sort_by(by_delta);
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for &(dr, r) in removals.iter().take(SWAP_WIDTH) {
            for &(da, a) in additions.iter().take(SWAP_WIDTH) {
                pairs.push((dr + da, r, a));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

        let mut found = false;
        for &(_, r, a) in pairs.iter().take(SWAP_EVALS) {
            collect_box(d, r, ps.radius, &mut cells);
            collect_box(d, a, ps.radius, &mut other);
            cells.extend_from_slice(&other);
            cells.sort_unstable();
            cells.dedup();
            let windows = |data: &[f64], out: &mut Vec<usize>, tmp: &mut Vec<usize>| {
                collect_patch(d, data, r, ps.radius, out);
                collect_patch(d, data, a, ps.radius, tmp);
                out.extend_from_slice(tmp);
                out.sort_unstable();
                out.dedup();
            };
            windows(data, &mut patch, &mut other);
            relax_until(d, data, &patch, ctx, ps.omega, ps.sweeps, ps.tol, true);
            let base = raw_energy(d, data, &cells, ctx);
            saved.clear();
            saved.extend(patch.iter().map(|&m| (m, data[m])));
            let old_r = data[r];
            data[r] = 0.0;
            let t = NodalProblem::gather(d, data, a).newton(0.0, &ctx.law, ctx.reg);
            if !(t > 0.0) {
                data[r] = old_r;
                continue;
            }
            data[a] = t;
            windows(data, &mut patch, &mut other);
            relax_until(d, data, &patch, ctx, ps.omega, ps.sweeps, ps.tol, true);
            let delta = sc * (raw_energy(d, data, &cells, ctx) - base);
            if delta < -ps.margin {
                accepted += 1;
                found = true;
                break;
            }
            for &(m, v) in &saved {
                data[m] = v;
            }
            data[r] = old_r;
            data[a] = 0.0;
        }
        if !found {
            break;
        }
    }
    accepted
}

/// Shifts the whole free boundary by one lattice step.
///
/// Shrinking zeroes every positive node with a zero neighbour; growing
/// gives every zero node with a positive neighbour its one-node minimizing
/// value. Near a flat front a one-node notch costs more than its share of a
/// uniform shift, so single toggles can stall where this move still lowers
/// the energy. A uniform shift changes the field far from the front, so
/// both the current and the moved field are relaxed on all positive nodes
/// for up to `sweeps` sweeps. Returns both fields and the number of nodes
/// moved; the caller compares them exactly.
pub(crate) fn front_move(
    u: &ScalarField,
    ctx: &Ctx,
    sweeps: usize,
    grow: bool,
) -> Option<(ScalarField, ScalarField, usize)> {
    let d = u.domain();
    let front: Vec<usize> = d
        .interior_nodes()
        .iter()
        .copied()
        .filter(|&n| is_candidate(d, u.data(), n) && (u.get(n) > 0.0) != grow)
        .collect();
    if front.is_empty() {
        return None;
    }
    let mut base = u.clone();
    let active = base.positive_interior();
    relax_until(d, base.data_mut(), &active, ctx, ctx.omega, sweeps, ctx.tol, true);

    let mut moved = base.clone();
    let data = moved.data_mut();
    let mut count = 0;
    for &n in &front {
        if grow {
            let t = NodalProblem::gather(d, data, n).newton(0.0, &ctx.law, ctx.reg);
            if t > 0.0 {
                data[n] = t;
                count += 1;
            }
        } else {
            data[n] = 0.0;
            count += 1;
        }
    }
    if count == 0 {
        return None;
    }
    let active = moved.positive_interior();
    relax_until(d, moved.data_mut(), &active, ctx, ctx.omega, sweeps, ctx.tol, true);
    Some((base, moved, count))
}

/// Raw energy of the complete cells containing `n`.
fn local_raw(d: &GridDomain, data: &[f64], n: usize, ctx: &Ctx) -> f64 {
    d.cells_of(n).map(|c| stencil::cell_raw(d, data, c, &ctx.law)).sum()
}

fn is_candidate(d: &GridDomain, data: &[f64], n: usize) -> bool {
    if data[n] > 0.0 {
        d.neighbours4(n).any(|m| data[m] <= 0.0)
    } else {
        d.neighbours4(n).any(|m| data[m] > 0.0)
    }
}

/// Complete cells whose energy can change when nodes within Chebyshev
/// distance `r` of `n` move.
fn collect_box(d: &GridDomain, n: usize, r: usize, out: &mut Vec<usize>) {
    out.clear();
    let (i, j) = d.coords(n);
    let i0 = i.saturating_sub(r + 1);
    let i1 = (i + r).min(d.nx() - 1);
    let (j0, j1) = if d.is_1d() {
        (0, 0)
    } else {
        (j.saturating_sub(r + 1), (j + r).min(d.ny() - 1))
    };
    for jj in j0..=j1 {
        for ii in i0..=i1 {
            let c = d.index(ii, jj);
            if d.cell_complete(c) {
                out.push(c);
            }
        }
    }
}

/// Positive interior nodes within Chebyshev distance `r` of `n`, in index
/// order.
fn collect_patch(d: &GridDomain, data: &[f64], n: usize, r: usize, out: &mut Vec<usize>) {
    out.clear();
    for_window(d, n, r, |m| {
        if d.is_interior(m) && data[m] > 0.0 {
            out.push(m);
        }
    });
}

fn for_window(d: &GridDomain, n: usize, r: usize, mut f: impl FnMut(usize)) {
    let (i, j) = d.coords(n);
    let i0 = i.saturating_sub(r);
    let i1 = (i + r).min(d.nx() - 1);
    let (j0, j1) = if d.is_1d() {
        (0, 0)
    } else {
        (j.saturating_sub(r), (j + r).min(d.ny() - 1))
    };
    for jj in j0..=j1 {
        for ii in i0..=i1 {
            f(d.index(ii, jj));
        }
    }
}
