use alloc::sync::Arc;
use alloc::vec::Vec;

use super::relax::{relax_until, truncate_in_place};
use super::toggle::{front_move, swap_pass, toggle_pass, PatchSettings};
use super::{Ctx, Solution, SolverConfig, TraceRow};
use crate::energy::{dirichlet_with, EnergyBreakdown, PenaltyParams};
use crate::error::{invalid, Result};
use crate::grid::{BoundaryData, GridDomain, ScalarField};

/// Minimizes the discrete functional over fields equal to `bdata` on the
/// boundary.
///
/// Starts from the relaxed p-harmonic extension of the boundary data, then
/// repeats: truncation at 0, relaxation on `{u > 0}`, up to
/// `config.toggle_passes` toggle passes and, when no single toggle helps, a
/// one-step shift of the whole free boundary or else a pass of
/// volume-neutral swaps. Each phase is kept only if the recomputed
/// total does not increase, so the trace is nonincreasing. Relaxation runs
/// at most `outer_sweeps` sweeps while the free boundary moves. Stops when a
/// step relaxes to tolerance, accepts no move and lowers the energy by less
/// than `tol_energy` relative; otherwise gives up after `max_outer` steps
/// with `converged = false`.
pub fn solve_penalized(
    domain: Arc<GridDomain>,
    bdata: &BoundaryData,
    params: &PenaltyParams,
    config: &SolverConfig,
) -> Result<Solution> {
    check_inputs(&domain, bdata, params, config)?;
    let fill = mean(bdata.values());
    let u = ScalarField::admissible(domain, bdata, fill);
    minimize(u, params, config, true)
}

/// [`solve_penalized`] started from `initial` with the values of `bdata`
/// imposed on the boundary, instead of from the p-harmonic extension.
pub fn solve_penalized_from(
    initial: &ScalarField,
    bdata: &BoundaryData,
    params: &PenaltyParams,
    config: &SolverConfig,
) -> Result<Solution> {
    check_inputs(initial.domain(), bdata, params, config)?;
    let mut u = initial.clone();
    u.apply_boundary(bdata);
    minimize(u, params, config, false)
}

fn check_inputs(
    domain: &GridDomain,
    bdata: &BoundaryData,
    params: &PenaltyParams,
    config: &SolverConfig,
) -> Result<()> {
    config.validate()?;
    params.validate_for(domain)?;
    if bdata.values().len() != domain.boundary_nodes().len() {
        return Err(invalid("boundary data does not match the domain"));
    }
    Ok(())
}

fn minimize(
    mut u: ScalarField,
    params: &PenaltyParams,
    config: &SolverConfig,
    extend: bool,
) -> Result<Solution> {
    let domain = u.domain_arc().clone();
    let ctx = Ctx::new(&domain, u.data(), config)?;
    let patch = PatchSettings::new(&domain, config, params, &ctx);

    if extend {
        let interior: Vec<usize> = domain.interior_nodes().to_vec();
        relax_until(&domain, u.data_mut(), &interior, &ctx, ctx.omega, config.relax_iters, ctx.tol, true);
    }

    let eval = |u: &ScalarField| {
        let dir = dirichlet_with(&domain, u.data(), &ctx.law);
        EnergyBreakdown::new(dir, u.positivity_measure(), params)
    };
    let mut current = eval(&u);
    let mut trace = Vec::with_capacity(16);
    trace.push(TraceRow {
        iter: 0,
        breakdown: current,
        toggles: 0,
    });

    let budget = config
        .outer_sweeps
        .unwrap_or(2 * domain.nx().max(domain.ny()))
        .min(config.relax_iters);
    let mut converged = false;
    let mut outer = 0;
    let mut moving = true;
    while outer < config.max_outer {
        outer += 1;
        let start = current.total;

        let mut trial = u.clone();
        if truncate_in_place(&mut trial) > 0 {
            keep_if_not_worse(&mut u, trial, &mut current, &eval);
        }

        // while the free boundary is still moving, a partial relaxation is
        // enough to steer the toggles
        let cap = if moving { budget } else { config.relax_iters };
        let mut trial = u.clone();
        let active = trial.positive_interior();
        let sweeps = relax_until(&domain, trial.data_mut(), &active, &ctx, ctx.omega, cap, ctx.tol, true);
        let relaxed = sweeps < cap;
        keep_if_not_worse(&mut u, trial, &mut current, &eval);

        let mut toggles = 0;
        for pass in 0..config.toggle_passes {
            let mut trial = u.clone();
            let seed = mix(config.seed, outer as u64, pass as u64);
            let moved = toggle_pass(&mut trial, params, &ctx, &patch, seed);
            if moved == 0 {
                break;
            }
            if keep_if_not_worse(&mut u, trial, &mut current, &eval) {
                toggles += moved;
            } else {
                break;
            }
        }
        if toggles == 0 {
            for grow in [false, true] {
                if let Some((base, moved, k)) = front_move(&u, &ctx, budget, grow) {
                    keep_if_not_worse(&mut u, base, &mut current, &eval);
                    if eval(&moved).total < current.total - patch.margin {
                        keep_if_not_worse(&mut u, moved, &mut current, &eval);
                        toggles += k;
                        break;
                    }
                }
            }
        }
        if toggles == 0 {
            let mut trial = u.clone();
            let moved = swap_pass(&mut trial, &ctx, &patch, config.max_swaps);
            if moved > 0 && keep_if_not_worse(&mut u, trial, &mut current, &eval) {
                toggles += moved;
            }
        }
        moving = toggles > 0;

        trace.push(TraceRow {
            iter: outer,
            breakdown: current,
            toggles,
        });
        let decrease = (start - current.total) / current.total.abs().max(f64::MIN_POSITIVE);
        if toggles == 0 && relaxed && decrease < config.tol_energy {
            converged = true;
            break;
        }
    }

    Ok(Solution {
        lipschitz_estimate: u.lipschitz_estimate(),
        field: u,
        breakdown: current,
        trace,
        converged,
        outer_iters: outer,
    })
}

fn keep_if_not_worse(
    u: &mut ScalarField,
    trial: ScalarField,
    current: &mut EnergyBreakdown,
    eval: &impl Fn(&ScalarField) -> EnergyBreakdown,
) -> bool {
    let b = eval(&trial);
    if b.total <= current.total {
        *u = trial;
        *current = b;
        true
    } else {
        false
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// SplitMix64-style combination of the user seed with the step indices.
fn mix(seed: u64, outer: u64, pass: u64) -> u64 {
    let mut z = seed
        ^ outer.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ pass.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SegmentTag;

    fn interval(n: usize, b: f64) -> (Arc<GridDomain>, BoundaryData) {
        let d = Arc::new(GridDomain::build_rectangle(n, 1, 1.0 / n as f64).unwrap());
        let bd = BoundaryData::from_segments(&d, None, &[(SegmentTag::Left, b)]).unwrap();
        (d, bd)
    }

    #[test]
    fn one_d_attains_alpha_at_small_epsilon() {
        let (d, bd) = interval(64, 1.0);
        let params = PenaltyParams::new(0.1, 0.5).unwrap();
        let sol = solve_penalized(d.clone(), &bd, &params, &SolverConfig::new(2.0)).unwrap();
        assert!(sol.converged);
        assert!(sol.trace_is_monotone());
        assert!((sol.breakdown.positivity - 0.5).abs() <= 2.0 * d.h(), "{:?}", sol.breakdown);
        assert!(sol.field.matches_boundary(&bd));
        assert!(sol.field.data().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn one_d_overshoots_at_large_epsilon() {
        let (d, bd) = interval(64, 1.0);
        let params = PenaltyParams::new(0.36, 0.5).unwrap();
        let sol = solve_penalized(d.clone(), &bd, &params, &SolverConfig::new(2.0)).unwrap();
        assert!((sol.breakdown.positivity - 0.6).abs() <= 2.0 * d.h(), "{:?}", sol.breakdown);
    }

    #[test]
    fn same_seed_same_bits() {
        let d = Arc::new(GridDomain::build_rectangle(20, 20, 0.05).unwrap());
        let bd = BoundaryData::from_segments(&d, None, &[(SegmentTag::Left, 1.0)]).unwrap();
        let params = PenaltyParams::new(0.2, 0.4).unwrap();
        let mut cfg = SolverConfig::new(2.0);
        cfg.seed = 7;
        let a = solve_penalized(d.clone(), &bd, &params, &cfg).unwrap();
        let b = solve_penalized(d, &bd, &params, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn warm_start_from_a_larger_epsilon() {
        let (d, bd) = interval(64, 1.0);
        let cfg = SolverConfig::new(2.0);
        let coarse = PenaltyParams::new(0.36, 0.5).unwrap();
        let fine = PenaltyParams::new(0.1, 0.5).unwrap();
        let first = solve_penalized(d.clone(), &bd, &coarse, &cfg).unwrap();
        let warm = solve_penalized_from(&first.field, &bd, &fine, &cfg).unwrap();
        let cold = solve_penalized(d.clone(), &bd, &fine, &cfg).unwrap();
        assert!(warm.converged && warm.trace_is_monotone());
        assert!((warm.breakdown.positivity - cold.breakdown.positivity).abs() <= 2.0 * d.h());
        assert!((warm.breakdown.total - cold.breakdown.total).abs() < 1e-6);
    }

    #[test]
    fn rejects_alpha_beyond_area() {
        let (d, bd) = interval(16, 1.0);
        let params = PenaltyParams::new(0.1, 2.0).unwrap();
        assert!(solve_penalized(d, &bd, &params, &SolverConfig::new(2.0)).is_err());
    }

    #[test]
    fn mixing_separates_streams() {
        assert_ne!(mix(0, 1, 0), mix(0, 0, 1));
        assert_ne!(mix(1, 1, 0), mix(0, 1, 0));
    }
}
