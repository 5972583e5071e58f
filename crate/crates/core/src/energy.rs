//! The discrete penalized functional `J_ε(u) = ∫|∇u|^p + F_ε(|{u>0}|)`.

use alloc::vec;
use alloc::vec::Vec;


use crate::error::{invalid, Result};
use crate::grid::{GridDomain, ScalarField};
use crate::num::{PowerLaw, Sum};
use crate::stencil;

/// Penalization parameter `ε` and target positivity measure `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyParams {
    pub epsilon: f64,
    pub alpha: f64,
}

impl PenaltyParams {
    pub fn new(epsilon: f64, alpha: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(invalid("epsilon must be positive"));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid("alpha must be positive"));
        }
        Ok(Self { epsilon, alpha })
    }

    /// Checks `α < |Ω|`.
    pub fn validate_for(&self, domain: &GridDomain) -> Result<()> {
        if self.alpha >= domain.area() {
            return Err(invalid("alpha must be smaller than the domain area"));
        }
        Ok(())
    }
}

/// `F_ε(s)`: slope `ε` below `α`, slope `1/ε` from `α` on, zero at `α`.
///
/// Convex (and so `F_ε(A) − F_ε(B) ≤ (A − B)/ε` for `A ≥ B`) whenever
/// `ε ≤ 1`.
#[inline]
pub fn penalty(s: f64, params: &PenaltyParams) -> f64 {
    let d = s - params.alpha;
    if s < params.alpha {
        params.epsilon * d
    } else {
        d / params.epsilon
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub dirichlet: f64,
    pub penalty: f64,
    pub total: f64,
    pub positivity: f64,
}

impl EnergyBreakdown {
    pub fn new(dirichlet: f64, positivity: f64, params: &PenaltyParams) -> Self {
        let pen = penalty(positivity, params);
        Self {
            dirichlet,
            penalty: pen,
            total: dirichlet + pen,
            positivity,
        }
    }
}

/// `Σ_cells |∇u|^p h^N` with the corner-gradient rule in 2D and forward
/// differences in 1D.
pub fn dirichlet_p_energy(u: &ScalarField, p: f64) -> Result<f64> {
    let law = PowerLaw::new(p)?;
    Ok(dirichlet_with(u.domain(), u.data(), &law))
}

pub(crate) fn dirichlet_with(domain: &GridDomain, data: &[f64], law: &PowerLaw) -> f64 {
    let mut s = Sum::default();
    for c in domain.cells() {
        s.add(stencil::cell_raw(domain, data, c, law));
    }
    s.value() * stencil::scale(domain, law.p())
}

pub fn total_energy(u: &ScalarField, p: f64, params: &PenaltyParams) -> Result<EnergyBreakdown> {
    let dirichlet = dirichlet_p_energy(u, p)?;
    Ok(EnergyBreakdown::new(dirichlet, u.positivity_measure(), params))
}

/// Right-hand side of the replacement inequality for `v` replacing `u`:
/// `∫|∇(v−u)|^p` when `p ≥ 2`, and
/// `∫|∇(v−u)|² (|∇v| + |∇u|)^{p−2}` when `p < 2`, both with the
/// corner-gradient rule.
pub fn replacement_gap(u: &ScalarField, v: &ScalarField, p: f64) -> Result<f64> {
    use num_traits::Float;

    let law = PowerLaw::new(p)?;
    let d = u.domain();
    if d.len() != v.domain().len() {
        return Err(invalid("fields live on different lattices"));
    }
    let (a, b) = (u.data(), v.data());
    if p >= 2.0 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
        return Ok(dirichlet_with(d, &diff, &law));
    }
    let h = d.h();
    let term = |gu: f64, gv: f64, gw: f64| {
        let base = gu.sqrt() + gv.sqrt();
        if base > 0.0 {
            gw * base.powf(p - 2.0)
        } else {
            0.0
        }
    };
    let mut s = Sum::default();
    for c in d.cells() {
        if d.is_1d() {
            let (du, dv) = ((a[c + 1] - a[c]) / h, (b[c + 1] - b[c]) / h);
            s.add(h * term(du * du, dv * dv, (dv - du) * (dv - du)));
            continue;
        }
        let nx = d.nx();
        let cu = stencil::corner_diffs(a[c], a[c + 1], a[c + nx], a[c + nx + 1]);
        let cv = stencil::corner_diffs(b[c], b[c + 1], b[c + nx], b[c + nx + 1]);
        for ((ux, uy), (vx, vy)) in cu.into_iter().zip(cv) {
            let (wx, wy) = (vx - ux, vy - uy);
            let g = term(ux * ux + uy * uy, vx * vx + vy * vy, wx * wx + wy * wy);
            // differences are raw; rescale to gradients
            s.add(g * h.powf(-p) * h * h / 4.0);
        }
    }
    Ok(s.value())
}

/// Discrete `Δ_p u`; entries are meaningful only where `reported` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub values: ScalarField,
    pub reported: Vec<bool>,
}

impl Residual {
    pub fn max_abs(&self) -> f64 {
        self.values
            .data()
            .iter()
            .zip(&self.reported)
            .filter(|(_, r)| **r)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn reported_count(&self) -> usize {
        self.reported.iter().filter(|r| **r).count()
    }
}

/// Two-point flux divergence of `(|∇u|² + η²)^{(p-2)/2} ∇u`.
///
/// The flux through the edge between neighbours uses the normal difference
/// quotient and, in 2D, the tangential central difference averaged over the
/// two endpoints. Residuals are reported at interior nodes whose 3×3 block
/// (3 nodes in 1D) is present and strictly positive; other entries are 0.
pub fn p_laplacian_residual(u: &ScalarField, p: f64, eta: f64) -> Result<Residual> {
    let law = PowerLaw::new(p)?;
    if !(eta >= 0.0) {
        return Err(invalid("regularization eta must be nonnegative"));
    }
    let d = u.domain();
    let data = u.data();
    let h = d.h();
    let reg = eta * eta;
    let mut out = vec![0.0; d.len()];
    let mut reported = vec![false; d.len()];
    let flux = |g_n: f64, g_t: f64| law.reduced(g_n * g_n + g_t * g_t + reg) * g_n;

    for &n in d.interior_nodes() {
        let (i, j) = d.coords(n);
        if d.is_1d() {
            if i == 0 || i + 1 >= d.nx() {
                continue;
            }
            if !(data[n - 1] > 0.0 && data[n] > 0.0 && data[n + 1] > 0.0)
                || !d.is_present(n - 1)
                || !d.is_present(n + 1)
            {
                continue;
            }
            let east = flux((data[n + 1] - data[n]) / h, 0.0);
            let west = flux((data[n] - data[n - 1]) / h, 0.0);
            out[n] = (east - west) / h;
            reported[n] = true;
            continue;
        }
        // edges use the tangential difference at both endpoints: 3×5 / 5×3 reach
        if i < 2 || j < 2 || i + 2 >= d.nx() || j + 2 >= d.ny() {
            continue;
        }
        let block_ok = (j - 1..=j + 1)
            .all(|jj| (i - 1..=i + 1).all(|ii| {
                let m = d.index(ii, jj);
                d.is_present(m) && data[m] > 0.0
            }));
        if !block_ok {
            continue;
        }
        let at = |ii: usize, jj: usize| data[d.index(ii, jj)];
        let gy_at = |ii: usize, jj: usize| (at(ii, jj + 1) - at(ii, jj - 1)) / (2.0 * h);
        let gx_at = |ii: usize, jj: usize| (at(ii + 1, jj) - at(ii - 1, jj)) / (2.0 * h);
        let present = |ii: usize, jj: usize| d.is_present(d.index(ii, jj));
        if !(present(i + 1, j + 1)
            && present(i - 1, j - 1)
            && present(i + 1, j - 1)
            && present(i - 1, j + 1)
            && present(i + 2, j)
            && present(i - 2, j)
            && present(i, j + 2)
            && present(i, j - 2))
        {
            continue;
        }
        let e = flux((at(i + 1, j) - at(i, j)) / h, 0.5 * (gy_at(i, j) + gy_at(i + 1, j)));
        let w = flux((at(i, j) - at(i - 1, j)) / h, 0.5 * (gy_at(i, j) + gy_at(i - 1, j)));
        let nn = flux((at(i, j + 1) - at(i, j)) / h, 0.5 * (gx_at(i, j) + gx_at(i, j + 1)));
        let s = flux((at(i, j) - at(i, j - 1)) / h, 0.5 * (gx_at(i, j) + gx_at(i, j - 1)));
        out[n] = (e - w + nn - s) / h;
        reported[n] = true;
    }
    Ok(Residual {
        values: ScalarField::from_data(u.domain_arc().clone(), out)?,
        reported,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDomain;
    use alloc::sync::Arc;

    fn params(eps: f64, alpha: f64) -> PenaltyParams {
        PenaltyParams::new(eps, alpha).unwrap()
    }

    #[test]
    fn replacement_gap_on_affine_fields() {
        let d = Arc::new(GridDomain::build_rectangle(10, 10, 0.1).unwrap());
        let u = ScalarField::from_fn(d.clone(), |x| x[0]);
        let v = ScalarField::from_fn(d.clone(), |x| 2.0 * x[0]);
        let area = d.cell_measure() * d.cells().count() as f64;
        // |∇(v-u)|² (|∇v| + |∇u|)^{-1/2} = 3^{-1/2}
        let g = replacement_gap(&u, &v, 1.5).unwrap();
        assert!((g - area / 3f64.sqrt()).abs() < 1e-12, "{g}");
        let g3 = replacement_gap(&u, &v, 3.0).unwrap();
        assert!((g3 - area).abs() < 1e-12);
        assert_eq!(replacement_gap(&u, &u, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn penalty_branches() {
        let pp = params(0.1, 0.5);
        assert!((penalty(0.4, &pp) + 0.01).abs() < 1e-15);
        assert!((penalty(0.6, &pp) - 1.0).abs() < 1e-12);
        assert_eq!(penalty(0.5, &pp), 0.0);
        assert_eq!(penalty(0.5, &params(3.7, 0.5)), 0.0);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PenaltyParams::new(0.0, 0.5).is_err());
        assert!(PenaltyParams::new(0.1, -0.5).is_err());
        let d = GridDomain::build_rectangle(8, 8, 0.125).unwrap();
        assert!(params(0.1, 1.5).validate_for(&d).is_err());
        assert!(params(0.1, 0.5).validate_for(&d).is_ok());
        assert!(dirichlet_p_energy(&ScalarField::zeros(Arc::new(d)), 1.0).is_err());
    }

    #[test]
    fn constant_field_has_zero_energy() {
        let d = Arc::new(GridDomain::build_annulus(1.0, 2.0, 0.1).unwrap());
        let u = ScalarField::from_fn(d, |_| 3.0);
        for &p in &[1.5, 2.0, 3.0] {
            assert_eq!(dirichlet_p_energy(&u, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn unit_ramp_1d_p3() {
        let n = 101;
        let h = 1.0 / (n - 1) as f64;
        let d = Arc::new(GridDomain::build_rectangle(n, 1, h).unwrap());
        let data = (0..n).map(|i| 1.0 - i as f64 * h).collect();
        let u = ScalarField::from_data(d, data).unwrap();
        let e = dirichlet_p_energy(&u, 3.0).unwrap();
        assert!((e - 1.0).abs() < 1e-12, "{e}");
    }

    #[test]
    fn unit_gradient_2d_p2() {
        let d = Arc::new(GridDomain::build_rectangle(64, 64, 1.0 / 64.0).unwrap());
        let u = ScalarField::from_fn(d.clone(), |p| p[0]);
        let e = dirichlet_p_energy(&u, 2.0).unwrap();
        assert!((e - 1.0).abs() <= 4.0 * d.h(), "{e}");
    }

    #[test]
    fn zero_field_total() {
        let d = Arc::new(GridDomain::build_rectangle(16, 16, 1.0 / 16.0).unwrap());
        let b = total_energy(&ScalarField::zeros(d), 2.0, &params(0.1, 0.5)).unwrap();
        assert_eq!(b.dirichlet, 0.0);
        assert!((b.penalty + 0.05).abs() < 1e-15);
        assert_eq!(b.total, b.dirichlet + b.penalty);
    }

    #[test]
    fn positivity_at_alpha_means_total_is_dirichlet() {
        let d = Arc::new(GridDomain::build_rectangle(16, 1, 1.0 / 16.0).unwrap());
        let u = ScalarField::from_fn(d.clone(), |p| (0.5 - p[0]).max(0.0));
        let s = u.positivity_measure();
        let b = total_energy(&u, 2.0, &params(0.1, s)).unwrap();
        assert_eq!(b.total, b.dirichlet);
    }

    #[test]
    fn residual_of_linear_field_vanishes() {
        let d = Arc::new(GridDomain::build_rectangle(12, 12, 1.0 / 12.0).unwrap());
        let u = ScalarField::from_fn(d, |p| 2.0 + 0.7 * p[0] + 0.3 * p[1]);
        for &p in &[1.5, 2.0, 3.0] {
            let r = p_laplacian_residual(&u, p, 0.0).unwrap();
            assert!(r.reported_count() > 0);
            assert!(r.max_abs() < 1e-10, "p={p}: {}", r.max_abs());
        }
    }

    #[test]
    fn residual_p2_is_five_point_laplacian() {
        let d = Arc::new(GridDomain::build_rectangle(12, 12, 1.0 / 12.0).unwrap());
        let u = ScalarField::from_fn(d.clone(), |p| 2.0 + (3.0 * p[0]).sin() * p[1] * p[1]);
        let r = p_laplacian_residual(&u, 2.0, 0.0).unwrap();
        let h = d.h();
        for n in 0..d.len() {
            if !r.reported[n] {
                continue;
            }
            let nx = d.nx();
            let lap = (u.get(n + 1) + u.get(n - 1) + u.get(n + nx) + u.get(n - nx) - 4.0 * u.get(n))
                / (h * h);
            assert!((r.values.get(n) - lap).abs() < 1e-9 * lap.abs().max(1.0));
        }
    }
}
