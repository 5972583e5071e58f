use alloc::format;
use alloc::sync::Arc;

use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::grid::{GridDomain, ScalarField};

/// Rescaling `u_ρ(x) = u(x₀ + ρx) / ρ` sampled on the unit-ball lattice
/// with `resolution` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupSpec {
    pub center: [f64; 2],
    pub rho: f64,
    pub resolution: usize,
}

impl BlowupSpec {
    pub fn validate_for(&self, domain: &GridDomain) -> Result<()> {
        if !(self.rho >= 4.0 * domain.h() * (1.0 - 1e-12)) || !self.rho.is_finite() {
            return Err(invalid("blow-up radius must be at least 4h"));
        }
        if self.resolution < 5 || self.resolution.is_multiple_of(2) {
            return Err(invalid("blow-up resolution must be odd and at least 5"));
        }
        Ok(())
    }
}

/// Bilinear samples of `u(x₀ + ρx) / ρ` at every present node of the
/// unit-ball lattice; errors when a sample point leaves the complete cells.
pub fn blowup_rescale(u: &ScalarField, spec: &BlowupSpec) -> Result<ScalarField> {
    let d = u.domain();
    spec.validate_for(d)?;
    let target = Arc::new(GridDomain::build_unit_ball(spec.resolution, d.is_1d())?);
    let mut out = ScalarField::zeros(target.clone());
    for m in 0..target.len() {
        if !target.is_present(m) {
            continue;
        }
        let x = target.position(m);
        let y = if d.is_1d() { 0.0 } else { x[1] };
        let point = [spec.center[0] + spec.rho * x[0], spec.center[1] + spec.rho * y];
        let v = u.interpolate(point).ok_or_else(|| {
            Error::OutsideDomain(format!("blow-up ball of radius {} leaves the domain", spec.rho))
        })?;
        out.set(m, v / spec.rho);
    }
    Ok(out)
}

/// Best one-plane profile `λ (x·ν)⁻` for a rescaled field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfplaneFit {
    pub lambda: f64,
    /// Unit normal pointing into the zero set.
    pub normal: [f64; 2],
    /// `max |v − λ (x·ν)⁻|` over present nodes.
    pub sup_distance: f64,
    /// Fraction of interior nodes where `{v > 0}` and `{x·ν < 0}` disagree.
    pub indicator_mismatch: f64,
    /// Largest `x·ν` over positive nodes, in lattice cells.
    pub overshoot_cells: f64,
}

impl HalfplaneFit {
    /// Positivity confined to `{x·ν < 0}` up to `cells` lattice cells.
    pub fn one_sided(&self, cells: f64) -> bool {
        self.overshoot_cells <= cells
    }
}

/// Least-squares fit `v ≈ g·x` over positive nodes, `λ = |g|`, `ν = −g/λ`.
pub fn fit_halfplane(v: &ScalarField) -> Result<HalfplaneFit> {
    let d = v.domain();
    let data = v.data();
    let (mut sxx, mut sxy, mut syy, mut bx, mut by) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut any = false;
    for m in 0..d.len() {
        if d.is_present(m) && data[m] > 0.0 {
            let x = d.position(m);
            let y = if d.is_1d() { 0.0 } else { x[1] };
            sxx += x[0] * x[0];
            sxy += x[0] * y;
            syy += y * y;
            bx += x[0] * data[m];
            by += y * data[m];
            any = true;
        }
    }
    if !any {
        return Err(Error::NoQualifyingNodes("rescaled field has no positive node".into()));
    }
    let g = if d.is_1d() {
        [bx / sxx, 0.0]
    } else {
        let det = sxx * syy - sxy * sxy;
        if !(det.abs() > 0.0) {
            return Err(Error::InsufficientData("positive nodes are collinear".into()));
        }
        [(bx * syy - by * sxy) / det, (by * sxx - bx * sxy) / det]
    };
    let lambda = g[0].hypot(g[1]);
    if !(lambda > 0.0) {
        return Err(Error::InsufficientData("fitted slope vanishes".into()));
    }
    let normal = [-g[0] / lambda, -g[1] / lambda];
    let (mut sup, mut mismatch, mut total, mut over) = (0.0f64, 0usize, 0usize, f64::NEG_INFINITY);
    for m in 0..d.len() {
        if !d.is_present(m) {
            continue;
        }
        let x = d.position(m);
        let y = if d.is_1d() { 0.0 } else { x[1] };
        let s = x[0] * normal[0] + y * normal[1];
        sup = sup.max((data[m] - lambda * (-s).max(0.0)).abs());
        if d.is_interior(m) {
            total += 1;
            if (data[m] > 0.0) != (s < 0.0) {
                mismatch += 1;
            }
        }
        if data[m] > 0.0 {
            over = over.max(s / d.h());
        }
    }
    Ok(HalfplaneFit {
        lambda,
        normal,
        sup_distance: sup,
        indicator_mismatch: mismatch as f64 / total.max(1) as f64,
        overshoot_cells: over,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_profile_is_invariant() {
        let d = Arc::new(GridDomain::build_rectangle(64, 64, 1.0 / 64.0).unwrap());
        let nu = [0.6, 0.8];
        let c = [0.5, 0.5];
        let u = ScalarField::from_fn(d.clone(), |x| {
            2.0 * (-(x[0] - c[0]) * nu[0] - (x[1] - c[1]) * nu[1]).max(0.0)
        });
        for &rho in &[0.4, 0.2, 0.1] {
            let spec = BlowupSpec { center: c, rho, resolution: 21 };
            let v = blowup_rescale(&u, &spec).unwrap();
            let fit = fit_halfplane(&v).unwrap();
            // bilinear interpolation is exact away from the kink
            assert!((fit.lambda - 2.0).abs() < 0.1, "{fit:?}");
            assert!((fit.normal[0] - 0.6).abs() < 0.05 && (fit.normal[1] - 0.8).abs() < 0.05);
            assert!(fit.one_sided(2.0));
            assert!(v.lipschitz_estimate() <= u.lipschitz_estimate() * 1.5);
        }
    }

    #[test]
    fn axis_profile_is_exact() {
        let d = Arc::new(GridDomain::build_rectangle(64, 64, 1.0 / 64.0).unwrap());
        let x0 = d.position(d.index(32, 0))[0];
        let u = ScalarField::from_fn(d, |x| 3.0 * (x0 - x[0]).max(0.0));
        let spec = BlowupSpec { center: [x0, 0.5], rho: 0.25, resolution: 17 };
        let v = blowup_rescale(&u, &spec).unwrap();
        let fit = fit_halfplane(&v).unwrap();
        assert!((fit.lambda - 3.0).abs() < 1e-9);
        assert!(fit.sup_distance < 1e-9);
        assert_eq!(fit.indicator_mismatch, 0.0);
    }

    #[test]
    fn rejects_bad_specs() {
        let d = Arc::new(GridDomain::build_rectangle(32, 32, 1.0 / 32.0).unwrap());
        let u = ScalarField::zeros(d.clone());
        let tiny = BlowupSpec { center: [0.5, 0.5], rho: d.h(), resolution: 9 };
        assert!(blowup_rescale(&u, &tiny).is_err());
        let big = BlowupSpec { center: [0.1, 0.5], rho: 0.3, resolution: 9 };
        assert!(matches!(blowup_rescale(&u, &big), Err(Error::OutsideDomain(_))));
        let ok = BlowupSpec { center: [0.5, 0.5], rho: 0.2, resolution: 9 };
        assert!(fit_halfplane(&blowup_rescale(&u, &ok).unwrap()).is_err());
    }
}
