use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{GridDomain, ScalarField};
use crate::num::mean_std;

/// One free-boundary node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbNode {
    pub node: usize,
    pub position: [f64; 2],
    pub value: f64,
    /// Unit normal pointing into the zero set.
    pub normal: [f64; 2],
    /// One-sided `|∇u|` into the positivity set, `≥ 0`.
    pub flux: f64,
}

impl FbNode {
    /// Sub-node location of the free boundary along the normal, from the
    /// linear profile `value / flux`.
    pub fn boundary_point(&self) -> [f64; 2] {
        let t = if self.flux > 0.0 { self.value / self.flux } else { 0.0 };
        [
            self.position[0] + t * self.normal[0],
            self.position[1] + t * self.normal[1],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityRow {
    pub center: [f64; 2],
    pub r: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkippedRow {
    pub center: [f64; 2],
    pub r: f64,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DensityTable {
    pub rows: Vec<DensityRow>,
    pub skipped: Vec<SkippedRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeBoundaryReport {
    pub nodes: Vec<FbNode>,
    /// `h^{N-1}` times the number of lattice edges joining a positive node
    /// to a zero node (at least one of them interior).
    pub perimeter: f64,
    /// Mean and spread of the flux over free-boundary nodes at lattice
    /// distance ≥ 2 from ∂Ω; NaN until [`estimate_lambda`] fills them.
    pub lambda_mean: f64,
    pub lambda_std: f64,
    pub lambda_count: usize,
    pub density: DensityTable,
}

impl FreeBoundaryReport {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Free-boundary nodes with normals, fluxes and the edge-count perimeter.
/// A field without a free boundary gives an empty report.
pub fn extract_free_boundary(u: &ScalarField) -> FreeBoundaryReport {
    let d = u.domain();
    let data = u.data();
    let mut nodes = Vec::new();
    for &n in d.interior_nodes() {
        if data[n] > 0.0 && d.neighbours4(n).any(|m| data[m] <= 0.0) {
            let normal = normal_at(d, data, n);
            nodes.push(FbNode {
                node: n,
                position: d.position(n),
                value: data[n],
                normal,
                flux: flux_at(u, n, normal),
            });
        }
    }
    FreeBoundaryReport {
        nodes,
        perimeter: perimeter(d, data),
        lambda_mean: f64::NAN,
        lambda_std: f64::NAN,
        lambda_count: 0,
        density: DensityTable::default(),
    }
}

/// [`extract_free_boundary`] plus `λ` statistics.
pub fn estimate_lambda(u: &ScalarField) -> Result<FreeBoundaryReport> {
    let mut rep = extract_free_boundary(u);
    if rep.is_empty() {
        return Err(Error::EmptyFreeBoundary);
    }
    let d = u.domain();
    let fluxes = rep.nodes.iter().filter(|f| d.is_deep(f.node, 2)).map(|f| f.flux);
    let (mean, std, count) = mean_std(fluxes);
    if count == 0 {
        return Err(Error::NoQualifyingNodes(
            "every free-boundary node touches the domain boundary".into(),
        ));
    }
    rep.lambda_mean = mean;
    rep.lambda_std = std;
    rep.lambda_count = count;
    Ok(rep)
}

/// Node-counted fraction of positive nodes in the lattice ball of radius
/// `r` around every free-boundary node. Radii below `4h` or beyond the
/// distance to ∂Ω are recorded as skipped.
pub fn density_ratios(u: &ScalarField, radii: &[f64]) -> Result<DensityTable> {
    let rep = extract_free_boundary(u);
    if rep.is_empty() {
        return Err(Error::EmptyFreeBoundary);
    }
    let d = u.domain();
    let h = d.h();
    let dist = d.boundary_distance_field();
    let mut table = DensityTable::default();
    for f in &rep.nodes {
        for &r in radii {
            if r < 4.0 * h * (1.0 - 1e-12) {
                table.skipped.push(SkippedRow {
                    center: f.position,
                    r,
                    reason: "radius below 4h",
                });
                continue;
            }
            if r > dist[f.node] {
                table.skipped.push(SkippedRow {
                    center: f.position,
                    r,
                    reason: "ball leaves the domain",
                });
                continue;
            }
            let (mut pos, mut total) = (0usize, 0usize);
            for_ball(d, f.node, r, |m| {
                total += 1;
                if u.get(m) > 0.0 {
                    pos += 1;
                }
            });
            table.rows.push(DensityRow {
                center: f.position,
                r,
                ratio: pos as f64 / total as f64,
            });
        }
    }
    Ok(table)
}

/// Calls `f` on every present node within distance `r` of node `center`.
pub(crate) fn for_ball(d: &GridDomain, center: usize, r: f64, mut f: impl FnMut(usize)) {
    let h = d.h();
    let k = (r / h).floor() as isize;
    let (ci, cj) = d.coords(center);
    let (ci, cj) = (ci as isize, cj as isize);
    let kj = if d.is_1d() { 0 } else { k };
    let rr = r * r * (1.0 + 1e-12);
    for dj in -kj..=kj {
        for di in -k..=k {
            let (i, j) = (ci + di, cj + dj);
            if i < 0 || j < 0 || i >= d.nx() as isize || j >= d.ny() as isize {
                continue;
            }
            let m = d.index(i as usize, j as usize);
            let dd = ((di * di + dj * dj) as f64) * h * h;
            if dd <= rr && d.is_present(m) {
                f(m);
            }
        }
    }
}

fn perimeter(d: &GridDomain, data: &[f64]) -> f64 {
    let mut edges = 0usize;
    for &a in d.interior_nodes() {
        for b in d.neighbours4(a) {
            if d.is_interior(b) && b < a {
                continue;
            }
            if (data[a] > 0.0) != (data[b] > 0.0) {
                edges += 1;
            }
        }
    }
    edges as f64 * d.h().powi(d.dim() as i32 - 1)
}

/// Sobel gradient of the positivity indicator, negated and normalized. Falls
/// back to the mean direction towards the zero 4-neighbours.
fn normal_at(d: &GridDomain, data: &[f64], n: usize) -> [f64; 2] {
    if !d.is_1d() {
        let (i, j) = d.coords(n);
        if i > 0 && j > 0 && i + 1 < d.nx() && j + 1 < d.ny() {
            let chi = |ii: usize, jj: usize| {
                let m = d.index(ii, jj);
                let m = if d.is_present(m) { m } else { n };
                if data[m] > 0.0 {
                    1.0
                } else {
                    0.0
                }
            };
            let gx = (chi(i + 1, j - 1) - chi(i - 1, j - 1))
                + 2.0 * (chi(i + 1, j) - chi(i - 1, j))
                + (chi(i + 1, j + 1) - chi(i - 1, j + 1));
            let gy = (chi(i - 1, j + 1) - chi(i - 1, j - 1))
                + 2.0 * (chi(i, j + 1) - chi(i, j - 1))
                + (chi(i + 1, j + 1) - chi(i + 1, j - 1));
            let g = gx.hypot(gy);
            if g > 0.0 {
                return [-gx / g, -gy / g];
            }
        }
    }
    let p = d.position(n);
    let mut s = [0.0, 0.0];
    let mut first = None;
    for m in d.neighbours4(n) {
        if data[m] <= 0.0 {
            let q = d.position(m);
            let dir = [(q[0] - p[0]) / d.h(), (q[1] - p[1]) / d.h()];
            first.get_or_insert(dir);
            s[0] += dir[0];
            s[1] += dir[1];
        }
    }
    let g = s[0].hypot(s[1]);
    if g > 0.0 {
        [s[0] / g, s[1] / g]
    } else {
        first.unwrap_or([1.0, 0.0])
    }
}

/// `(u(x − hν) − u(x)) / h` by interpolation, or the steepest one-sided
/// axis difference when the point falls outside complete cells.
fn flux_at(u: &ScalarField, n: usize, normal: [f64; 2]) -> f64 {
    let d = u.domain();
    let h = d.h();
    let x = d.position(n);
    let inside = [x[0] - h * normal[0], x[1] - h * normal[1]];
    let q = match u.interpolate(inside) {
        Some(v) => (v - u.get(n)) / h,
        None => d
            .neighbours4(n)
            .map(|m| (u.get(m) - u.get(n)) / h)
            .fold(0.0, f64::max),
    };
    q.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::sync::Arc;
    use core::f64::consts::PI;

    fn square(n: usize) -> Arc<GridDomain> {
        Arc::new(GridDomain::build_rectangle(n, n, 1.0 / n as f64).unwrap())
    }

    #[test]
    fn one_d_ramp() {
        let n = 64;
        let h = 1.0 / n as f64;
        let d = Arc::new(GridDomain::build_rectangle(n, 1, h).unwrap());
        let u = ScalarField::from_fn(d, |x| 2.0 * (0.5 - x[0]).max(0.0));
        let rep = estimate_lambda(&u).unwrap();
        assert_eq!(rep.nodes.len(), 1);
        assert!((rep.nodes[0].position[0] - 0.5).abs() < h);
        assert_eq!(rep.perimeter, 1.0);
        assert!((rep.lambda_mean - 2.0).abs() < 1e-12);
        assert_eq!(rep.nodes[0].normal, [1.0, 0.0]);
        assert!((rep.nodes[0].boundary_point()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn halfplane_profile() {
        let d = square(32);
        let h = d.h();
        // kink halfway between two rows
        let y0 = 0.5;
        let u = ScalarField::from_fn(d.clone(), |x| 2.0 * (y0 - x[1]).max(0.0));
        let rep = estimate_lambda(&u).unwrap();
        let row = d.coords(rep.nodes[0].node).1;
        assert!(rep.nodes.iter().all(|f| d.coords(f.node).1 == row));
        for f in &rep.nodes {
            if d.is_deep(f.node, 2) {
                assert!((f.normal[0]).abs() < 1e-6 && (f.normal[1] - 1.0).abs() < 1e-6);
            }
        }
        assert!((rep.lambda_mean - 2.0).abs() < 1e-9, "{}", rep.lambda_mean);
        assert!(rep.lambda_std < 1e-9);
        assert!((rep.perimeter - rep.nodes.len() as f64 * d.h()).abs() < 1e-12);
        assert!(rep.nodes.iter().all(|f| f.flux >= 0.0));
        let tab = density_ratios(&u, &[4.0 * h, 6.0 * h, 8.0 * h]).unwrap();
        assert!(!tab.rows.is_empty());
        for row in &tab.rows {
            assert!((row.ratio - 0.5).abs() <= 2.0 * h / row.r, "{row:?}");
        }
    }

    #[test]
    fn diagonal_profile_flux() {
        let d = square(48);
        let nu = [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()];
        let u = ScalarField::from_fn(d, |x| 1.5 * (0.97 - x[0] * nu[0] - x[1] * nu[1]).max(0.0));
        let rep = estimate_lambda(&u).unwrap();
        assert!((rep.lambda_mean - 1.5).abs() < 0.05 * 1.5, "{}", rep.lambda_mean);
    }

    #[test]
    fn quarter_disk_perimeter() {
        let d = square(100);
        let u = ScalarField::from_fn(d, |x| (0.3 - x[0].hypot(x[1])).max(0.0));
        let rep = extract_free_boundary(&u);
        let exact = 0.5 * PI * 0.3;
        assert!((rep.perimeter - exact).abs() <= 0.25 * exact * 1.3, "{}", rep.perimeter);
        assert!(rep.perimeter >= exact * 0.95);
    }

    #[test]
    fn convex_corner_density() {
        let d = square(64);
        let h = d.h();
        let u = ScalarField::from_fn(d.clone(), |x| ((0.5 - x[0]).min(0.5 - x[1])).max(0.0));
        let tab = density_ratios(&u, &[4.0 * h]).unwrap();
        let corner = tab
            .rows
            .iter()
            .filter(|r| r.center[0] > 0.45 && r.center[1] > 0.45)
            .map(|r| r.ratio)
            .fold(1.0, f64::min);
        assert!(corner > 0.2 && corner < 0.45, "{corner}");
    }

    #[test]
    fn density_skips_bad_radii() {
        let d = square(32);
        let h = d.h();
        let u = ScalarField::from_fn(d, |x| (0.5 - x[1]).max(0.0));
        let tab = density_ratios(&u, &[2.0 * h, 0.9]).unwrap();
        assert!(tab.rows.is_empty());
        assert_eq!(tab.skipped.len(), 2 * extract_free_boundary(&u).nodes.len());
    }

    #[test]
    fn no_free_boundary() {
        let d = square(8);
        let pos = ScalarField::from_fn(d.clone(), |_| 1.0);
        assert!(extract_free_boundary(&pos).is_empty());
        assert_eq!(estimate_lambda(&pos), Err(Error::EmptyFreeBoundary));
        assert!(extract_free_boundary(&ScalarField::zeros(d)).is_empty());
    }
}
