//! Corner-gradient quadrature.
//!
//! In 2D every complete cell contributes `h²/4 · Σ_corners |g_c|^p`, where
//! `g_c` is the one-sided gradient at corner `c` built from the two cell
//! edges meeting there. In 1D a segment contributes `h · |Δu / h|^p`.
//! The rule is exact for affine fields, convex in the nodal values, and for
//! `p = 2` it reproduces the 5-point Laplacian.
//!
//! Internally terms are stored without the `h` factors: a term is
//! `(dx² + dy²)^{p/2}` with value differences `dx, dy`, and the common
//! factor is [`scale`].

use num_traits::Float;

use crate::grid::GridDomain;
use crate::num::PowerLaw;

/// Factor turning a sum of raw terms into energy: `h^{2-p}/4` (2D) or
/// `h^{1-p}` (1D).
pub(crate) fn scale(domain: &GridDomain, p: f64) -> f64 {
    let h = domain.h();
    if domain.is_1d() {
        h.powf(1.0 - p)
    } else {
        h.powf(2.0 - p) / 4.0
    }
}

/// The four corner differences `(dx, dy)` of the cell with corner values
/// `a` (lower left), `b` (lower right), `c` (upper left), `d` (upper right).
#[inline]
pub(crate) fn corner_diffs(a: f64, b: f64, c: f64, d: f64) -> [(f64, f64); 4] {
    [(b - a, c - a), (b - a, d - b), (d - c, c - a), (d - c, d - b)]
}

/// Raw (unscaled) energy of one complete cell.
#[inline]
pub(crate) fn cell_raw(domain: &GridDomain, data: &[f64], c: usize, law: &PowerLaw) -> f64 {
    if domain.is_1d() {
        return law.abs_pow(data[c + 1] - data[c]);
    }
    let nx = domain.nx();
    let mut s = 0.0;
    for (dx, dy) in corner_diffs(data[c], data[c + 1], data[c + nx], data[c + nx + 1]) {
        s += law.energy(dx * dx + dy * dy);
    }
    s
}

/// Gradient magnitude at the cell center from edge-averaged differences.
pub(crate) fn cell_center_gradient(domain: &GridDomain, data: &[f64], c: usize) -> f64 {
    let h = domain.h();
    if domain.is_1d() {
        return (data[c + 1] - data[c]).abs() / h;
    }
    let nx = domain.nx();
    let (a, b, cc, d) = (data[c], data[c + 1], data[c + nx], data[c + nx + 1]);
    let gx = 0.5 * ((b - a) + (d - cc));
    let gy = 0.5 * ((cc - a) + (d - b));
    gx.hypot(gy) / h
}

/// One term `((x0 + x1 t)² + (y0 + y1 t)²)^{p/2}` of the local energy of a
/// node as a function of its value `t`.
#[derive(Debug, Clone, Copy, Default)]
struct Term {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Term {
    #[inline]
    fn q(&self, t: f64) -> (f64, f64, f64) {
        let x = self.x0 + self.x1 * t;
        let y = self.y0 + self.y1 * t;
        (x, y, x * x + y * y)
    }

    /// Value of `t` minimizing this term alone.
    fn argmin(&self) -> f64 {
        -(self.x0 * self.x1 + self.y0 * self.y1) / (self.x1 * self.x1 + self.y1 * self.y1)
    }
}

/// The one-variable convex problem for a single nodal value.
#[derive(Debug, Clone)]
pub(crate) struct NodalProblem {
    terms: [Term; 12],
    len: usize,
    lo: f64,
    hi: f64,
}

const MAX_NEWTON: usize = 60;
const GOLDEN_ITERS: usize = 90;

impl NodalProblem {
    /// Collects the terms of every complete cell containing `idx`, with the
    /// current values of all other nodes frozen.
    pub fn gather(domain: &GridDomain, data: &[f64], idx: usize) -> Self {
        let mut prob = Self {
            terms: [Term::default(); 12],
            len: 0,
            lo: f64::INFINITY,
            hi: f64::NEG_INFINITY,
        };
        if domain.is_1d() {
            for c in domain.cells_of(idx) {
                let other = if c == idx { data[c + 1] } else { data[c] };
                // (t - other)² either way
                prob.push(Term {
                    x0: -other,
                    x1: 1.0,
                    y0: 0.0,
                    y1: 0.0,
                });
            }
        } else {
            let nx = domain.nx();
            for c in domain.cells_of(idx) {
                let corners = [c, c + 1, c + nx, c + nx + 1];
                let mut val = [0.0; 4];
                let mut coef = [0.0; 4];
                for (k, &n) in corners.iter().enumerate() {
                    if n == idx {
                        coef[k] = 1.0;
                    } else {
                        val[k] = data[n];
                    }
                }
                // (dx, dy) index pairs per corner, matching `corner_diffs`
                const PAIRS: [((usize, usize), (usize, usize)); 4] = [
                    ((1, 0), (2, 0)),
                    ((1, 0), (3, 1)),
                    ((3, 2), (2, 0)),
                    ((3, 2), (3, 1)),
                ];
                for ((xa, xb), (ya, yb)) in PAIRS {
                    let t = Term {
                        x0: val[xa] - val[xb],
                        x1: coef[xa] - coef[xb],
                        y0: val[ya] - val[yb],
                        y1: coef[ya] - coef[yb],
                    };
                    if t.x1 != 0.0 || t.y1 != 0.0 {
                        prob.push(t);
                    }
                }
            }
        }
        prob
    }

    fn push(&mut self, t: Term) {
        let m = t.argmin();
        self.lo = self.lo.min(m);
        self.hi = self.hi.max(m);
        self.terms[self.len] = t;
        self.len += 1;
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bracket `[lo, hi]` containing every minimizer.
    pub fn bracket(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Exact minimizer for `p = 2`, where the local energy is quadratic.
    pub fn quadratic_min(&self) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for t in &self.terms[..self.len] {
            num += t.x0 * t.x1 + t.y0 * t.y1;
            den += t.x1 * t.x1 + t.y1 * t.y1;
        }
        -num / den
    }

    /// Exact raw local energy.
    pub fn energy(&self, t: f64, law: &PowerLaw) -> f64 {
        let mut s = 0.0;
        for term in &self.terms[..self.len] {
            s += law.energy(term.q(t).2);
        }
        s
    }

    /// Derivative and second derivative (up to the factor `p`) with `q`
    /// regularized by `reg = (η h)²`.
    fn derivatives(&self, t: f64, law: &PowerLaw, reg: f64) -> (f64, f64) {
        let pm2 = law.p() - 2.0;
        let (mut g, mut gp) = (0.0, 0.0);
        for term in &self.terms[..self.len] {
            let (x, y, q) = term.q(t);
            let qr = q + reg;
            if qr == 0.0 {
                continue;
            }
            let w = law.reduced(qr);
            let dot = x * term.x1 + y * term.y1;
            let nn = term.x1 * term.x1 + term.y1 * term.y1;
            g += w * dot;
            gp += w * nn + pm2 * w / qr * dot * dot;
        }
        (g, gp)
    }

    /// Minimizer of the regularized local energy by bracketed Newton,
    /// starting from `t0`.
    pub fn newton(&self, t0: f64, law: &PowerLaw, reg: f64) -> f64 {
        let (mut lo, mut hi) = (self.lo, self.hi);
        if !(hi - lo > 0.0) {
            return lo;
        }
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        let mut t = t0.clamp(lo, hi);
        for _ in 0..MAX_NEWTON {
            let (g, gp) = self.derivatives(t, law, reg);
            if g == 0.0 {
                break;
            }
            if g > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let newton = if gp > 0.0 && gp.is_finite() { t - g / gp } else { f64::NAN };
            if (newton - t).abs() <= 1e-15 * scale {
                // converged; `t` may sit on a bracket end, so test before
                // the bracket check
                break;
            }
            let next = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            t = next;
            if hi - lo <= 1e-15 * scale {
                break;
            }
        }
        t
    }

    /// Golden-section minimization of the exact energy on the bracket.
    pub fn golden(&self, law: &PowerLaw) -> f64 {
        let (mut a, mut b) = (self.lo, self.hi);
        let r = 0.5 * (5.0f64.sqrt() - 1.0);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut fc, mut fd) = (self.energy(c, law), self.energy(d, law));
        for _ in 0..GOLDEN_ITERS {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = self.energy(c, law);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = self.energy(d, law);
            }
        }
        if fc <= fd {
            c
        } else {
            d
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridDomain, ScalarField};
    use alloc::sync::Arc;

    #[test]
    fn p2_nodal_minimizer_is_five_point_average() {
        let d = Arc::new(GridDomain::build_rectangle(5, 5, 0.25).unwrap());
        let u = ScalarField::from_fn(d.clone(), |p| (7.0 * p[0]).sin() + p[1] * p[1]);
        let law = PowerLaw::new(2.0).unwrap();
        let c = d.index(2, 2);
        let prob = NodalProblem::gather(&d, u.data(), c);
        let t = prob.newton(u.get(c), &law, 0.0);
        let avg = (u.get(c - 1) + u.get(c + 1) + u.get(c - 5) + u.get(c + 5)) / 4.0;
        assert!((t - avg).abs() < 1e-13, "{t} vs {avg}");
    }

    #[test]
    fn newton_matches_golden_for_general_p() {
        let d = Arc::new(GridDomain::build_rectangle(5, 5, 0.25).unwrap());
        let u = ScalarField::from_fn(d.clone(), |p| (3.0 * p[0]).cos() * (1.0 + p[1]));
        for &p in &[1.5, 3.0, 4.5] {
            let law = PowerLaw::new(p).unwrap();
            let c = d.index(2, 2);
            let prob = NodalProblem::gather(&d, u.data(), c);
            let t_n = prob.newton(0.0, &law, 0.0);
            let t_g = prob.golden(&law);
            assert!(prob.energy(t_n, &law) <= prob.energy(t_g, &law) + 1e-14, "p={p}");
            assert!((t_n - t_g).abs() < 1e-6, "p={p}: {t_n} {t_g}");
        }
    }

    #[test]
    fn one_d_minimizer_is_midpoint() {
        let d = GridDomain::build_rectangle(3, 1, 0.5).unwrap();
        let data = [1.0, 0.0, 0.2];
        for &p in &[1.5, 2.0, 3.0] {
            let law = PowerLaw::new(p).unwrap();
            let prob = NodalProblem::gather(&d, &data, 1);
            let t = prob.newton(0.0, &law, 0.0);
            assert!((t - 0.6).abs() < 1e-12, "p={p} t={t}");
        }
    }
}
