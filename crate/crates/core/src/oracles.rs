//! Reference solutions: the one-dimensional minimizer, radial p-harmonic
//! profiles, and the radial minimizer of the annulus problem.
//!
//! The 1D and annulus oracles are brute-force scans over a one-parameter
//! family followed by golden-section refinement, independent of the lattice
//! solver.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::energy::{penalty, PenaltyParams};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    BelowAlpha,
    AtKink,
    AboveAlpha,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::BelowAlpha => "below_alpha",
            Branch::AtKink => "at_kink",
            Branch::AboveAlpha => "above_alpha",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oracle1DResult {
    pub s_star: f64,
    pub lambda_star: f64,
    pub energy: f64,
    pub branch: Branch,
}

/// `E(s) = b^p s^{1-p} + F_ε(s)`: energy of the ramp from `b` at 0 to 0 at
/// `s` on the unit interval.
pub fn ramp_energy(s: f64, b: f64, p: f64, params: &PenaltyParams) -> f64 {
    b.powf(p) * s.powf(1.0 - p) + penalty(s, params)
}

/// Minimizes [`ramp_energy`] over `s ∈ (0, 1]` by scanning `s_grid` points
/// and refining the best cell by golden section. The kink `s = α` is always
/// compared explicitly, and ties go to the smallest `s`.
pub fn oracle_1d_minimizer(
    b: f64,
    p: f64,
    epsilon: f64,
    alpha: f64,
    s_grid: usize,
) -> Result<Oracle1DResult> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid("boundary value b must be positive"));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("exponent p must satisfy p > 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha must lie in (0, 1)"));
    }
    if s_grid < 3 {
        return Err(invalid("s_grid must be at least 3"));
    }
    let params = PenaltyParams::new(epsilon, alpha)?;
    let e = |s: f64| ramp_energy(s, b, p, &params);
    let (s, energy) = scan_refine(&e, 0.0, 1.0, s_grid, Some(alpha));
    let branch = if s == alpha {
        Branch::AtKink
    } else if s < alpha {
        Branch::BelowAlpha
    } else {
        Branch::AboveAlpha
    };
    Ok(Oracle1DResult {
        s_star: s,
        lambda_star: b / s,
        energy,
        branch,
    })
}

/// `(s, E(s))` at `s_grid` equispaced points of `(0, 1]`.
pub fn oracle_1d_curve(
    b: f64,
    p: f64,
    epsilon: f64,
    alpha: f64,
    s_grid: usize,
) -> Result<Vec<(f64, f64)>> {
    let params = PenaltyParams::new(epsilon, alpha)?;
    Ok((1..=s_grid)
        .map(|k| {
            let s = k as f64 / s_grid as f64;
            (s, ramp_energy(s, b, p, &params))
        })
        .collect())
}

/// Scans `f` on `n` points of `(lo, hi]`, refines around the best one and
/// compares with `pin` (a point where `f` has a kink).
fn scan_refine(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize, pin: Option<f64>) -> (f64, f64) {
    let step = (hi - lo) / n as f64;
    let mut best = (hi, f64::INFINITY);
    let mut best_k = n;
    for k in 1..=n {
        let s = lo + step * k as f64;
        let v = f(s);
        if v < best.1 {
            best = (s, v);
            best_k = k;
        }
    }
    let a = lo + step * (best_k - 1) as f64;
    let c = (lo + step * (best_k + 1) as f64).min(hi);
    let refined = golden(f, a.max(lo + 1e-3 * step), c);
    if refined.1 < best.1 {
        best = refined;
    }
    if let Some(x) = pin {
        if x > lo && x <= hi {
            let v = f(x);
            if v <= best.1 || (v - best.1).abs() <= 1e-12 * v.abs().max(1.0) {
                best = (x, v);
            }
        }
    }
    best
}

fn golden(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Radially symmetric p-harmonic function `a + b·r^k`, `k = (p-N)/(p-1)`,
/// or `a + b·log r` when `p = N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    pub inner_r: f64,
    pub outer_r: f64,
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub n: usize,
}

impl RadialProfile {
    fn is_log(&self) -> bool {
        self.p == self.n as f64
    }

    /// `k = (p - N)/(p - 1)`; 0 for the logarithmic case.
    pub fn exponent(&self) -> f64 {
        (self.p - self.n as f64) / (self.p - 1.0)
    }

    fn basis(&self, r: f64) -> f64 {
        if self.is_log() {
            r.ln()
        } else {
            r.powf(self.exponent())
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.a + self.b * self.basis(r)
    }

    /// `dw/dr`.
    pub fn derivative(&self, r: f64) -> f64 {
        if self.is_log() {
            self.b / r
        } else {
            let k = self.exponent();
            self.b * k * r.powf(k - 1.0)
        }
    }

    /// `∫_{inner < |x| < outer} |∇w|^p` in closed form.
    pub fn dirichlet_energy(&self) -> f64 {
        let omega = surface_measure(self.n);
        let (r0, r1) = (self.inner_r, self.outer_r);
        if self.is_log() {
            // |b/r|^p r^{N-1} = |b|^p r^{-1}
            return omega * self.b.abs().powf(self.p) * (r1 / r0).ln();
        }
        let k = self.exponent();
        // |b k r^{k-1}|^p r^{N-1} = |bk|^p r^{k-1}, since (k-1)p + N - 1 = k - 1
        omega * (self.b * k).abs().powf(self.p) * (r1.powf(k) - r0.powf(k)) / k
    }
}

/// Measure of the unit sphere `S^{N-1}`: 2 for `N = 1`, `2π` for `N = 2`.
fn surface_measure(n: usize) -> f64 {
    if n == 1 {
        2.0
    } else {
        2.0 * PI
    }
}

/// Volume of the unit ball in `R^N`.
fn ball_volume(n: usize) -> f64 {
    surface_measure(n) / n as f64
}

pub fn radial_p_harmonic(
    inner_r: f64,
    outer_r: f64,
    inner_val: f64,
    outer_val: f64,
    p: f64,
    n: usize,
) -> Result<RadialProfile> {
    if !(inner_r > 0.0 && outer_r > inner_r && outer_r.is_finite()) {
        return Err(invalid("radii must satisfy 0 < inner < outer"));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("exponent p must satisfy p > 1"));
    }
    if n != 1 && n != 2 {
        return Err(invalid("dimension must be 1 or 2"));
    }
    if !(inner_val.is_finite() && outer_val.is_finite()) {
        return Err(invalid("endpoint values must be finite"));
    }
    let mut prof = RadialProfile {
        inner_r,
        outer_r,
        a: 0.0,
        b: 0.0,
        p,
        n,
    };
    let (f0, f1) = (prof.basis(inner_r), prof.basis(outer_r));
    prof.b = (outer_val - inner_val) / (f1 - f0);
    prof.a = inner_val - prof.b * f0;
    Ok(prof)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusOracle {
    pub r_star: f64,
    pub profile: RadialProfile,
    pub energy: f64,
}

/// `∫|∇w|^p + (1/ε)|{w > 0}|` for the radial profile from `c0` at `delta` to
/// 0 at `r`.
pub fn annulus_energy(r: f64, delta: f64, c0: f64, p: f64, n: usize, epsilon: f64) -> Result<f64> {
    let prof = radial_p_harmonic(delta, r, c0, 0.0, p, n)?;
    let shell = ball_volume(n) * (r.powi(n as i32) - delta.powi(n as i32));
    Ok(prof.dirichlet_energy() + shell / epsilon)
}

/// Minimizes [`annulus_energy`] over `R ∈ (δ, 2δ]` by a scan of `r_grid`
/// points and golden-section refinement.
pub fn oracle_annulus_minimizer(
    delta: f64,
    c0: f64,
    p: f64,
    n: usize,
    epsilon: f64,
    r_grid: usize,
) -> Result<AnnulusOracle> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta must be positive"));
    }
    if !(c0 > 0.0 && epsilon > 0.0) {
        return Err(invalid("c0 and epsilon must be positive"));
    }
    if r_grid < 3 {
        return Err(invalid("r_grid must be at least 3"));
    }
    radial_p_harmonic(delta, 2.0 * delta, c0, 0.0, p, n)?;
    let f = |r: f64| annulus_energy(r, delta, c0, p, n, epsilon).unwrap_or(f64::INFINITY);
    let (r_star, energy) = scan_refine(&f, delta, 2.0 * delta, r_grid, None);
    Ok(AnnulusOracle {
        r_star,
        profile: radial_p_harmonic(delta, r_star, c0, 0.0, p, n)?,
        energy,
    })
}

pub fn oracle_annulus_curve(
    delta: f64,
    c0: f64,
    p: f64,
    n: usize,
    epsilon: f64,
    r_grid: usize,
) -> Result<Vec<(f64, f64)>> {
    (1..=r_grid)
        .map(|k| {
            let r = delta * (1.0 + k as f64 / r_grid as f64);
            Ok((r, annulus_energy(r, delta, c0, p, n, epsilon)?))
        })
        .collect()
}
