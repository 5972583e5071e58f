use num_traits::Float;

use crate::error::{invalid, Result};

/// A validated exponent `p > 1` with fast paths for the common values.
///
/// Every energy term has the form `q^{p/2}` with `q = |g|²`; the derivatives
/// need `q^{p/2-1}` and `q^{p/2-2}`. [`PowerLaw::reduced`] returns
/// `q^{p/2-1}` and the other two are derived from it, so each term costs a
/// single transcendental call (none for `p = 2`, a square root for `p = 3`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    p: f64,
    kind: Kind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Two,
    Three,
    Four,
    ThreeHalves,
    General,
}

impl PowerLaw {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(invalid("exponent p must satisfy p > 1"));
        }
        let kind = if p == 2.0 {
            Kind::Two
        } else if p == 3.0 {
            Kind::Three
        } else if p == 4.0 {
            Kind::Four
        } else if p == 1.5 {
            Kind::ThreeHalves
        } else {
            Kind::General
        };
        Ok(Self { p, kind })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn is_quadratic(&self) -> bool {
        self.kind == Kind::Two
    }

    /// `q^{p/2 - 1}` for `q ≥ 0`.
    #[inline]
    pub fn reduced(&self, q: f64) -> f64 {
        match self.kind {
            Kind::Two => 1.0,
            Kind::Three => q.sqrt(),
            Kind::Four => q,
            Kind::ThreeHalves => {
                if q == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / q.sqrt().sqrt()
                }
            }
            Kind::General => q.powf(0.5 * self.p - 1.0),
        }
    }

    /// `q^{p/2}` for `q ≥ 0`, exact zero at `q = 0`.
    #[inline]
    pub fn energy(&self, q: f64) -> f64 {
        match self.kind {
            Kind::Two => q,
            Kind::Three => q * q.sqrt(),
            Kind::Four => q * q,
            Kind::ThreeHalves => q.sqrt() * q.sqrt().sqrt(),
            Kind::General => {
                if q == 0.0 {
                    0.0
                } else {
                    q.powf(0.5 * self.p)
                }
            }
        }
    }

    /// `|x|^p` for scalars.
    #[inline]
    pub fn abs_pow(&self, x: f64) -> f64 {
        self.energy(x * x)
    }
}

/// Compensated (Neumaier) summation; order-deterministic.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Sum {
    sum: f64,
    comp: f64,
}

impl Sum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64, usize) {
    let mut n = 0usize;
    let mut s = Sum::default();
    for v in values.clone() {
        s.add(v);
        n += 1;
    }
    if n == 0 {
        return (f64::NAN, f64::NAN, 0);
    }
    let mean = s.value() / n as f64;
    let mut var = Sum::default();
    for v in values {
        var.add((v - mean) * (v - mean));
    }
    (mean, (var.value() / n as f64).sqrt(), n)
}
