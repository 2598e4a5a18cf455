//! Hyper-dual numbers: second-order forward-mode differentiation with two
//! seed directions.
//!
//! For `f` evaluated on arguments seeded with directions `p` (slot 1) and
//! `q` (slot 2), the result carries
//!
//! * `re`  — `f(x)`
//! * `d1`  — directional derivative along `p`
//! * `d2`  — directional derivative along `q`
//! * `d12` — the mixed second derivative `p^T H q`
//!
//! The seeds are nilpotent (`e1^2 = e2^2 = 0`), so all four components are
//! exact to rounding; no truncation error is involved.

use super::Real;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HDual {
    pub re: f64,
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
}

impl HDual {
    pub const fn constant(re: f64) -> Self {
        HDual { re, d1: 0.0, d2: 0.0, d12: 0.0 }
    }

    pub const fn seeded(re: f64, d1: f64, d2: f64) -> Self {
        HDual { re, d1, d2, d12: 0.0 }
    }

    /// Chain rule for a scalar function with value `f`, derivative `df`
    /// and second derivative `ddf` at `self.re`.
    fn chain(self, f: f64, df: f64, ddf: f64) -> Self {
        HDual {
            re: f,
            d1: df * self.d1,
            d2: df * self.d2,
            d12: df * self.d12 + ddf * self.d1 * self.d2,
        }
    }
}

impl Add for HDual {
    type Output = HDual;
    fn add(self, o: HDual) -> HDual {
        HDual {
            re: self.re + o.re,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
            d12: self.d12 + o.d12,
        }
    }
}

impl Sub for HDual {
    type Output = HDual;
    fn sub(self, o: HDual) -> HDual {
        HDual {
            re: self.re - o.re,
            d1: self.d1 - o.d1,
            d2: self.d2 - o.d2,
            d12: self.d12 - o.d12,
        }
    }
}

impl Mul for HDual {
    type Output = HDual;
    fn mul(self, o: HDual) -> HDual {
        HDual {
            re: self.re * o.re,
            d1: self.d1 * o.re + self.re * o.d1,
            d2: self.d2 * o.re + self.re * o.d2,
            d12: self.d12 * o.re + self.re * o.d12 + self.d1 * o.d2 + self.d2 * o.d1,
        }
    }
}

impl Div for HDual {
    type Output = HDual;
    fn div(self, o: HDual) -> HDual {
        let inv = o.re.recip();
        self * o.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }
}

impl Neg for HDual {
    type Output = HDual;
    fn neg(self) -> HDual {
        HDual { re: -self.re, d1: -self.d1, d2: -self.d2, d12: -self.d12 }
    }
}

impl Real for HDual {
    fn from_f64(v: f64) -> Self {
        HDual::constant(v)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn sin(self) -> Self {
        let (s, c) = self.re.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.re.sin_cos();
        self.chain(c, -s, -c)
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let inv = self.re.recip();
        self.chain(self.re.ln(), inv, -inv * inv)
    }
    fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.re))
    }
    fn powi(self, n: i32) -> Self {
        let nf = n as f64;
        self.chain(
            self.re.powi(n),
            nf * self.re.powi(n - 1),
            nf * (nf - 1.0) * self.re.powi(n - 2),
        )
    }
    fn powf(self, e: f64) -> Self {
        self.chain(
            self.re.powf(e),
            e * self.re.powf(e - 1.0),
            e * (e - 1.0) * self.re.powf(e - 2.0),
        )
    }
    fn abs(self) -> Self {
        // Not differentiable at 0; callers avoid that point.
        let s = if self.re < 0.0 { -1.0 } else { 1.0 };
        self.chain(self.re.abs(), s, 0.0)
    }
}

/// Gradient of `f` at `x` by seeding one coordinate direction per pass.
pub fn gradient(f: impl Fn(&[HDual]) -> HDual, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let xs: Vec<HDual> = x
                .iter()
                .enumerate()
                .map(|(i, &v)| HDual::seeded(v, if i == k { 1.0 } else { 0.0 }, 0.0))
                .collect();
            f(&xs).d1
        })
        .collect()
}

/// Dense symmetric Hessian of `f` at `x` (row-major), one pass per entry of
/// the upper triangle.
pub fn hessian(f: impl Fn(&[HDual]) -> HDual, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let xs: Vec<HDual> = x
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    HDual::seeded(
                        v,
                        if k == i { 1.0 } else { 0.0 },
                        if k == j { 1.0 } else { 0.0 },
                    )
                })
                .collect();
            let d = f(&xs).d12;
            h[i * n + j] = d;
            h[j * n + i] = d;
        }
    }
    h
}
