//! Scalar abstraction and small numerical kernels.
//!
//! Everything geometric in this crate is evaluated generically over [`Real`],
//! which is implemented by `f64` and by the hyper-dual type [`HDual`]. A
//! hyper-dual evaluation carries two directional seeds and the mixed second
//! derivative, so a single pass yields exact first derivatives and one exact
//! Hessian entry — this is the "analytic or forward-mode" derivative
//! contract; central finite differences survive only as a test oracle.

pub mod hdual;
pub mod interp;
pub mod linalg;

pub use hdual::HDual;

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar type over which all smooth formulas are written.
pub trait Real:
    Copy
    + Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// Value part (discards derivative information).
    fn re(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, e: f64) -> Self;
    fn abs(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn re(self) -> f64 {
        self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

/// Symmetric bilinear form `u^T g v` with `g` stored row-major `dim x dim`.
pub fn qform<T: Real>(g: &[T], u: &[T], v: &[T]) -> T {
    let dim = u.len();
    debug_assert_eq!(g.len(), dim * dim);
    debug_assert_eq!(v.len(), dim);
    let mut acc = T::zero();
    for i in 0..dim {
        for j in 0..dim {
            acc = acc + g[i * dim + j] * u[i] * v[j];
        }
    }
    acc
}

/// Matrix-vector product, row-major `dim x dim`.
pub fn mat_vec<T: Real>(m: &[T], v: &[T]) -> Vec<T> {
    let dim = v.len();
    (0..dim)
        .map(|i| {
            let mut acc = T::zero();
            for j in 0..dim {
                acc = acc + m[i * dim + j] * v[j];
            }
            acc
        })
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| c * x).collect()
}

pub fn add_scaled(a: &[f64], b: &[f64], c: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + c * y).collect()
}

/// Lift an `f64` slice into any `Real` with no derivative seeds.
pub fn lift<T: Real>(xs: &[f64]) -> Vec<T> {
    xs.iter().map(|&x| T::from_f64(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qform_matches_hand_expansion() {
        let g = [2.0, 1.0, 1.0, 3.0];
        let u = [1.0, -1.0];
        let v = [2.0, 0.5];
        // 2*1*2 + 1*1*0.5 + 1*(-1)*2 + 3*(-1)*0.5
        assert_eq!(qform(&g, &u, &v), 4.0 + 0.5 - 2.0 - 1.5);
    }
}
