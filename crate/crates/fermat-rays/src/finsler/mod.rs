//! The metric triad: Fermat, Randers and Zermelo presentations of one and
//! the same family of Finsler metrics, with the fundamental tensor and the
//! derived functionals.

mod comparability;
mod convert;
mod functionals;
mod legendre;
mod reversibility;

pub use comparability::{comparability_constants, ComparabilityEstimate};
pub use convert::{
    fermat_from_stationary, randers_to_zermelo, stationary_from_zermelo, zermelo_from_stationary,
    zermelo_to_randers,
};
pub use functionals::{
    cumulative_length, finsler_energy, finsler_length, CurveSample, QuadratureResult, SampledCurve,
};
pub use legendre::{co_randers_eval, legendre_check};
pub use reversibility::{
    lambda_from_phi, period_lower_bound, period_lower_bound_from_phi, reversibility,
    ReversibilityReport,
};

use crate::geometry::{ChartManifold, Point, RiemannMetric, ScalarField, VectorField};
use crate::num::{lift, qform, HDual, Real};
use crate::num::linalg;
use crate::{Error, Result};
use std::sync::Arc;

/// The triple `(g0, beta, delta)` defining a standard stationary spacetime
/// on `M x R`; also the data of the Fermat metric on `M`.
#[derive(Debug, Clone)]
pub struct StationaryData {
    pub g0: RiemannMetric,
    pub beta: ScalarField,
    pub delta: VectorField,
}

/// Randers data `(h, omega)`; the one-form is stored through its h-dual
/// vector field `B`, i.e. `omega(v) = h(B, v)`.
#[derive(Debug, Clone)]
pub struct RandersData {
    pub h: RiemannMetric,
    pub b: VectorField,
}

/// Zermelo navigation data `(g, W)` with `g(W,W) < 1`.
#[derive(Debug, Clone)]
pub struct ZermeloData {
    pub g: RiemannMetric,
    pub w: VectorField,
}

fn same_manifold(a: &Arc<ChartManifold>, b: &Arc<ChartManifold>) -> Result<()> {
    if !Arc::ptr_eq(a, b) {
        return Err(Error::config("fields must live on the same manifold instance"));
    }
    Ok(())
}

impl StationaryData {
    pub fn new(g0: RiemannMetric, beta: ScalarField, delta: VectorField) -> Result<Self> {
        same_manifold(&g0.manifold, &beta.manifold)?;
        same_manifold(&g0.manifold, &delta.manifold)?;
        let data = StationaryData { g0, beta, delta };
        data.validate_samples(16)?;
        Ok(data)
    }

    pub fn manifold(&self) -> &Arc<ChartManifold> {
        &self.g0.manifold
    }

    fn validate_samples(&self, n: usize) -> Result<()> {
        let mut rng = crate::sampling::rng(0x5741);
        if self.manifold().kind() == &crate::geometry::ManifoldKind::Euclidean
            && self.manifold().sample_box(0).is_err()
        {
            return Ok(()); // nothing to sample; checks happen per evaluation
        }
        for _ in 0..n {
            let p = self.manifold().random_point(&mut rng)?;
            let b = self.beta.value(&p);
            if b <= 0.0 {
                return Err(Error::invariant(format!(
                    "beta must be positive; beta({:?}) = {b}",
                    p.x
                )));
            }
        }
        self.g0.validate(&mut rng, n)
    }

    /// `Lambda(p) = |delta|_0 / sqrt(beta)` — the pointwise non-reversibility.
    pub fn lambda_ratio(&self, p: &Point) -> Result<f64> {
        let b = self.beta.value(p);
        if b <= 1e-300 {
            return Err(Error::invariant(format!(
                "beta -> 0 at {:?}; Lambda unbounded",
                p.x
            )));
        }
        Ok((self.g0.norm_sq(p, &self.delta.value(p)) / b).sqrt())
    }
}

impl RandersData {
    pub fn new(h: RiemannMetric, b: VectorField) -> Result<Self> {
        same_manifold(&h.manifold, &b.manifold)?;
        let data = RandersData { h, b };
        data.validate_samples(16)?;
        Ok(data)
    }

    pub fn manifold(&self) -> &Arc<ChartManifold> {
        &self.h.manifold
    }

    fn validate_samples(&self, n: usize) -> Result<()> {
        let mut rng = crate::sampling::rng(0x5242);
        if self.manifold().kind() == &crate::geometry::ManifoldKind::Euclidean
            && self.manifold().sample_box(0).is_err()
        {
            return Ok(());
        }
        for _ in 0..n {
            let p = self.manifold().random_point(&mut rng)?;
            let nb = self.h.norm_sq(&p, &self.b.value(&p));
            if nb >= 1.0 {
                return Err(Error::invariant(format!(
                    "|omega| must stay below 1; h(B,B) = {nb} at {:?}",
                    p.x
                )));
            }
        }
        self.h.validate(&mut rng, n)
    }

    /// `omega(v) = h(B, v)` at a point.
    pub fn omega(&self, p: &Point, v: &[f64]) -> f64 {
        self.h.inner(p, &self.b.value(p), v)
    }
}

impl ZermeloData {
    pub fn new(g: RiemannMetric, w: VectorField) -> Result<Self> {
        same_manifold(&g.manifold, &w.manifold)?;
        let data = ZermeloData { g, w };
        data.validate_samples(16)?;
        Ok(data)
    }

    pub fn manifold(&self) -> &Arc<ChartManifold> {
        &self.g.manifold
    }

    fn validate_samples(&self, n: usize) -> Result<()> {
        let mut rng = crate::sampling::rng(0x5a45);
        if self.manifold().kind() == &crate::geometry::ManifoldKind::Euclidean
            && self.manifold().sample_box(0).is_err()
        {
            return Ok(());
        }
        for _ in 0..n {
            let p = self.manifold().random_point(&mut rng)?;
            let ww = self.g.norm_sq(&p, &self.w.value(&p));
            if ww >= 1.0 {
                return Err(Error::invariant(format!(
                    "navigation requires g(W,W) < 1; got {ww} at {:?}",
                    p.x
                )));
            }
        }
        self.g.validate(&mut rng, n)
    }

    /// `alpha(x) = 1 - g(W,W)`, in `(0, 1]`.
    pub fn alpha(&self, p: &Point) -> f64 {
        1.0 - self.g.norm_sq(p, &self.w.value(p))
    }
}

/// Which presentation a [`FinslerMetric`] evaluates through.
#[derive(Debug, Clone)]
pub enum FinslerData {
    Fermat(StationaryData),
    Randers(RandersData),
    Zermelo(ZermeloData),
}

/// How the metric came to be; conversions tag their output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Fermat,
    Randers,
    Zermelo,
    Converted,
}

/// A positively 1-homogeneous Finsler metric of Randers type, smooth away
/// from the zero section, with second derivatives of `F^2` available in
/// closed form through hyper-dual evaluation.
#[derive(Debug, Clone)]
pub struct FinslerMetric {
    manifold: Arc<ChartManifold>,
    pub data: FinslerData,
    pub provenance: Provenance,
}

/// Metric/field values at a base point, reusable across many `v`.
pub(crate) enum Constituents<T> {
    Fermat { g0: Vec<T>, beta: T, delta: Vec<T> },
    Randers { h: Vec<T>, b: Vec<T> },
    Zermelo { g: Vec<T>, w: Vec<T>, alpha: T },
}

impl FinslerMetric {
    pub fn from_data(data: FinslerData, provenance: Provenance) -> Self {
        let manifold = match &data {
            FinslerData::Fermat(d) => d.manifold().clone(),
            FinslerData::Randers(d) => d.manifold().clone(),
            FinslerData::Zermelo(d) => d.manifold().clone(),
        };
        FinslerMetric { manifold, data, provenance }
    }

    pub fn riemannian(g: RiemannMetric) -> Self {
        let m = g.manifold.clone();
        FinslerMetric::from_data(
            FinslerData::Zermelo(ZermeloData { g, w: VectorField::zero(m) }),
            Provenance::Zermelo,
        )
    }

    pub fn manifold(&self) -> &Arc<ChartManifold> {
        &self.manifold
    }

    pub fn dim(&self) -> usize {
        self.manifold.dim()
    }

    pub(crate) fn constituents<T: Real>(&self, x: &[T]) -> Result<Constituents<T>> {
        match &self.data {
            FinslerData::Fermat(d) => {
                let beta = d.beta.eval(x);
                if beta.re() <= 0.0 {
                    return Err(Error::invariant(format!(
                        "beta must be positive; beta = {} at chart point {:?}",
                        beta.re(),
                        x.iter().map(|v| v.re()).collect::<Vec<_>>()
                    )));
                }
                Ok(Constituents::Fermat { g0: d.g0.eval(x), beta, delta: d.delta.eval(x) })
            }
            FinslerData::Randers(d) => {
                let h = d.h.eval(x);
                let b = d.b.eval(x);
                let bb = qform(&h, &b, &b);
                if bb.re() >= 1.0 {
                    return Err(Error::invariant(format!(
                        "|omega| must stay below 1; h(B,B) = {} at {:?}",
                        bb.re(),
                        x.iter().map(|v| v.re()).collect::<Vec<_>>()
                    )));
                }
                Ok(Constituents::Randers { h, b })
            }
            FinslerData::Zermelo(d) => {
                let g = d.g.eval(x);
                let w = d.w.eval(x);
                let ww = qform(&g, &w, &w);
                if ww.re() >= 1.0 {
                    return Err(Error::invariant(format!(
                        "navigation requires g(W,W) < 1; got {} at {:?}",
                        ww.re(),
                        x.iter().map(|v| v.re()).collect::<Vec<_>>()
                    )));
                }
                let alpha = T::one() - ww;
                Ok(Constituents::Zermelo { g, w, alpha })
            }
        }
    }

    pub(crate) fn f_from<T: Real>(c: &Constituents<T>, v: &[T]) -> T {
        match c {
            Constituents::Fermat { g0, beta, delta } => {
                let a = qform(g0, delta, v);
                let q = qform(g0, v, v);
                (a + (a * a + *beta * q).sqrt()) / *beta
            }
            Constituents::Randers { h, b } => {
                qform(h, v, v).sqrt() + qform(h, b, v)
            }
            Constituents::Zermelo { g, w, alpha } => {
                let gw = qform(g, w, v);
                let q = qform(g, v, v);
                ((gw * gw) / (*alpha * *alpha) + q / *alpha).sqrt() - gw / *alpha
            }
        }
    }

    /// `F(x, v)` through generic scalars; requires `v != 0` when derivative
    /// seeds are present (F is not smooth at the zero section).
    pub fn eval<T: Real>(&self, x: &[T], v: &[T]) -> Result<T> {
        let c = self.constituents(x)?;
        Ok(Self::f_from(&c, v))
    }

    /// `F(x, v)` at a point; `v = 0` returns exactly 0.
    pub fn f(&self, p: &Point, v: &[f64]) -> Result<f64> {
        if v.iter().all(|&c| c == 0.0) {
            return Ok(0.0);
        }
        self.eval(&p.x, v)
    }

    /// `F^2(x, v)`.
    pub fn f2(&self, p: &Point, v: &[f64]) -> Result<f64> {
        self.f(p, v).map(|f| f * f)
    }

    /// Fundamental tensor `g_ij(x, v) = 1/2 d^2(F^2)/dv_i dv_j`, symmetric
    /// positive definite for `v != 0`.
    pub fn fundamental_tensor(&self, p: &Point, v: &[f64]) -> Result<Vec<f64>> {
        let (g, _) = self.fundamental_tensor_with_factor(p, v)?;
        Ok(g)
    }

    /// Fundamental tensor together with its Cholesky factor (used by the
    /// spray solve).
    pub(crate) fn fundamental_tensor_with_factor(
        &self,
        p: &Point,
        v: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        if v.iter().all(|&c| c == 0.0) {
            return Err(Error::domain(
                "fundamental tensor undefined at v = 0 (F smooth only away from the zero section)",
            ));
        }
        let dim = self.dim();
        let c64 = self.constituents::<f64>(&p.x)?;
        let c = lift_constituents(&c64);
        let mut g = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let vd: Vec<HDual> = v
                    .iter()
                    .enumerate()
                    .map(|(k, &val)| {
                        HDual::seeded(
                            val,
                            if k == i { 1.0 } else { 0.0 },
                            if k == j { 1.0 } else { 0.0 },
                        )
                    })
                    .collect();
                let f = Self::f_from(&c, &vd);
                let f2 = f * f;
                g[i * dim + j] = 0.5 * f2.d12;
                g[j * dim + i] = 0.5 * f2.d12;
            }
        }
        let l = linalg::cholesky(dim, &g).ok_or_else(|| {
            Error::invariant(format!(
                "fundamental tensor not positive definite at {:?}, v = {:?}",
                p.x, v
            ))
        })?;
        Ok((g, l))
    }

    /// v-gradient of `F^2/2` — the Legendre image of `v`.
    pub fn legendre_image(&self, p: &Point, v: &[f64]) -> Result<Vec<f64>> {
        if v.iter().all(|&c| c == 0.0) {
            return Err(Error::domain("Legendre image undefined at v = 0"));
        }
        let dim = self.dim();
        let c64 = self.constituents::<f64>(&p.x)?;
        let c = lift_constituents(&c64);
        let mut xi = vec![0.0; dim];
        for (i, slot) in xi.iter_mut().enumerate() {
            let vd: Vec<HDual> = v
                .iter()
                .enumerate()
                .map(|(k, &val)| HDual::seeded(val, if k == i { 1.0 } else { 0.0 }, 0.0))
                .collect();
            let f = Self::f_from(&c, &vd);
            *slot = 0.5 * (f * f).d1;
        }
        Ok(xi)
    }

    /// Rescale `v` to the indicatrix: `v / F(x, v)`.
    pub fn unit_vector(&self, p: &Point, v: &[f64]) -> Result<Vec<f64>> {
        let f = self.f(p, v)?;
        if f <= 0.0 {
            return Err(Error::domain("cannot normalize the zero vector"));
        }
        Ok(v.iter().map(|c| c / f).collect())
    }
}

pub(crate) fn lift_constituents(c: &Constituents<f64>) -> Constituents<HDual> {
    match c {
        Constituents::Fermat { g0, beta, delta } => Constituents::Fermat {
            g0: lift(g0),
            beta: HDual::constant(*beta),
            delta: lift(delta),
        },
        Constituents::Randers { h, b } => Constituents::Randers { h: lift(h), b: lift(b) },
        Constituents::Zermelo { g, w, alpha } => Constituents::Zermelo {
            g: lift(g),
            w: lift(w),
            alpha: HDual::constant(*alpha),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ChartManifold;
    use approx::assert_relative_eq;

    fn flat_fermat(beta: f64, delta: Vec<f64>) -> FinslerMetric {
        let m = ChartManifold::euclidean_bounded(
            delta.len(),
            vec![-2.0; delta.len()],
            vec![2.0; delta.len()],
        )
        .unwrap();
        let data = StationaryData::new(
            RiemannMetric::euclidean(m.clone()),
            ScalarField::constant(m.clone(), beta),
            VectorField::constant(m.clone(), delta).unwrap(),
        )
        .unwrap();
        FinslerMetric::from_data(FinslerData::Fermat(data), Provenance::Fermat)
    }

    #[test]
    fn fermat_reduces_to_riemannian_norm() {
        let f = flat_fermat(1.0, vec![0.0, 0.0]);
        let p = Point::new(0, vec![0.0, 0.0]);
        assert_relative_eq!(f.f(&p, &[3.0, 4.0]).unwrap(), 5.0, epsilon = 1e-14);
    }

    #[test]
    fn fermat_static_rescaling() {
        let f = flat_fermat(4.0, vec![0.0, 0.0]);
        let p = Point::new(0, vec![0.1, 0.2]);
        assert_relative_eq!(f.f(&p, &[3.0, 4.0]).unwrap(), 2.5, epsilon = 1e-14);
    }

    #[test]
    fn fermat_one_dimensional_drift() {
        let f = flat_fermat(1.0, vec![0.5]);
        let p = Point::new(0, vec![0.0]);
        // F(1) = 0.5 + sqrt(0.25 + 1) = golden ratio
        assert_relative_eq!(f.f(&p, &[1.0]).unwrap(), 1.6180339887498949, epsilon = 1e-12);
    }

    #[test]
    fn f_vanishes_only_at_zero() {
        let f = flat_fermat(1.0, vec![0.5, 0.0]);
        let p = Point::new(0, vec![0.0, 0.0]);
        assert_eq!(f.f(&p, &[0.0, 0.0]).unwrap(), 0.0);
        assert!(f.f(&p, &[1e-8, 0.0]).unwrap() > 0.0);
        assert!(f.f(&p, &[-1e-8, 0.0]).unwrap() > 0.0);
    }

    #[test]
    fn positive_homogeneity() {
        let f = flat_fermat(2.0, vec![0.3, -0.1]);
        let p = Point::new(0, vec![0.2, 0.5]);
        let v = [0.7, -1.3];
        let base = f.f(&p, &v).unwrap();
        for lam in [0.5, 2.0, 7.3] {
            let scaled: Vec<f64> = v.iter().map(|c| c * lam).collect();
            let val = f.f(&p, &scaled).unwrap();
            assert_relative_eq!(val, lam * base, max_relative = 1e-12);
        }
    }

    #[test]
    fn riemannian_fundamental_tensor_is_the_metric() {
        let f = flat_fermat(1.0, vec![0.0, 0.0]);
        let p = Point::new(0, vec![0.3, 0.3]);
        for v in [[1.0, 0.0], [0.3, -2.0], [5.0, 5.0]] {
            let g = f.fundamental_tensor(&p, &v).unwrap();
            assert_relative_eq!(g[0], 1.0, epsilon = 1e-12);
            assert_relative_eq!(g[1], 0.0, epsilon = 1e-12);
            assert_relative_eq!(g[3], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn randers_one_dimensional_fundamental_tensor() {
        // F(v) = |v| + b v, v > 0 => g_11 = (1+b)^2
        let m = ChartManifold::euclidean_bounded(1, vec![-1.0], vec![1.0]).unwrap();
        let data = RandersData::new(
            RiemannMetric::euclidean(m.clone()),
            VectorField::constant(m.clone(), vec![0.3]).unwrap(),
        )
        .unwrap();
        let f = FinslerMetric::from_data(FinslerData::Randers(data), Provenance::Randers);
        let p = Point::new(0, vec![0.0]);
        let g = f.fundamental_tensor(&p, &[2.0]).unwrap();
        assert_relative_eq!(g[0], 1.69, epsilon = 1e-12);
    }

    #[test]
    fn euler_identity_on_random_vectors() {
        let f = flat_fermat(1.7, vec![0.4, 0.1]);
        let mut rng = crate::sampling::rng(7);
        for _ in 0..1000 {
            let p = f.manifold().random_point(&mut rng).unwrap();
            let v = crate::sampling::random_direction(&mut rng, 2);
            let g = f.fundamental_tensor(&p, &v).unwrap();
            let f2 = f.f2(&p, &v).unwrap();
            let gvv = crate::num::qform(&g, &v, &v);
            assert!((gvv - f2).abs() / f2 < 1e-10, "euler identity off: {gvv} vs {f2}");
        }
    }

    #[test]
    fn fundamental_tensor_rejects_zero_vector() {
        let f = flat_fermat(1.0, vec![0.0, 0.0]);
        let p = Point::new(0, vec![0.0, 0.0]);
        assert!(matches!(
            f.fundamental_tensor(&p, &[0.0, 0.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn invariant_violations_error_out() {
        let m = ChartManifold::euclidean_bounded(2, vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        // beta <= 0 somewhere
        let bad_beta = StationaryData::new(
            RiemannMetric::euclidean(m.clone()),
            ScalarField::from_expr(m.clone(), crate::expr::parse("x0", 2).unwrap()).unwrap(),
            VectorField::zero(m.clone()),
        );
        assert!(matches!(bad_beta, Err(Error::Invariant(_))));
        // |B| >= 1
        let bad_b = RandersData::new(
            RiemannMetric::euclidean(m.clone()),
            VectorField::constant(m.clone(), vec![1.2, 0.0]).unwrap(),
        );
        assert!(matches!(bad_b, Err(Error::Invariant(_))));
        // g(W,W) >= 1
        let bad_w = ZermeloData::new(
            RiemannMetric::euclidean(m.clone()),
            VectorField::constant(m.clone(), vec![0.0, 1.0]).unwrap(),
        );
        assert!(matches!(bad_w, Err(Error::Invariant(_))));
    }
}
