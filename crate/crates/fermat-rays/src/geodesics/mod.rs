//! Finsler geodesics from the energy Euler-Lagrange equations.
//!
//! With `L = F^2`, the geodesic acceleration solves
//! `2 g_ij(x,v) a^j = dL/dx^i - d2L/(dv^i dx^j) v^j`,
//! where `g` is the fundamental tensor. Along solutions `F(x, x')` is
//! constant (affine parametrization), tracked as the `F_drift` diagnostic.

mod closed;
mod katok;
mod robles;

pub use closed::{
    classify_distinct, find_closed_geodesics, Classification, ClosedGeodesic, SearchParams,
    SearchReport, SearchStats,
};
pub use katok::{katok_experiment, katok_stationary, katok_zermelo, KatokReport};
pub use robles::{robles_geodesic, HomothetyData};

use crate::finsler::{
    finsler_length, lift_constituents, CurveSample, FinslerMetric, SampledCurve,
};
use crate::geometry::{integrate_charted, ChartedOptions, OdeOptions, Point, StateLayout};
use crate::num::{linalg, HDual};
use crate::{Error, Result};

/// How a [`GeodesicPath`] is parametrized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Parametrization {
    /// Affine in the Finsler sense: `F(x, x')` constant.
    AffineFinsler,
    /// The flow-composition law `g(rho', rho') = exp(-sigma t)`.
    GRescaled { sigma: f64 },
}

#[derive(Debug, Clone)]
pub struct GeodesicPath {
    pub curve: SampledCurve,
    pub parametrization: Parametrization,
    /// `max |F(x,v) - F(x0,v0)|` along the path.
    pub f_drift: f64,
    /// Finsler length of the sampled path (composite quadrature).
    pub length: f64,
    pub handoffs: usize,
}

impl GeodesicPath {
    pub fn start(&self) -> (Point, Vec<f64>) {
        let s = &self.curve.samples[0];
        (Point::new(s.chart, s.x.clone()), s.v.clone())
    }

    pub fn end(&self) -> (Point, Vec<f64>) {
        let s = self.curve.samples.last().unwrap();
        (Point::new(s.chart, s.x.clone()), s.v.clone())
    }
}

/// Geodesic acceleration `a(x, v)` of the energy functional.
///
/// Hyper-dual layout per evaluation: seed slot 1 with a `v`-direction and
/// slot 2 with an `x`-direction; `d12` is then the mixed second derivative.
/// The pure `v`-Hessian reuses one `f64` evaluation of the coefficients,
/// the `x`-derivatives need one coefficient evaluation per direction.
pub fn geodesic_spray(f: &FinslerMetric, p: &Point, v: &[f64]) -> Result<Vec<f64>> {
    if v.iter().all(|&c| c == 0.0) {
        return Err(Error::domain("geodesic spray undefined at v = 0"));
    }
    let dim = f.dim();
    let (_, chol) = f.fundamental_tensor_with_factor(p, v)?;

    // rhs_i = dF^2/dx_i - sum_j d2F^2/(dv_i dx_j) v_j
    let mut rhs = vec![0.0; dim];
    for l in 0..dim {
        // coefficients seeded in slot 2 along x-direction e_l
        let xs: Vec<HDual> = p
            .x
            .iter()
            .enumerate()
            .map(|(k, &xv)| HDual::seeded(xv, 0.0, if k == l { 1.0 } else { 0.0 }))
            .collect();
        let c = f.constituents::<HDual>(&xs)?;
        // dF^2/dx_l with plain v
        let v_plain: Vec<HDual> = v.iter().map(|&c| HDual::constant(c)).collect();
        let f_val = FinslerMetric::f_from(&c, &v_plain);
        let f2 = f_val * f_val;
        rhs[l] += f2.d2;
        // mixed terms: v seeded in slot 1, one direction at a time
        for i in 0..dim {
            let vd: Vec<HDual> = v
                .iter()
                .enumerate()
                .map(|(k, &val)| HDual::seeded(val, if k == i { 1.0 } else { 0.0 }, 0.0))
                .collect();
            let fv = FinslerMetric::f_from(&c, &vd);
            let f2v = fv * fv;
            rhs[i] -= f2v.d12 * v[l];
        }
    }
    // a = (2g)^{-1} rhs; the factor is of g, so halve the solution
    Ok(linalg::cholesky_solve(dim, &chol, &rhs)
        .iter()
        .map(|c| c * 0.5)
        .collect())
}

/// Integrate the geodesic from `(p0, v0)` for parameter length `s_max` with
/// local tolerance `tol`.
pub fn integrate_geodesic(
    f: &FinslerMetric,
    p0: &Point,
    v0: &[f64],
    s_max: f64,
    tol: f64,
) -> Result<GeodesicPath> {
    if v0.iter().all(|&c| c == 0.0) {
        return Err(Error::domain("geodesic needs a nonzero initial velocity"));
    }
    let dim = f.dim();
    let mut y0 = p0.x.clone();
    y0.extend_from_slice(v0);
    let mut rhs = |chart: usize, _s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let p = Point::new(chart, y[..dim].to_vec());
        let a = geodesic_spray(f, &p, &y[dim..])?;
        dy[..dim].copy_from_slice(&y[dim..]);
        dy[dim..].copy_from_slice(&a);
        Ok(())
    };
    let opts = ChartedOptions {
        ode: OdeOptions::with_tol(tol),
        max_sample_spacing: (s_max / 64.0).min(0.25),
    };
    let tr = integrate_charted(
        f.manifold(),
        StateLayout::PhaseSpace,
        p0.chart,
        y0,
        0.0,
        s_max,
        &opts,
        &mut rhs,
        None,
    )?;
    path_from_trajectory(f, tr, Parametrization::AffineFinsler)
}

pub(crate) fn path_from_trajectory(
    f: &FinslerMetric,
    tr: crate::geometry::Trajectory,
    parametrization: Parametrization,
) -> Result<GeodesicPath> {
    let dim = f.dim();
    let samples: Vec<CurveSample> = tr
        .samples
        .iter()
        .map(|s| CurveSample {
            s: s.s,
            chart: s.chart,
            x: s.y[..dim].to_vec(),
            v: s.y[dim..2 * dim].to_vec(),
        })
        .collect();
    let curve = SampledCurve::new(samples);
    let f0 = {
        let s = &curve.samples[0];
        f.f(&Point::new(s.chart, s.x.clone()), &s.v)?
    };
    let mut drift: f64 = 0.0;
    for s in &curve.samples {
        let fv = f.f(&Point::new(s.chart, s.x.clone()), &s.v)?;
        drift = drift.max((fv - f0).abs());
    }
    let length = finsler_length(f, &curve)?.value;
    Ok(GeodesicPath { curve, parametrization, f_drift: drift, length, handoffs: tr.handoffs })
}

/// Relative F-drift of a path, normalized by the initial value.
pub fn relative_f_drift(f: &FinslerMetric, path: &GeodesicPath) -> Result<f64> {
    let (p0, v0) = path.start();
    let f0 = f.f(&p0, &v0)?;
    Ok(path.f_drift / f0.abs().max(1e-300))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::{FinslerData, Provenance, RandersData, StationaryData, ZermeloData};
    use crate::geometry::{ChartManifold, RiemannMetric, ScalarField, VectorField};
    use approx::assert_relative_eq;

    fn euclid() -> FinslerMetric {
        let m = ChartManifold::euclidean_bounded(2, vec![-5.0, -5.0], vec![5.0, 5.0]).unwrap();
        FinslerMetric::riemannian(RiemannMetric::euclidean(m))
    }

    #[test]
    fn euclidean_geodesics_are_straight() {
        let f = euclid();
        let path = integrate_geodesic(&f, &Point::new(0, vec![0.0, 0.0]), &[1.0, 0.0], 3.0, 1e-10)
            .unwrap();
        let (end, vend) = path.end();
        assert_relative_eq!(end.x[0], 3.0, epsilon = 1e-9);
        assert_relative_eq!(end.x[1], 0.0, epsilon = 1e-9);
        assert_relative_eq!(vend[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(path.length, 3.0, max_relative = 1e-9);
    }

    #[test]
    fn riemannian_spray_matches_christoffel() {
        // spray == -Gamma(v, v) in the Riemannian case
        let m = ChartManifold::sphere(2).unwrap();
        let g = RiemannMetric::round(m.clone()).unwrap();
        let f = FinslerMetric::riemannian(g.clone());
        let p = Point::new(0, vec![0.6, -0.3]);
        let v = [0.7, 0.45];
        let a = geodesic_spray(&f, &p, &v).unwrap();
        let gam = g.christoffel(&p).unwrap();
        let dim = 2;
        for k in 0..dim {
            let mut want = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    want -= gam[(k * dim + i) * dim + j] * v[i] * v[j];
                }
            }
            assert_relative_eq!(a[k], want, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn flat_randers_constant_form_has_zero_spray() {
        let m = ChartManifold::euclidean_bounded(2, vec![-5.0, -5.0], vec![5.0, 5.0]).unwrap();
        let data = RandersData::new(
            RiemannMetric::euclidean(m.clone()),
            VectorField::constant(m.clone(), vec![0.4, 0.2]).unwrap(),
        )
        .unwrap();
        let f = FinslerMetric::from_data(FinslerData::Randers(data), Provenance::Randers);
        let p = Point::new(0, vec![1.0, -2.0]);
        let a = geodesic_spray(&f, &p, &[0.3, 0.9]).unwrap();
        assert!(a.iter().all(|c| c.abs() < 1e-12), "spray = {a:?}");
    }

    #[test]
    fn great_circle_closes_after_tau() {
        let m = ChartManifold::sphere(2).unwrap();
        let f = FinslerMetric::riemannian(RiemannMetric::round(m.clone()).unwrap());
        let p0 = Point::new(0, vec![1.0, 0.0]); // on the equator
        // unit vector at this point: conformal factor is 1 on the equator
        let v0 = [0.0, 1.0];
        let path = integrate_geodesic(&f, &p0, &v0, std::f64::consts::TAU, 1e-11).unwrap();
        let (end, _) = path.end();
        let e0 = m.embed_point(&p0);
        let e1 = m.embed_point(&end);
        let dist = crate::num::norm(&crate::num::sub(&e1, &e0));
        assert!(dist < 1e-6, "great circle fails to close: {dist:.3e}");
        assert_relative_eq!(path.length, std::f64::consts::TAU, max_relative = 1e-8);
    }

    #[test]
    fn constant_wind_translates_reachable_set() {
        // Zermelo in the plane, W = (0.5, 0); geodesic "toward (0,1)"
        // reaches (0.5, 1) at F-length 1.
        let m = ChartManifold::euclidean_bounded(2, vec![-5.0, -5.0], vec![5.0, 5.0]).unwrap();
        let z = ZermeloData::new(
            RiemannMetric::euclidean(m.clone()),
            VectorField::constant(m.clone(), vec![0.5, 0.0]).unwrap(),
        )
        .unwrap();
        let f = FinslerMetric::from_data(FinslerData::Zermelo(z), Provenance::Zermelo);
        let p0 = Point::new(0, vec![0.0, 0.0]);
        let v0 = [0.5, 1.0]; // u + W with u = (0,1)
        assert_relative_eq!(f.f(&p0, &v0).unwrap(), 1.0, epsilon = 1e-12);
        let path = integrate_geodesic(&f, &p0, &v0, 1.0, 1e-11).unwrap();
        let (end, _) = path.end();
        assert_relative_eq!(end.x[0], 0.5, epsilon = 1e-9);
        assert_relative_eq!(end.x[1], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn f_is_conserved_along_fermat_geodesics() {
        let m = ChartManifold::torus(2);
        let data = StationaryData::new(
            RiemannMetric::euclidean(m.clone()),
            ScalarField::from_expr(m.clone(), crate::expr::parse("2 + sin(2*pi*x0)*0.3", 2).unwrap())
                .unwrap(),
            VectorField::constant(m.clone(), vec![0.2, -0.1]).unwrap(),
        )
        .unwrap();
        let f = FinslerMetric::from_data(FinslerData::Fermat(data), Provenance::Fermat);
        let p0 = Point::new(0, vec![0.1, 0.7]);
        let v0 = f.unit_vector(&p0, &[0.6, 0.8]).unwrap();
        let path = integrate_geodesic(&f, &p0, &v0, 10.0, 1e-11).unwrap();
        let drift = relative_f_drift(&f, &path).unwrap();
        assert!(drift < 1e-8, "relative F drift {drift:.3e}");
    }

    #[test]
    fn tighter_tolerance_reduces_endpoint_error() {
        let m = ChartManifold::sphere(2).unwrap();
        let f = FinslerMetric::riemannian(RiemannMetric::round(m.clone()).unwrap());
        let p0 = Point::new(0, vec![1.0, 0.0]);
        let v0 = [0.0, 1.0];
        let err = |tol: f64| {
            let path = integrate_geodesic(&f, &p0, &v0, std::f64::consts::TAU, tol).unwrap();
            let (end, _) = path.end();
            let e0 = f.manifold().embed_point(&p0);
            let e1 = f.manifold().embed_point(&end);
            crate::num::norm(&crate::num::sub(&e1, &e0))
        };
        let e_coarse = err(1e-6);
        let e_fine = err(1e-7);
        assert!(
            e_fine * 10.0 <= e_coarse * 2.0,
            "convergence order: e(1e-6)={e_coarse:.3e} e(1e-7)={e_fine:.3e}"
        );
    }

    #[test]
    fn zero_velocity_is_domain_error() {
        let f = euclid();
        assert!(matches!(
            integrate_geodesic(&f, &Point::new(0, vec![0.0, 0.0]), &[0.0, 0.0], 1.0, 1e-9),
            Err(Error::Domain(_))
        ));
    }
}
