//! Geodesics of Zermelo metrics whose wind is an infinitesimal homothety,
//! constructed by composing the wind flow with a rescaled base geodesic.
//!
//! For `L_W g = sigma g` (constant `sigma`), the unit-speed navigation
//! geodesics are `P(t) = phi(t, rho(t))` with `phi` the flow of `W` and
//! `rho` a geodesic of `g` parametrized so that `g(rho', rho') = e^{-sigma t}`.
//! In the stationary picture the same composition runs with the flow of
//! `-delta`. This gives an oracle fully independent of the spray integrator.

use super::{integrate_geodesic, GeodesicPath, Parametrization};
use crate::finsler::{
    finsler_length, CurveSample, FinslerData, FinslerMetric, Provenance, SampledCurve, ZermeloData,
};
use crate::geometry::{flow_with_jacobian, Point, RiemannMetric, VectorField};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct HomothetyData {
    pub sigma: f64,
    /// Sampled max of `|L_W g - sigma g|` (sup over components).
    pub validity_residual: f64,
}

impl HomothetyData {
    /// Fit `sigma` by least squares over sampled points and report the
    /// worst residual of `L_W g - sigma g`.
    pub fn estimate(g: &RiemannMetric, w: &VectorField, n: usize, seed: u64) -> Result<Self> {
        let m = &g.manifold;
        let dim = m.dim();
        let mut rng = crate::sampling::rng(seed);
        let mut num = 0.0;
        let mut den = 0.0;
        let mut lies = Vec::with_capacity(n);
        for _ in 0..n.max(8) {
            let p = m.random_point(&mut rng)?;
            let lie = lie_derivative(g, w, &p);
            let gm = g.value(&p);
            for i in 0..dim * dim {
                num += lie[i] * gm[i];
                den += gm[i] * gm[i];
            }
            lies.push((lie, gm));
        }
        let sigma = num / den;
        let mut worst: f64 = 0.0;
        for (lie, gm) in &lies {
            for i in 0..dim * dim {
                worst = worst.max((lie[i] - sigma * gm[i]).abs());
            }
        }
        Ok(HomothetyData { sigma, validity_residual: worst })
    }
}

/// `(L_W g)_ij = W^k dg_ij/dx^k + g_kj dW^k/dx^i + g_ik dW^k/dx^j`.
fn lie_derivative(g: &RiemannMetric, w: &VectorField, p: &Point) -> Vec<f64> {
    let dim = g.dim();
    let wv = w.value(p);
    let dg_w = g.dg_along(p, &wv);
    let jw = w.jacobian(p);
    let gm = g.value(p);
    let mut lie = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut s = dg_w[i * dim + j];
            for k in 0..dim {
                s += gm[k * dim + j] * jw[k * dim + i] + gm[i * dim + k] * jw[k * dim + j];
            }
            lie[i * dim + j] = s;
        }
    }
    lie
}

/// Construct the navigation geodesic through `(x0, v0)` by flow composition.
/// `v0` is normalized to the indicatrix; the result is a unit-speed
/// geodesic of the Zermelo metric, cross-checkable against
/// [`integrate_geodesic`].
pub fn robles_geodesic(
    z: &ZermeloData,
    hom: &HomothetyData,
    x0: &Point,
    v0: &[f64],
    t_max: f64,
    tol: f64,
    n_samples: usize,
) -> Result<GeodesicPath> {
    if hom.validity_residual >= 1e-8 {
        return Err(Error::invariant(format!(
            "homothety residual {:.3e} too large; flow composition refused",
            hom.validity_residual
        )));
    }
    let sigma = hom.sigma;
    let metric = FinslerMetric::from_data(FinslerData::Zermelo(z.clone()), Provenance::Zermelo);
    let v0 = metric.unit_vector(x0, v0)?;

    // rho'(0) = v0 - W(x0) has unit g-norm exactly when Z(x0, v0) = 1
    let w0 = z.w.value(x0);
    let rho_dot0: Vec<f64> = v0.iter().zip(&w0).map(|(a, b)| a - b).collect();
    let gn = z.g.norm_sq(x0, &rho_dot0).sqrt();
    if (gn - 1.0).abs() > 1e-9 {
        return Err(Error::invariant(format!(
            "navigation identity violated: |v0 - W|_g = {gn}"
        )));
    }

    // unit-speed base geodesic of g, long enough for the reparametrization
    let u_max = if sigma == 0.0 {
        t_max
    } else {
        (2.0 / sigma) * (1.0 - (-sigma * t_max / 2.0).exp())
    };
    if !u_max.is_finite() || u_max <= 0.0 {
        return Err(Error::domain("homothety rescaling exhausts the base geodesic"));
    }
    let base_metric = FinslerMetric::riemannian(z.g.clone());
    let rho = integrate_geodesic(&base_metric, x0, &rho_dot0, u_max, tol)?;

    let n_samples = n_samples.max(32);
    let mut samples = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let t = t_max * k as f64 / (n_samples - 1) as f64;
        let u = if sigma == 0.0 {
            t
        } else {
            (2.0 / sigma) * (1.0 - (-sigma * t / 2.0).exp())
        };
        let (chart_r, x_r, v_r) = rho.curve.eval_at(u);
        let du_dt = (-sigma * t / 2.0).exp();
        // rho(t) = rho_unit(u(t)); rho'(t) = rho_unit'(u) * u'(t)
        let rho_t = Point::new(chart_r, x_r);
        let rho_dot_t: Vec<f64> = v_r.iter().map(|c| c * du_dt).collect();
        // P(t) = flow_W(t, rho(t)); P'(t) = W(P) + Dphi_t . rho'(t)
        let (p_t, jac) = flow_with_jacobian(&z.w, &rho_t, t, tol)?;
        let w_p = z.w.value(&p_t);
        let pushed = crate::num::mat_vec(&jac, &rho_dot_t);
        let v_t: Vec<f64> = w_p.iter().zip(&pushed).map(|(a, b)| a + b).collect();
        samples.push(CurveSample { s: t, chart: p_t.chart, x: p_t.x, v: v_t });
    }
    let curve = SampledCurve::new(samples);

    let mut drift: f64 = 0.0;
    for s in &curve.samples {
        let fv = metric.f(&Point::new(s.chart, s.x.clone()), &s.v)?;
        drift = drift.max((fv - 1.0).abs());
    }
    let length = finsler_length(&metric, &curve)?.value;
    Ok(GeodesicPath {
        curve,
        parametrization: Parametrization::GRescaled { sigma },
        f_drift: drift,
        length,
        handoffs: 0,
    })
}

/// Sup distance between two paths over a common parameter range, compared
/// in the embedding.
pub fn sup_path_distance(
    m: &crate::geometry::ChartManifold,
    a: &GeodesicPath,
    b: &GeodesicPath,
    n_probe: usize,
) -> f64 {
    let (a0, a1) = a.curve.param_range();
    let (b0, b1) = b.curve.param_range();
    let lo = a0.max(b0);
    let hi = a1.min(b1);
    let mut worst: f64 = 0.0;
    for k in 0..n_probe {
        let s = lo + (hi - lo) * k as f64 / (n_probe - 1) as f64;
        let ea = a.curve.embed_at(m, s);
        let eb = b.curve.embed_at(m, s);
        worst = worst.max(crate::num::norm(&crate::num::sub(&ea, &eb)));
    }
    worst
}
