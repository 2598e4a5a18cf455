//! Smooth scalar fields, vector fields and Riemannian metrics over a chart
//! manifold.
//!
//! Coefficients are either fast built-in forms (Euclidean, round-sphere
//! conformal factor, rotation fields) or expression trees. One formula
//! serves every chart: the built-in coefficients are form-invariant under
//! the stereographic transition `y = x/|x|^2`, and user coefficients on
//! multi-chart manifolds are validated for transition consistency at load
//! time. Derived coefficients produced by the metric conversions are built
//! symbolically from these forms.

use super::manifold::{ChartManifold, Point};
use crate::expr::{self, Ex};
use crate::num::{lift, HDual, Real};
use crate::num::linalg;
use crate::{Error, Result};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub enum ScalarCoeffs {
    Const(f64),
    Expr(Ex),
}

#[derive(Debug, Clone)]
pub enum VectorCoeffs {
    Zero,
    Const(Vec<f64>),
    /// `scale * (-x1, x0, 0, ...)` — the rotation field about the polar axis
    /// of the stereographic charts; on the round sphere this is the Killing
    /// field of the one-parameter rotation group with period 2*pi.
    Rotation { scale: f64 },
    Expr(Vec<Ex>),
}

#[derive(Debug, Clone)]
pub enum MetricCoeffs {
    Euclidean,
    ConstDiag(Vec<f64>),
    /// Round metric of the unit sphere in stereographic coordinates:
    /// `4/(1+|x|^2)^2 * delta_ij`.
    Round,
    /// Row-major `dim x dim` expressions, symmetric.
    Expr(Vec<Ex>),
}

#[derive(Debug, Clone)]
pub struct ScalarField {
    pub manifold: Arc<ChartManifold>,
    pub coeffs: ScalarCoeffs,
}

#[derive(Debug, Clone)]
pub struct VectorField {
    pub manifold: Arc<ChartManifold>,
    pub coeffs: VectorCoeffs,
}

#[derive(Debug, Clone)]
pub struct RiemannMetric {
    pub manifold: Arc<ChartManifold>,
    pub coeffs: MetricCoeffs,
}

fn check_expr_dim(e: &Ex, dim: usize) -> Result<()> {
    if let Some(m) = e.max_coord() {
        if m >= dim {
            return Err(Error::config(format!(
                "expression `{e}` references coordinate x{m} on a {dim}-dimensional chart"
            )));
        }
    }
    Ok(())
}

impl ScalarField {
    pub fn constant(manifold: Arc<ChartManifold>, c: f64) -> Self {
        ScalarField { manifold, coeffs: ScalarCoeffs::Const(c) }
    }

    pub fn from_expr(manifold: Arc<ChartManifold>, e: Ex) -> Result<Self> {
        check_expr_dim(&e, manifold.dim())?;
        Ok(ScalarField { manifold, coeffs: ScalarCoeffs::Expr(e) })
    }

    pub fn eval<T: Real>(&self, x: &[T]) -> T {
        match &self.coeffs {
            ScalarCoeffs::Const(c) => T::from_f64(*c),
            ScalarCoeffs::Expr(e) => e.eval(x),
        }
    }

    pub fn value(&self, p: &Point) -> f64 {
        self.eval(&p.x)
    }

    pub fn to_expr(&self) -> Ex {
        match &self.coeffs {
            ScalarCoeffs::Const(c) => expr::cst(*c),
            ScalarCoeffs::Expr(e) => e.clone(),
        }
    }
}

impl VectorField {
    pub fn zero(manifold: Arc<ChartManifold>) -> Self {
        VectorField { manifold, coeffs: VectorCoeffs::Zero }
    }

    pub fn constant(manifold: Arc<ChartManifold>, v: Vec<f64>) -> Result<Self> {
        if v.len() != manifold.dim() {
            return Err(Error::config("constant vector dimension mismatch"));
        }
        Ok(VectorField { manifold, coeffs: VectorCoeffs::Const(v) })
    }

    pub fn rotation(manifold: Arc<ChartManifold>, scale: f64) -> Result<Self> {
        if manifold.dim() < 2 {
            return Err(Error::config("rotation field needs dimension >= 2"));
        }
        Ok(VectorField { manifold, coeffs: VectorCoeffs::Rotation { scale } })
    }

    pub fn from_exprs(manifold: Arc<ChartManifold>, comps: Vec<Ex>) -> Result<Self> {
        if comps.len() != manifold.dim() {
            return Err(Error::config("vector field component count mismatch"));
        }
        for e in &comps {
            check_expr_dim(e, manifold.dim())?;
        }
        Ok(VectorField { manifold, coeffs: VectorCoeffs::Expr(comps) })
    }

    pub fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        let dim = self.manifold.dim();
        match &self.coeffs {
            VectorCoeffs::Zero => vec![T::zero(); dim],
            VectorCoeffs::Const(v) => lift(v),
            VectorCoeffs::Rotation { scale } => {
                let s = T::from_f64(*scale);
                let mut out = vec![T::zero(); dim];
                out[0] = -x[1] * s;
                out[1] = x[0] * s;
                out
            }
            VectorCoeffs::Expr(comps) => comps.iter().map(|e| e.eval(x)).collect(),
        }
    }

    pub fn value(&self, p: &Point) -> Vec<f64> {
        self.eval(&p.x)
    }

    /// Jacobian `dW^i/dx^j` (row-major) at a point.
    pub fn jacobian(&self, p: &Point) -> Vec<f64> {
        let dim = self.manifold.dim();
        let mut jac = vec![0.0; dim * dim];
        for j in 0..dim {
            let xs: Vec<HDual> = p
                .x
                .iter()
                .enumerate()
                .map(|(k, &v)| HDual::seeded(v, if k == j { 1.0 } else { 0.0 }, 0.0))
                .collect();
            let w = self.eval(&xs);
            for i in 0..dim {
                jac[i * dim + j] = w[i].d1;
            }
        }
        jac
    }

    pub fn to_exprs(&self) -> Vec<Ex> {
        let dim = self.manifold.dim();
        match &self.coeffs {
            VectorCoeffs::Zero => vec![expr::cst(0.0); dim],
            VectorCoeffs::Const(v) => v.iter().map(|&c| expr::cst(c)).collect(),
            VectorCoeffs::Rotation { scale } => {
                let mut out = vec![expr::cst(0.0); dim];
                out[0] = expr::mul(expr::cst(-scale), expr::coord(1));
                out[1] = expr::mul(expr::cst(*scale), expr::coord(0));
                out
            }
            VectorCoeffs::Expr(comps) => comps.clone(),
        }
    }
}

impl RiemannMetric {
    pub fn euclidean(manifold: Arc<ChartManifold>) -> Self {
        RiemannMetric { manifold, coeffs: MetricCoeffs::Euclidean }
    }

    pub fn const_diag(manifold: Arc<ChartManifold>, diag: Vec<f64>) -> Result<Self> {
        if diag.len() != manifold.dim() {
            return Err(Error::config("diagonal metric dimension mismatch"));
        }
        if diag.iter().any(|&d| d <= 0.0) {
            return Err(Error::invariant("diagonal metric must be positive"));
        }
        Ok(RiemannMetric { manifold, coeffs: MetricCoeffs::ConstDiag(diag) })
    }

    /// Round metric of the unit sphere; requires a sphere atlas.
    pub fn round(manifold: Arc<ChartManifold>) -> Result<Self> {
        if manifold.n_charts() != 2 {
            return Err(Error::config("round metric requires a sphere atlas"));
        }
        Ok(RiemannMetric { manifold, coeffs: MetricCoeffs::Round })
    }

    pub fn from_exprs(manifold: Arc<ChartManifold>, entries: Vec<Ex>) -> Result<Self> {
        let dim = manifold.dim();
        if entries.len() != dim * dim {
            return Err(Error::config("metric coefficient matrix has wrong shape"));
        }
        for e in &entries {
            check_expr_dim(e, dim)?;
        }
        Ok(RiemannMetric { manifold, coeffs: MetricCoeffs::Expr(entries) })
    }

    pub fn dim(&self) -> usize {
        self.manifold.dim()
    }

    /// Metric coefficients at chart coordinates, row-major `dim x dim`.
    pub fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        let dim = self.manifold.dim();
        match &self.coeffs {
            MetricCoeffs::Euclidean => {
                let mut g = vec![T::zero(); dim * dim];
                for i in 0..dim {
                    g[i * dim + i] = T::one();
                }
                g
            }
            MetricCoeffs::ConstDiag(d) => {
                let mut g = vec![T::zero(); dim * dim];
                for i in 0..dim {
                    g[i * dim + i] = T::from_f64(d[i]);
                }
                g
            }
            MetricCoeffs::Round => {
                let mut r2 = T::zero();
                for v in x {
                    r2 = r2 + *v * *v;
                }
                let one = T::one();
                let c = T::from_f64(4.0) / ((one + r2) * (one + r2));
                let mut g = vec![T::zero(); dim * dim];
                for i in 0..dim {
                    g[i * dim + i] = c;
                }
                g
            }
            MetricCoeffs::Expr(entries) => entries.iter().map(|e| e.eval(x)).collect(),
        }
    }

    pub fn value(&self, p: &Point) -> Vec<f64> {
        self.eval(&p.x)
    }

    pub fn inner(&self, p: &Point, u: &[f64], v: &[f64]) -> f64 {
        crate::num::qform(&self.value(p), u, v)
    }

    pub fn norm_sq(&self, p: &Point, u: &[f64]) -> f64 {
        self.inner(p, u, u)
    }

    /// Inverse metric coefficients at a point.
    pub fn inverse_at(&self, p: &Point) -> Result<Vec<f64>> {
        let g = self.value(p);
        linalg::invert_spd(self.dim(), &g)
            .ok_or_else(|| Error::invariant("metric not positive definite"))
    }

    /// Partial derivatives `dg_ij/dx^k`, indexed `[k][i][j]` flattened.
    pub fn dg(&self, p: &Point) -> Vec<f64> {
        let dim = self.dim();
        let mut out = vec![0.0; dim * dim * dim];
        for k in 0..dim {
            let xs: Vec<HDual> = p
                .x
                .iter()
                .enumerate()
                .map(|(i, &v)| HDual::seeded(v, if i == k { 1.0 } else { 0.0 }, 0.0))
                .collect();
            let g = self.eval(&xs);
            for i in 0..dim {
                for j in 0..dim {
                    out[(k * dim + i) * dim + j] = g[i * dim + j].d1;
                }
            }
        }
        out
    }

    /// Directional derivative of the coefficients along `w`: `w^k dg_ij/dx^k`.
    pub fn dg_along(&self, p: &Point, w: &[f64]) -> Vec<f64> {
        let xs: Vec<HDual> = p
            .x
            .iter()
            .zip(w)
            .map(|(&v, &wi)| HDual::seeded(v, wi, 0.0))
            .collect();
        self.eval(&xs).into_iter().map(|h| h.d1).collect()
    }

    /// Christoffel symbols of the second kind, `Gamma^k_ij` indexed
    /// `[k][i][j]` flattened. Errors when the point is outside the atlas or
    /// the metric fails to be positive definite there.
    pub fn christoffel(&self, p: &Point) -> Result<Vec<f64>> {
        let dim = self.dim();
        if !self.manifold.contains(p.chart, &p.x) {
            return Err(Error::domain(format!(
                "point {:?} (chart {}) outside the atlas of {}",
                p.x,
                p.chart,
                self.manifold.name()
            )));
        }
        let g = self.value(p);
        let l = linalg::cholesky(dim, &g)
            .ok_or_else(|| Error::invariant("metric not positive definite"))?;
        let dg = self.dg(p);
        let d = |k: usize, i: usize, j: usize| dg[(k * dim + i) * dim + j];
        let mut gam = vec![0.0; dim * dim * dim];
        let mut rhs = vec![0.0; dim];
        for i in 0..dim {
            for j in i..dim {
                for (ll, r) in rhs.iter_mut().enumerate() {
                    *r = 0.5 * (d(i, j, ll) + d(j, i, ll) - d(ll, i, j));
                }
                let col = linalg::cholesky_solve(dim, &l, &rhs);
                for k in 0..dim {
                    gam[(k * dim + i) * dim + j] = col[k];
                    gam[(k * dim + j) * dim + i] = col[k];
                }
            }
        }
        Ok(gam)
    }

    pub fn to_exprs(&self) -> Vec<Ex> {
        let dim = self.dim();
        match &self.coeffs {
            MetricCoeffs::Euclidean => {
                let mut out = vec![expr::cst(0.0); dim * dim];
                for i in 0..dim {
                    out[i * dim + i] = expr::cst(1.0);
                }
                out
            }
            MetricCoeffs::ConstDiag(d) => {
                let mut out = vec![expr::cst(0.0); dim * dim];
                for i in 0..dim {
                    out[i * dim + i] = expr::cst(d[i]);
                }
                out
            }
            MetricCoeffs::Round => {
                let mut r2 = expr::cst(0.0);
                for i in 0..dim {
                    r2 = expr::add(r2, expr::powi(expr::coord(i), 2));
                }
                let c = expr::div(expr::cst(4.0), expr::powi(expr::add(expr::cst(1.0), r2), 2));
                let mut out = vec![expr::cst(0.0); dim * dim];
                for i in 0..dim {
                    out[i * dim + i] = c.clone();
                }
                out
            }
            MetricCoeffs::Expr(entries) => entries.clone(),
        }
    }

    /// Sampled structural validation: symmetry to 1e-14 and positive
    /// definiteness at each sample point.
    pub fn validate<R: rand::Rng>(&self, rng: &mut R, n: usize) -> Result<()> {
        let dim = self.dim();
        for _ in 0..n {
            let p = self.manifold.random_point(rng)?;
            let g = self.value(&p);
            for i in 0..dim {
                for j in 0..dim {
                    let scale = 1.0_f64.max(g[i * dim + i].abs()).max(g[j * dim + j].abs());
                    if (g[i * dim + j] - g[j * dim + i]).abs() > 1e-14 * scale {
                        return Err(Error::invariant(format!(
                            "metric not symmetric at {:?}: |g{i}{j} - g{j}{i}| = {:.3e}",
                            p.x,
                            (g[i * dim + j] - g[j * dim + i]).abs()
                        )));
                    }
                }
            }
            if linalg::cholesky(dim, &g).is_none() {
                return Err(Error::invariant(format!(
                    "metric not positive definite at {:?} (chart {})",
                    p.x, p.chart
                )));
            }
        }
        Ok(())
    }
}

/// Transition-consistency checks for fields defined by one formula on a
/// multi-chart atlas: evaluations in overlapping charts must agree after
/// transport. Returns the worst mismatch.
pub(crate) fn scalar_transition_mismatch<R: rand::Rng>(
    f: &ScalarField,
    rng: &mut R,
    n: usize,
) -> Result<f64> {
    let m = &f.manifold;
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let p = m.random_point(rng)?;
        for to in 0..m.n_charts() {
            if to == p.chart {
                continue;
            }
            if let Some(y) = m.transition(p.chart, to, &p.x) {
                worst = worst.max((f.eval(&p.x) - f.eval(&y)).abs());
            }
        }
    }
    Ok(worst)
}

pub(crate) fn vector_transition_mismatch<R: rand::Rng>(
    f: &VectorField,
    rng: &mut R,
    n: usize,
) -> Result<f64> {
    let m = &f.manifold;
    let dim = m.dim();
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let p = m.random_point(rng)?;
        for to in 0..m.n_charts() {
            if to == p.chart {
                continue;
            }
            if let Some((y, jac)) = m.transition_jacobian(p.chart, to, &p.x) {
                let v0 = f.eval(&p.x);
                let pushed = crate::num::mat_vec(&jac, &v0);
                let v1 = f.eval(&y);
                for i in 0..dim {
                    worst = worst.max((pushed[i] - v1[i]).abs());
                }
            }
        }
    }
    Ok(worst)
}

pub(crate) fn metric_transition_mismatch<R: rand::Rng>(
    g: &RiemannMetric,
    rng: &mut R,
    n: usize,
) -> Result<f64> {
    let m = &g.manifold;
    let dim = m.dim();
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let p = m.random_point(rng)?;
        for to in 0..m.n_charts() {
            if to == p.chart {
                continue;
            }
            if let Some((y, jac)) = m.transition_jacobian(p.chart, to, &p.x) {
                // g_from = J^T g_to(y) J
                let gto = g.eval(&y);
                let gfrom = g.eval(&p.x);
                for i in 0..dim {
                    for j in 0..dim {
                        let mut pulled = 0.0;
                        for a in 0..dim {
                            for b in 0..dim {
                                pulled += jac[a * dim + i] * gto[a * dim + b] * jac[b * dim + j];
                            }
                        }
                        worst = worst.max((pulled - gfrom[i * dim + j]).abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn euclidean_christoffel_vanishes() {
        let m = ChartManifold::euclidean(2);
        let g = RiemannMetric::euclidean(m);
        let p = Point::new(0, vec![0.3, -1.7]);
        let gam = g.christoffel(&p).unwrap();
        assert!(gam.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn colatitude_longitude_sphere_christoffel() {
        // Round S^2 in (theta, phi) coordinates: g = diag(1, sin^2 theta).
        // Gamma^theta_{phi phi} = -sin(theta) cos(theta) = -0.5 at theta=pi/4.
        let m = ChartManifold::euclidean_bounded(2, vec![0.1, 0.0], vec![3.0, 6.28]).unwrap();
        let entries = vec![
            parse("1", 2).unwrap(),
            parse("0", 2).unwrap(),
            parse("0", 2).unwrap(),
            parse("sin(x0)^2", 2).unwrap(),
        ];
        let g = RiemannMetric::from_exprs(m, entries).unwrap();
        let p = Point::new(0, vec![std::f64::consts::FRAC_PI_4, 1.0]);
        let gam = g.christoffel(&p).unwrap();
        let dim = 2;
        let idx = |k: usize, i: usize, j: usize| (k * dim + i) * dim + j;
        assert_relative_eq!(gam[idx(0, 1, 1)], -0.5, epsilon = 1e-12);
        // Gamma^phi_{theta phi} = cot(theta) = 1 at pi/4.
        assert_relative_eq!(gam[idx(1, 0, 1)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(gam[idx(1, 1, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn christoffel_outside_atlas_is_domain_error() {
        let m = ChartManifold::sphere(2).unwrap();
        let g = RiemannMetric::round(m).unwrap();
        let p = Point::new(0, vec![5.0, 0.0]);
        assert!(matches!(g.christoffel(&p), Err(Error::Domain(_))));
    }

    /// Central finite differences as the independent derivative oracle.
    fn fd_christoffel(g: &RiemannMetric, p: &Point) -> Vec<f64> {
        let dim = g.dim();
        let h = 1e-5;
        let mut dg = vec![0.0; dim * dim * dim];
        for k in 0..dim {
            let mut xp = p.x.clone();
            xp[k] += h;
            let mut xm = p.x.clone();
            xm[k] -= h;
            let gp = g.eval::<f64>(&xp);
            let gm = g.eval::<f64>(&xm);
            for i in 0..dim * dim {
                dg[k * dim * dim + i] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let ginv = g.inverse_at(p).unwrap();
        let d = |k: usize, i: usize, j: usize| dg[(k * dim + i) * dim + j];
        let mut gam = vec![0.0; dim * dim * dim];
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    let mut s = 0.0;
                    for l in 0..dim {
                        s += 0.5 * ginv[k * dim + l] * (d(i, j, l) + d(j, i, l) - d(l, i, j));
                    }
                    gam[(k * dim + i) * dim + j] = s;
                }
            }
        }
        gam
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let sphere = ChartManifold::sphere(2).unwrap();
        let round = RiemannMetric::round(sphere.clone()).unwrap();
        let plane = ChartManifold::euclidean_bounded(2, vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let curvy = RiemannMetric::from_exprs(
            plane.clone(),
            vec![
                parse("1 + 0.3*sin(x0)*cos(x1)", 2).unwrap(),
                parse("0.1*x0*x1", 2).unwrap(),
                parse("0.1*x0*x1", 2).unwrap(),
                parse("2 + 0.2*exp(-x0^2)", 2).unwrap(),
            ],
        )
        .unwrap();
        for metric in [&round, &curvy] {
            for _ in 0..100 {
                let p = metric.manifold.random_point(&mut rng).unwrap();
                let a = metric.christoffel(&p).unwrap();
                let b = fd_christoffel(metric, &p);
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() < 1e-6, "{x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn round_metric_consistent_across_charts() {
        let sphere = ChartManifold::sphere(2).unwrap();
        let g = RiemannMetric::round(sphere.clone()).unwrap();
        let v = VectorField::rotation(sphere.clone(), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(metric_transition_mismatch(&g, &mut rng, 100).unwrap() < 1e-10);
        assert!(vector_transition_mismatch(&v, &mut rng, 100).unwrap() < 1e-10);
    }

    #[test]
    fn rotation_field_norm_peaks_at_equator() {
        let sphere = ChartManifold::sphere(2).unwrap();
        let g = RiemannMetric::round(sphere.clone()).unwrap();
        let v = VectorField::rotation(sphere.clone(), 1.0).unwrap();
        // |V|_g = 2 rho / (1 + rho^2), equal to 1 exactly on the equator rho=1.
        let pe = Point::new(0, vec![1.0, 0.0]);
        assert_relative_eq!(g.norm_sq(&pe, &v.value(&pe)), 1.0, epsilon = 1e-14);
        let pm = Point::new(0, vec![0.5, 0.0]);
        let want = (2.0 * 0.5 / 1.25_f64).powi(2);
        assert_relative_eq!(g.norm_sq(&pm, &v.value(&pm)), want, epsilon = 1e-14);
    }
}
