//! Conversions between the three presentations of the metric family.
//!
//! Derived coefficients are assembled as expression trees from the input
//! coefficients (no symbolic simplification beyond constant folding), so
//! every conversion output can be serialized back to a metric document.
//! Each conversion validates itself by sampled pointwise equality of the
//! two evaluators.

use super::{FinslerData, FinslerMetric, Provenance, RandersData, StationaryData, ZermeloData};
use crate::expr::{self, Ex};
use crate::geometry::{RiemannMetric, ScalarField, VectorField};
use crate::{Error, Result};

/// Pointwise-equality tolerance for self-validation of conversions.
const CONVERT_CHECK_TOL: f64 = 1e-10;
const CONVERT_CHECK_SAMPLES: usize = 64;

fn qform_expr(g: &[Ex], u: &[Ex], v: &[Ex], dim: usize) -> Ex {
    let mut acc = expr::cst(0.0);
    for i in 0..dim {
        for j in 0..dim {
            acc = expr::add(
                acc,
                expr::mul(g[i * dim + j].clone(), expr::mul(u[i].clone(), v[j].clone())),
            );
        }
    }
    acc
}

fn lower_index(g: &[Ex], u: &[Ex], dim: usize) -> Vec<Ex> {
    (0..dim)
        .map(|i| {
            let mut acc = expr::cst(0.0);
            for j in 0..dim {
                acc = expr::add(acc, expr::mul(g[i * dim + j].clone(), u[j].clone()));
            }
            acc
        })
        .collect()
}

/// The Fermat metric of a standard stationary splitting:
/// `F(x,v) = g0(delta,v)/beta + sqrt(g0(delta,v)^2 + beta g0(v,v))/beta`.
pub fn fermat_from_stationary(data: &StationaryData) -> FinslerMetric {
    FinslerMetric::from_data(FinslerData::Fermat(data.clone()), Provenance::Fermat)
}

/// Express Randers data as Zermelo navigation data:
/// `g = eps (h - h(B,.) (x) h(B,.))`, `W = -B/eps`, `eps = 1 - h(B,B)`.
pub fn randers_to_zermelo(r: &RandersData) -> Result<ZermeloData> {
    let m = r.manifold().clone();
    let dim = m.dim();
    let h = r.h.to_exprs();
    let b = r.b.to_exprs();
    let eps = expr::sub(expr::cst(1.0), qform_expr(&h, &b, &b, dim));
    let hb = lower_index(&h, &b, dim);
    let mut g = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            g.push(expr::mul(
                eps.clone(),
                expr::sub(h[i * dim + j].clone(), expr::mul(hb[i].clone(), hb[j].clone())),
            ));
        }
    }
    let w: Vec<Ex> = b
        .iter()
        .map(|bi| expr::neg(expr::div(bi.clone(), eps.clone())))
        .collect();
    let z = ZermeloData::new(
        RiemannMetric::from_exprs(m.clone(), g)?,
        VectorField::from_exprs(m, w)?,
    )?;
    check_equal(
        &FinslerMetric::from_data(FinslerData::Randers(r.clone()), Provenance::Randers),
        &FinslerMetric::from_data(FinslerData::Zermelo(z.clone()), Provenance::Converted),
        "randers_to_zermelo",
    )?;
    Ok(z)
}

/// Inverse of [`randers_to_zermelo`]:
/// `h = g/alpha + (gW (x) gW)/alpha^2`, `B = -alpha W`, `alpha = 1 - g(W,W)`.
pub fn zermelo_to_randers(z: &ZermeloData) -> Result<RandersData> {
    let m = z.manifold().clone();
    let dim = m.dim();
    let g = z.g.to_exprs();
    let w = z.w.to_exprs();
    let alpha = expr::sub(expr::cst(1.0), qform_expr(&g, &w, &w, dim));
    let gw = lower_index(&g, &w, dim);
    let alpha2 = expr::mul(alpha.clone(), alpha.clone());
    let mut h = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            h.push(expr::add(
                expr::div(g[i * dim + j].clone(), alpha.clone()),
                expr::div(expr::mul(gw[i].clone(), gw[j].clone()), alpha2.clone()),
            ));
        }
    }
    let b: Vec<Ex> = w
        .iter()
        .map(|wi| expr::neg(expr::mul(alpha.clone(), wi.clone())))
        .collect();
    let r = RandersData::new(
        RiemannMetric::from_exprs(m.clone(), h)?,
        VectorField::from_exprs(m, b)?,
    )?;
    check_equal(
        &FinslerMetric::from_data(FinslerData::Zermelo(z.clone()), Provenance::Zermelo),
        &FinslerMetric::from_data(FinslerData::Randers(r.clone()), Provenance::Converted),
        "zermelo_to_randers",
    )?;
    Ok(r)
}

/// The navigation data of a stationary splitting:
/// `W = -delta`, `g = g0 / (beta + |delta|_0^2)`.
pub fn zermelo_from_stationary(data: &StationaryData) -> Result<ZermeloData> {
    let m = data.manifold().clone();
    let dim = m.dim();
    let g0 = data.g0.to_exprs();
    let beta = data.beta.to_expr();
    let delta = data.delta.to_exprs();
    let denom = expr::add(beta, qform_expr(&g0, &delta, &delta, dim));
    let g: Vec<Ex> = g0.iter().map(|e| expr::div(e.clone(), denom.clone())).collect();
    let w: Vec<Ex> = delta.iter().map(|e| expr::neg(e.clone())).collect();
    let z = ZermeloData::new(
        RiemannMetric::from_exprs(m.clone(), g)?,
        VectorField::from_exprs(m, w)?,
    )?;
    check_equal(
        &fermat_from_stationary(data),
        &FinslerMetric::from_data(FinslerData::Zermelo(z.clone()), Provenance::Converted),
        "zermelo_from_stationary",
    )?;
    Ok(z)
}

/// Recover stationary data from navigation data, with a free conformal
/// gauge `phi > 0` (`None` means the constant gauge 1):
/// `delta = -W`, `beta = (1 - g(W,W))/phi`, `g0 = g/phi`.
pub fn stationary_from_zermelo(
    z: &ZermeloData,
    phi_gauge: Option<&ScalarField>,
) -> Result<StationaryData> {
    let m = z.manifold().clone();
    let dim = m.dim();
    let g = z.g.to_exprs();
    let w = z.w.to_exprs();
    let phi = match phi_gauge {
        Some(f) => {
            if !std::sync::Arc::ptr_eq(&f.manifold, &m) {
                return Err(Error::config("gauge field lives on a different manifold"));
            }
            f.to_expr()
        }
        None => expr::cst(1.0),
    };
    let alpha = expr::sub(expr::cst(1.0), qform_expr(&g, &w, &w, dim));
    let beta = expr::div(alpha, phi.clone());
    let g0: Vec<Ex> = g.iter().map(|e| expr::div(e.clone(), phi.clone())).collect();
    let delta: Vec<Ex> = w.iter().map(|e| expr::neg(e.clone())).collect();
    let st = StationaryData::new(
        RiemannMetric::from_exprs(m.clone(), g0)?,
        ScalarField::from_expr(m.clone(), beta)?,
        VectorField::from_exprs(m, delta)?,
    )?;
    check_equal(
        &FinslerMetric::from_data(FinslerData::Zermelo(z.clone()), Provenance::Zermelo),
        &fermat_from_stationary(&st),
        "stationary_from_zermelo",
    )?;
    Ok(st)
}

/// Sampled pointwise equality of two evaluators of the same metric.
pub fn max_relative_discrepancy(
    a: &FinslerMetric,
    b: &FinslerMetric,
    n: usize,
    seed: u64,
) -> Result<f64> {
    let m = a.manifold();
    let dim = m.dim();
    let mut rng = crate::sampling::rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let p = m.random_point(&mut rng)?;
        let v = crate::sampling::random_direction(&mut rng, dim);
        let fa = a.f(&p, &v)?;
        let fb = b.f(&p, &v)?;
        worst = worst.max((fa - fb).abs() / fa.abs().max(1e-300));
    }
    Ok(worst)
}

fn check_equal(a: &FinslerMetric, b: &FinslerMetric, what: &str) -> Result<()> {
    let worst = max_relative_discrepancy(a, b, CONVERT_CHECK_SAMPLES, 0xC0417)?;
    if worst > CONVERT_CHECK_TOL {
        return Err(Error::invariant(format!(
            "{what}: converted evaluator disagrees with source by {worst:.3e} (> {CONVERT_CHECK_TOL:.0e})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ChartManifold, Point};
    use approx::assert_relative_eq;

    fn plane() -> std::sync::Arc<ChartManifold> {
        ChartManifold::euclidean_bounded(2, vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn trivial_randers_gives_trivial_zermelo() {
        let m = plane();
        let r = RandersData::new(RiemannMetric::euclidean(m.clone()), VectorField::zero(m)).unwrap();
        let z = randers_to_zermelo(&r).unwrap();
        let p = Point::new(0, vec![0.2, 0.3]);
        assert_relative_eq!(z.alpha(&p), 1.0, epsilon = 1e-14);
        assert!(z.w.value(&p).iter().all(|&c| c == 0.0));
        let g = z.g.value(&p);
        assert_relative_eq!(g[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(g[3], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn hand_evaluated_randers_to_zermelo() {
        // h Euclidean, B = (1/2, 0): eps = 3/4, W = (-2/3, 0),
        // g11 = (3/4)(1 - 1/4) = 9/16, g22 = 3/4.
        let m = plane();
        let r = RandersData::new(
            RiemannMetric::euclidean(m.clone()),
            VectorField::constant(m, vec![0.5, 0.0]).unwrap(),
        )
        .unwrap();
        let z = randers_to_zermelo(&r).unwrap();
        let p = Point::new(0, vec![0.0, 0.0]);
        let g = z.g.value(&p);
        assert_relative_eq!(g[0], 9.0 / 16.0, epsilon = 1e-14);
        assert_relative_eq!(g[3], 3.0 / 4.0, epsilon = 1e-14);
        assert_relative_eq!(g[1], 0.0, epsilon = 1e-14);
        let w = z.w.value(&p);
        assert_relative_eq!(w[0], -2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(w[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn round_trip_randers_zermelo_randers() {
        let m = plane();
        let r = RandersData::new(
            RiemannMetric::from_exprs(
                m.clone(),
                vec![
                    crate::expr::parse("1 + 0.2*x0^2", 2).unwrap(),
                    crate::expr::parse("0.05*x0*x1", 2).unwrap(),
                    crate::expr::parse("0.05*x0*x1", 2).unwrap(),
                    crate::expr::parse("1.5", 2).unwrap(),
                ],
            )
            .unwrap(),
            VectorField::from_exprs(
                m.clone(),
                vec![
                    crate::expr::parse("0.3*cos(x1)", 2).unwrap(),
                    crate::expr::parse("0.2*sin(x0)", 2).unwrap(),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let z = randers_to_zermelo(&r).unwrap();
        let r2 = zermelo_to_randers(&z).unwrap();
        let mut rng = crate::sampling::rng(99);
        for _ in 0..200 {
            let p = r.manifold().random_point(&mut rng).unwrap();
            let ha = r.h.value(&p);
            let hb = r2.h.value(&p);
            for (a, b) in ha.iter().zip(&hb) {
                assert_relative_eq!(a, b, epsilon = 1e-12, max_relative = 1e-12);
            }
            let ba = r.b.value(&p);
            let bb = r2.b.value(&p);
            for (a, b) in ba.iter().zip(&bb) {
                assert_relative_eq!(a, b, epsilon = 1e-12, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn one_dimensional_stationary_to_zermelo() {
        // g0 = 1, beta = 1, delta = 0.5: g = 0.8, W = -0.5,
        // Z(x, 1) = sqrt(1.25) + 0.5 = golden ratio value.
        let m = ChartManifold::euclidean_bounded(1, vec![-1.0], vec![1.0]).unwrap();
        let st = StationaryData::new(
            RiemannMetric::euclidean(m.clone()),
            ScalarField::constant(m.clone(), 1.0),
            VectorField::constant(m.clone(), vec![0.5]).unwrap(),
        )
        .unwrap();
        let z = zermelo_from_stationary(&st).unwrap();
        let p = Point::new(0, vec![0.0]);
        assert_relative_eq!(z.g.value(&p)[0], 0.8, epsilon = 1e-14);
        assert_relative_eq!(z.w.value(&p)[0], -0.5, epsilon = 1e-14);
        let fz = FinslerMetric::from_data(FinslerData::Zermelo(z), Provenance::Converted);
        assert_relative_eq!(fz.f(&p, &[1.0]).unwrap(), 1.6180339887498949, epsilon = 1e-12);
    }

    #[test]
    fn gauge_independence_of_fermat_metric() {
        let m = plane();
        let z = ZermeloData::new(
            RiemannMetric::euclidean(m.clone()),
            VectorField::constant(m.clone(), vec![0.4, 0.1]).unwrap(),
        )
        .unwrap();
        let st1 = stationary_from_zermelo(&z, None).unwrap();
        let gauge = ScalarField::from_expr(
            m.clone(),
            crate::expr::parse("2 + 0.5*sin(x0)", 2).unwrap(),
        )
        .unwrap();
        let st2 = stationary_from_zermelo(&z, Some(&gauge)).unwrap();
        let f1 = fermat_from_stationary(&st1);
        let f2 = fermat_from_stationary(&st2);
        let worst = max_relative_discrepancy(&f1, &f2, 500, 3).unwrap();
        assert!(worst < 1e-12, "gauge dependence detected: {worst:.3e}");
    }

    #[test]
    fn backward_then_forward_recovers_navigation_data() {
        let m = plane();
        let z = ZermeloData::new(
            RiemannMetric::euclidean(m.clone()),
            VectorField::constant(m.clone(), vec![0.3, -0.2]).unwrap(),
        )
        .unwrap();
        let gauge = ScalarField::constant(m.clone(), 2.5);
        let st = stationary_from_zermelo(&z, Some(&gauge)).unwrap();
        let z2 = zermelo_from_stationary(&st).unwrap();
        let mut rng = crate::sampling::rng(5);
        for _ in 0..100 {
            let p = m.random_point(&mut rng).unwrap();
            let ga = z.g.value(&p);
            let gb = z2.g.value(&p);
            for (a, b) in ga.iter().zip(&gb) {
                assert_relative_eq!(a, b, epsilon = 1e-12, max_relative = 1e-12);
            }
            let wa = z.w.value(&p);
            let wb = z2.w.value(&p);
            for (a, b) in wa.iter().zip(&wb) {
                assert_relative_eq!(a, b, epsilon = 1e-12, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn triad_agrees_pointwise() {
        let m = plane();
        let st = StationaryData::new(
            RiemannMetric::from_exprs(
                m.clone(),
                vec![
                    crate::expr::parse("1 + 0.1*x1^2", 2).unwrap(),
                    crate::expr::parse("0", 2).unwrap(),
                    crate::expr::parse("0", 2).unwrap(),
                    crate::expr::parse("1 + 0.1*x0^2", 2).unwrap(),
                ],
            )
            .unwrap(),
            ScalarField::from_expr(m.clone(), crate::expr::parse("2 + cos(x0)", 2).unwrap())
                .unwrap(),
            VectorField::constant(m.clone(), vec![0.2, -0.3]).unwrap(),
        )
        .unwrap();
        let ff = fermat_from_stationary(&st);
        let z = zermelo_from_stationary(&st).unwrap();
        let r = zermelo_to_randers(&z).unwrap();
        let fz = FinslerMetric::from_data(FinslerData::Zermelo(z), Provenance::Converted);
        let fr = FinslerMetric::from_data(FinslerData::Randers(r), Provenance::Converted);
        assert!(max_relative_discrepancy(&ff, &fz, 1000, 11).unwrap() < 1e-10);
        assert!(max_relative_discrepancy(&ff, &fr, 1000, 12).unwrap() < 1e-10);
        assert!(max_relative_discrepancy(&fz, &fr, 1000, 13).unwrap() < 1e-10);
    }
}
