//! L-duality: the co-metric of Randers type and the Legendre transform.
//!
//! The co-metric `H(x, xi) = sqrt(g*(xi, xi)) + xi(W)` on covectors is the
//! Legendre dual of the Zermelo metric built from the same `(g, W)`; the
//! numerical content of that statement is `H(x, L(v)) = 1` whenever
//! `F(x, v) = 1`, where `L(v) = 1/2 d_v(F^2)` is the Legendre image.

use super::{FinslerData, FinslerMetric, Provenance, ZermeloData};
use crate::geometry::Point;
use crate::num::qform;
use crate::{Error, Result};

/// Evaluate the co-Randers metric `H(x, xi) = sqrt(g*(xi,xi)) + xi(W)` with
/// `g*` the inverse metric of `z.g` at the point.
pub fn co_randers_eval(z: &ZermeloData, p: &Point, xi: &[f64]) -> Result<f64> {
    let dim = z.manifold().dim();
    if xi.len() != dim {
        return Err(Error::domain("covector dimension mismatch"));
    }
    let g_star = z.g.inverse_at(p)?;
    let q = qform(&g_star, xi, xi);
    let w = z.w.value(p);
    Ok(q.sqrt() + crate::num::dot(xi, &w))
}

/// `|H(x, L(v/F(v))) - 1|` — the deviation of the Legendre image of an
/// F-unit vector from the co-metric's unit sphere. Errors at `v = 0`.
pub fn legendre_check(z: &ZermeloData, p: &Point, v: &[f64]) -> Result<f64> {
    if v.iter().all(|&c| c == 0.0) {
        return Err(Error::domain("Legendre transform undefined at v = 0"));
    }
    let f = FinslerMetric::from_data(FinslerData::Zermelo(z.clone()), Provenance::Zermelo);
    let unit = f.unit_vector(p, v)?;
    let xi = f.legendre_image(p, &unit)?;
    Ok((co_randers_eval(z, p, &xi)? - 1.0).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ChartManifold, RiemannMetric, VectorField};

    #[test]
    fn riemannian_legendre_is_exact() {
        let m = ChartManifold::torus(2);
        let z = ZermeloData::new(RiemannMetric::euclidean(m.clone()), VectorField::zero(m))
            .unwrap();
        let p = Point::new(0, vec![0.3, 0.4]);
        for v in [[1.0, 0.0], [0.6, -0.8], [2.0, 5.0]] {
            assert!(legendre_check(&z, &p, &v).unwrap() < 1e-14);
        }
    }

    #[test]
    fn constant_wind_legendre_within_tolerance() {
        let m = ChartManifold::euclidean_bounded(2, vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let z = ZermeloData::new(
            RiemannMetric::euclidean(m.clone()),
            VectorField::constant(m.clone(), vec![0.4, 0.0]).unwrap(),
        )
        .unwrap();
        let mut rng = crate::sampling::rng(17);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let p = m.random_point(&mut rng).unwrap();
            let v = crate::sampling::random_direction(&mut rng, 2);
            worst = worst.max(legendre_check(&z, &p, &v).unwrap());
        }
        assert!(worst < 1e-8, "worst Legendre deviation {worst:.3e}");
    }

    #[test]
    fn zero_vector_is_domain_error() {
        let m = ChartManifold::torus(2);
        let z = ZermeloData::new(RiemannMetric::euclidean(m.clone()), VectorField::zero(m))
            .unwrap();
        let p = Point::new(0, vec![0.0, 0.0]);
        assert!(matches!(
            legendre_check(&z, &p, &[0.0, 0.0]),
            Err(Error::Domain(_))
        ));
    }
}
