//! Sampled comparability constants `c1 h(v,v) <= F^2(x,v) <= c2 h(v,v)`.
//!
//! The constants exist by compactness; this estimate is a sampled envelope
//! (grid + random draws + local polish of both extrema), padded by a tiny
//! relative margin, then validated against a fresh sample set.

use super::FinslerMetric;
use crate::geometry::RiemannMetric;
use crate::optim::nelder_mead;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ComparabilityEstimate {
    pub c1: f64,
    pub c2: f64,
    pub sample_count: usize,
}

/// Estimate the comparability envelope of `F^2` against the reference
/// Riemannian metric `h` over the unit h-sphere bundle.
pub fn comparability_constants(
    f: &FinslerMetric,
    h: &RiemannMetric,
    n_samples: usize,
    seed: u64,
) -> Result<ComparabilityEstimate> {
    if !std::sync::Arc::ptr_eq(f.manifold(), &h.manifold) {
        return Err(Error::config("F and h must live on the same manifold"));
    }
    let m = f.manifold().clone();
    let dim = m.dim();
    if !m.is_compact() {
        // propagates a configuration error when no bounds were declared
        m.sample_box(0)?;
    }
    let mut rng = crate::sampling::rng(seed);
    let n_samples = n_samples.max(16);

    // ratio F^2/h on the unit h-sphere bundle == F(x, u)^2 for h-unit u
    let ratio = |chart: usize, x: &[f64], dir: &[f64]| -> Result<f64> {
        let p = crate::geometry::Point::new(chart, x.to_vec());
        let hn = h.norm_sq(&p, dir);
        if hn <= 0.0 {
            return Err(Error::invariant("reference metric degenerate"));
        }
        let u: Vec<f64> = dir.iter().map(|c| c / hn.sqrt()).collect();
        let fv = f.f(&p, &u)?;
        Ok(fv * fv)
    };

    let mut lo: Option<(f64, usize, Vec<f64>, Vec<f64>)> = None;
    let mut hi: Option<(f64, usize, Vec<f64>, Vec<f64>)> = None;
    for _ in 0..n_samples {
        let p = m.random_point(&mut rng)?;
        let dir = crate::sampling::random_direction(&mut rng, dim);
        let r = ratio(p.chart, &p.x, &dir)?;
        if lo.as_ref().map(|(b, ..)| r < *b).unwrap_or(true) {
            lo = Some((r, p.chart, p.x.clone(), dir.clone()));
        }
        if hi.as_ref().map(|(b, ..)| r > *b).unwrap_or(true) {
            hi = Some((r, p.chart, p.x, dir));
        }
    }
    let lo = lo.ok_or_else(|| Error::invariant("no samples drawn"))?;
    let hi = hi.ok_or_else(|| Error::invariant("no samples drawn"))?;

    // polish both extrema over (x, dir) jointly
    let polish = |start: &(f64, usize, Vec<f64>, Vec<f64>), sign: f64| -> f64 {
        let chart = start.1;
        let (lo_box, hi_box) = m.sample_box(chart).expect("sample box");
        let mut q0 = start.2.clone();
        q0.extend_from_slice(&start.3);
        let mut obj = |q: &[f64]| -> f64 {
            let x = &q[..dim];
            if x
                .iter()
                .zip(lo_box.iter().zip(&hi_box))
                .any(|(v, (l, h))| *v < *l || *v > *h)
            {
                return f64::INFINITY;
            }
            let dir = &q[dim..];
            if crate::num::norm(dir) < 1e-8 {
                return f64::INFINITY;
            }
            match ratio(chart, x, dir) {
                Ok(r) => sign * r,
                Err(_) => f64::INFINITY,
            }
        };
        let (_, val) = nelder_mead(&mut obj, &q0, 0.1, 400, 1e-14);
        sign * val
    };
    let c1_raw = polish(&lo, 1.0).min(lo.0);
    let c2_raw = polish(&hi, -1.0).max(hi.0);

    // pad by a relative margin; the estimate stays an envelope, not a
    // certified bound
    let pad = 1e-9;
    let c1 = c1_raw * (1.0 - pad);
    let c2 = c2_raw * (1.0 + pad);
    if c1 <= 0.0 {
        return Err(Error::invariant("F^2/h not bounded away from zero on samples"));
    }

    // fresh validation set
    let mut fresh = crate::sampling::rng(seed.wrapping_add(1));
    for _ in 0..n_samples {
        let p = m.random_point(&mut fresh)?;
        let dir = crate::sampling::random_direction(&mut fresh, dim);
        let r = ratio(p.chart, &p.x, &dir)?;
        if r < c1 || r > c2 {
            return Err(Error::invariant(format!(
                "fresh sample violates comparability envelope: ratio {r} outside [{c1}, {c2}]"
            )));
        }
    }
    Ok(ComparabilityEstimate { c1, c2, sample_count: 2 * n_samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ChartManifold, VectorField};
    use approx::assert_relative_eq;

    #[test]
    fn euclidean_against_itself_is_one() {
        let m = ChartManifold::torus(2);
        let h = RiemannMetric::euclidean(m.clone());
        let f = FinslerMetric::riemannian(h.clone());
        let est = comparability_constants(&f, &h, 500, 9).unwrap();
        assert_relative_eq!(est.c1, 1.0, epsilon = 1e-6);
        assert_relative_eq!(est.c2, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn uniform_scaling_gives_quarter() {
        use crate::finsler::{FinslerData, Provenance, StationaryData};
        use crate::geometry::ScalarField;
        let m = ChartManifold::torus(2);
        let h = RiemannMetric::euclidean(m.clone());
        let data = StationaryData::new(
            h.clone(),
            ScalarField::constant(m.clone(), 4.0),
            VectorField::zero(m.clone()),
        )
        .unwrap();
        let f = FinslerMetric::from_data(FinslerData::Fermat(data), Provenance::Fermat);
        let est = comparability_constants(&f, &h, 500, 10).unwrap();
        assert_relative_eq!(est.c1, 0.25, epsilon = 1e-6);
        assert_relative_eq!(est.c2, 0.25, epsilon = 1e-6);
    }

    #[test]
    fn unbounded_plane_is_config_error() {
        let m = ChartManifold::euclidean(2);
        let h = RiemannMetric::euclidean(m.clone());
        let f = FinslerMetric::riemannian(h.clone());
        assert!(matches!(
            comparability_constants(&f, &h, 100, 1),
            Err(Error::Config(_))
        ));
    }
}
