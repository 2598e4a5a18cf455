//! Reversibility of the Fermat metric and the pinched-curvature period
//! bound.
//!
//! The pointwise non-reversibility is `Lambda(p) = |delta|_0 / sqrt(beta)`;
//! its maximum `phi` over the manifold determines the reversibility constant
//! in closed form,
//!
//! `lambda = (phi + sqrt(1 + phi^2)) / (-phi + sqrt(1 + phi^2))
//!         = (phi + sqrt(1 + phi^2))^2`,
//!
//! which is cross-checked here by direct maximization of `F(-v)` over the
//! indicatrix. The period bound `2 pi sqrt(1 + phi^2)/(phi + sqrt(1 + phi^2))`
//! assumes the flag-curvature pinching hypothesis, which this crate does not
//! verify — the caller asserts it.

use super::{FinslerData, FinslerMetric, Provenance, StationaryData};
use crate::geometry::Point;
use crate::optim::nelder_mead;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ReversibilityReport {
    /// `max |delta|_0/sqrt(beta)` over the manifold.
    pub phi: f64,
    /// Closed-form reversibility constant `lambda(phi) >= 1`.
    pub lambda: f64,
    /// Point attaining the maximum.
    pub witness: Point,
    /// Independent cross-check: `max F(-v)` over `{F(v)=1}` near the witness.
    pub numeric_lambda: f64,
    /// Direction attaining the numeric maximum (unit indicatrix vector).
    pub numeric_direction: Vec<f64>,
    /// Coarse grid-gap estimate: largest neighbour jump of Lambda on the
    /// scan grid; the sampled maximum is exact only up to this modulus.
    pub grid_gap: f64,
}

/// `lambda` as a function of `phi`, in the cancellation-free form
/// `(phi + sqrt(1+phi^2))^2`.
pub fn lambda_from_phi(phi: f64) -> f64 {
    let s = (1.0 + phi * phi).sqrt();
    (phi + s) * (phi + s)
}

/// Thm-style lower bound for the period of t-periodic rays under the
/// pinching hypothesis: `2 pi sqrt(1+phi^2) / (phi + sqrt(1+phi^2))`.
pub fn period_lower_bound_from_phi(phi: f64) -> f64 {
    let s = (1.0 + phi * phi).sqrt();
    std::f64::consts::TAU * s / (phi + s)
}

/// Maximize `Lambda = |delta|_0/sqrt(beta)` by dense grid scan plus local
/// polish, then evaluate the closed form and its numeric cross-check.
pub fn reversibility(
    data: &StationaryData,
    grid_res: usize,
    seed: u64,
) -> Result<ReversibilityReport> {
    let m = data.manifold();
    let dim = m.dim();
    let grid_res = grid_res.max(8);

    let lambda_at = |x: &[f64]| -> Result<f64> {
        let p = Point::new(0, x.to_vec());
        // chart is filled in by the caller loop below
        data.lambda_ratio(&p)
    };
    let _ = lambda_at;

    let mut best: Option<(f64, Point)> = None;
    let mut grid_gap: f64 = 0.0;

    for chart in 0..m.n_charts() {
        let (lo, hi) = m.sample_box(chart)?;
        let mut idx = vec![0usize; dim];
        let total: usize = grid_res.pow(dim as u32);
        let mut prev_val: Option<f64> = None;
        for _ in 0..total {
            let x: Vec<f64> = (0..dim)
                .map(|d| lo[d] + (hi[d] - lo[d]) * (idx[d] as f64 + 0.5) / grid_res as f64)
                .collect();
            let p = Point::new(chart, x);
            let val = data.lambda_ratio(&p)?;
            if let Some(pv) = prev_val {
                grid_gap = grid_gap.max((val - pv).abs());
            }
            prev_val = Some(val);
            if best.as_ref().map(|(b, _)| val > *b).unwrap_or(true) {
                best = Some((val, p));
            }
            // odometer increment
            for d in 0..dim {
                idx[d] += 1;
                if idx[d] < grid_res {
                    break;
                }
                idx[d] = 0;
            }
        }
    }
    let (_, grid_witness) = best.ok_or_else(|| Error::invariant("empty scan"))?;

    // local polish of the witness (stay inside the chart box)
    let chart = grid_witness.chart;
    let (lo, hi) = m.sample_box(chart)?;
    let cell = (0..dim)
        .map(|d| (hi[d] - lo[d]) / grid_res as f64)
        .fold(0.0_f64, f64::max);
    let mut obj = |x: &[f64]| -> f64 {
        if x.iter()
            .zip(lo.iter().zip(&hi))
            .any(|(v, (l, h))| *v < *l || *v > *h)
        {
            return f64::INFINITY;
        }
        match data.lambda_ratio(&Point::new(chart, x.to_vec())) {
            Ok(v) => -v,
            Err(_) => f64::INFINITY,
        }
    };
    let (xw, neg_phi) = nelder_mead(&mut obj, &grid_witness.x, cell, 400, 1e-14);
    let phi = -neg_phi;
    let witness = Point::new(chart, xw);
    if !phi.is_finite() {
        return Err(Error::invariant("Lambda unbounded on the scan domain (beta -> 0?)"));
    }

    let lambda = lambda_from_phi(phi);
    let metric = FinslerMetric::from_data(FinslerData::Fermat(data.clone()), Provenance::Fermat);
    let (numeric_lambda, numeric_direction) =
        numeric_lambda_near(&metric, data, &witness, seed)?;

    Ok(ReversibilityReport { phi, lambda, witness, numeric_lambda, numeric_direction, grid_gap })
}

/// Maximize `F(-v)` over the indicatrix at the witness point and its
/// immediate neighbourhood. The indicatrix is parametrized by rescaling
/// Euclidean directions, `v = u/F(x, u)`.
fn numeric_lambda_near(
    metric: &FinslerMetric,
    data: &StationaryData,
    witness: &Point,
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    let dim = metric.dim();
    let mut rng = crate::sampling::rng(seed);
    let mut best = (1.0_f64, vec![0.0; dim]);

    let mut points = vec![witness.clone()];
    for d in 0..dim {
        for sign in [-1.0, 1.0] {
            let mut x = witness.x.clone();
            x[d] += sign * 1e-4;
            if metric.manifold().contains(witness.chart, &x) {
                points.push(Point::new(witness.chart, x));
            }
        }
    }

    for p in &points {
        let mut starts: Vec<Vec<f64>> = Vec::new();
        let delta = data.delta.value(p);
        if crate::num::norm(&delta) > 1e-12 {
            starts.push(crate::num::scale(&delta, -1.0 / crate::num::norm(&delta)));
        }
        for _ in 0..4 {
            starts.push(crate::sampling::random_direction(&mut rng, dim));
        }
        for u0 in starts {
            let mut obj = |u: &[f64]| -> f64 {
                let n = crate::num::norm(u);
                if n < 1e-8 {
                    return f64::INFINITY;
                }
                let dir: Vec<f64> = u.iter().map(|c| c / n).collect();
                let v = match metric.unit_vector(p, &dir) {
                    Ok(v) => v,
                    Err(_) => return f64::INFINITY,
                };
                let neg_v: Vec<f64> = v.iter().map(|c| -c).collect();
                match metric.f(p, &neg_v) {
                    Ok(f) => -f,
                    Err(_) => f64::INFINITY,
                }
            };
            let (u, negf) = nelder_mead(&mut obj, &u0, 0.3, 300, 1e-15);
            let f = -negf;
            if f > best.0 {
                let n = crate::num::norm(&u);
                let dir: Vec<f64> = u.iter().map(|c| c / n).collect();
                best = (f, metric.unit_vector(p, &dir)?);
            }
        }
    }
    Ok(best)
}

/// The period lower bound for t-periodic light rays in the spacetime of
/// `data`, valid when the caller asserts the flag-curvature pinching
/// hypothesis (not verified here).
pub fn period_lower_bound(data: &StationaryData, grid_res: usize, seed: u64) -> Result<f64> {
    let rep = reversibility(data, grid_res, seed)?;
    Ok(period_lower_bound_from_phi(rep.phi))
}
