//! Closed-geodesic search: shooting, phase-space return detection, damped
//! Newton polish of the return map, multiplicity reduction and geometric
//! deduplication.
//!
//! The variational existence machinery is not a practical finder at desk
//! scale; shooting plus return-map polishing yields verifiable output: every
//! reported geodesic re-closes from its polished initial condition when
//! re-integrated at a 10x tighter tolerance.

use super::{integrate_geodesic, GeodesicPath};
use crate::finsler::{FinslerMetric, SampledCurve};
use crate::geometry::{integrate_charted, ChartManifold, ChartedOptions, OdeOptions, Point, StateLayout};
use crate::optim::{golden_min, levenberg_marquardt, LmOptions};
use crate::{Error, Result};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct SearchParams {
    pub n_starts: usize,
    /// Parameter length of each shooting trajectory.
    pub s_max: f64,
    /// Phase-space closure tolerance in chart coordinates.
    pub closure_tol: f64,
    /// Phase distance below which a near-return spawns a candidate.
    pub capture_dist: f64,
    /// Ignore returns earlier than this parameter value.
    pub min_return: f64,
    pub shoot_tol: f64,
    pub polish_tol: f64,
    pub max_polish: usize,
    pub seed: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            n_starts: 200,
            s_max: 20.0,
            closure_tol: 1e-8,
            capture_dist: 0.25,
            min_return: 0.5,
            shoot_tol: 1e-9,
            polish_tol: 1e-12,
            max_polish: 96,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClosedGeodesic {
    pub path: GeodesicPath,
    pub length: f64,
    /// Period in the affine parameter (F = 1 along reported geodesics, so
    /// this equals the length up to quadrature error).
    pub period: f64,
    pub multiplicity_guess: u32,
    pub initial_point: Point,
    pub initial_velocity: Vec<f64>,
    /// Phase-space closure residual of the verification re-integration.
    pub closure_residual: f64,
}

impl ClosedGeodesic {
    /// The m-fold iterate: the same support traversed `m` times.
    pub fn iterate(&self, f: &FinslerMetric, m: u32) -> Result<ClosedGeodesic> {
        let path = integrate_geodesic(
            f,
            &self.initial_point,
            &self.initial_velocity,
            self.period * m as f64,
            1e-11,
        )?;
        Ok(ClosedGeodesic {
            length: path.length,
            period: self.period * m as f64,
            multiplicity_guess: m * self.multiplicity_guess,
            initial_point: self.initial_point.clone(),
            initial_velocity: self.initial_velocity.clone(),
            closure_residual: self.closure_residual,
            path,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Same,
    Iterate,
    Distinct,
}

#[derive(Debug, Clone, Default)]
pub struct SearchStats {
    pub n_starts: usize,
    pub n_candidates: usize,
    pub n_polished: usize,
    pub n_converged: usize,
    pub n_failures: usize,
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub geodesics: Vec<ClosedGeodesic>,
    /// More than half the starts re-closed at a common length: a continuum
    /// of closed geodesics (Zoll-like situation) rather than a finite count.
    pub continuum_suspected: bool,
    pub stats: SearchStats,
}

#[derive(Debug, Clone)]
struct Candidate {
    chart: usize,
    x: Vec<f64>,
    v: Vec<f64>,
    t: f64,
    dist: f64,
    start_idx: usize,
}

/// Combined phase-space embedding of `(x, v)` used for chart-independent
/// return detection.
fn phase_embed(m: &ChartManifold, chart: usize, x: &[f64], v: &[f64]) -> Vec<f64> {
    let mut e = m.embed(chart, x);
    e.extend(m.embed_tangent(chart, x, v));
    e
}

fn phase_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Flow the phase point for parameter `t`; returns the end sample.
fn phase_flow(
    f: &FinslerMetric,
    chart: usize,
    x: &[f64],
    v: &[f64],
    t: f64,
    tol: f64,
) -> Result<(usize, Vec<f64>, Vec<f64>)> {
    let dim = f.dim();
    let mut y0 = x.to_vec();
    y0.extend_from_slice(v);
    let mut rhs = |c: usize, _s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let p = Point::new(c, y[..dim].to_vec());
        let a = super::geodesic_spray(f, &p, &y[dim..])?;
        dy[..dim].copy_from_slice(&y[dim..]);
        dy[dim..].copy_from_slice(&a);
        Ok(())
    };
    let opts = ChartedOptions { ode: OdeOptions::with_tol(tol), max_sample_spacing: f64::INFINITY };
    let tr = integrate_charted(
        f.manifold(),
        StateLayout::PhaseSpace,
        chart,
        y0,
        0.0,
        t,
        &opts,
        &mut rhs,
        None,
    )?;
    let last = tr.samples.last().unwrap();
    Ok((last.chart, last.y[..dim].to_vec(), last.y[dim..].to_vec()))
}

/// Phase-closure residual in the coordinates of the start chart:
/// `[x(T) - x(0), v(T) - v(0)]` after transporting the endpoint back.
fn closure_residual(
    m: &ChartManifold,
    chart0: usize,
    x0: &[f64],
    v0: &[f64],
    end: &(usize, Vec<f64>, Vec<f64>),
) -> Result<Vec<f64>> {
    let dim = m.dim();
    let (xe, ve) = if end.0 == chart0 {
        (end.1.clone(), end.2.clone())
    } else {
        let (xe, jac) = m
            .transition_jacobian(end.0, chart0, &end.1)
            .ok_or_else(|| Error::domain("endpoint not transportable to the start chart"))?;
        let ve = crate::num::mat_vec(&jac, &end.2);
        (xe, ve)
    };
    let mut r = m.displacement(x0, &xe);
    for i in 0..dim {
        r.push(ve[i] - v0[i]);
    }
    Ok(r)
}

fn shoot_one_start(
    f: &FinslerMetric,
    p0: &Point,
    v0: &[f64],
    params: &SearchParams,
    start_idx: usize,
) -> Result<Vec<Candidate>> {
    let m = f.manifold();
    let dim = f.dim();
    let mut y0 = p0.x.clone();
    y0.extend_from_slice(v0);
    let mut rhs = |c: usize, _s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let p = Point::new(c, y[..dim].to_vec());
        let a = super::geodesic_spray(f, &p, &y[dim..])?;
        dy[..dim].copy_from_slice(&y[dim..]);
        dy[dim..].copy_from_slice(&a);
        Ok(())
    };
    let opts = ChartedOptions {
        ode: OdeOptions::with_tol(params.shoot_tol),
        max_sample_spacing: 0.2,
    };
    let tr = integrate_charted(
        m,
        StateLayout::PhaseSpace,
        p0.chart,
        y0,
        0.0,
        params.s_max,
        &opts,
        &mut rhs,
        None,
    )?;

    let e0 = phase_embed(m, p0.chart, &p0.x, v0);
    let dists: Vec<f64> = tr
        .samples
        .iter()
        .map(|s| phase_dist(&phase_embed(m, s.chart, &s.y[..dim], &s.y[dim..]), &e0))
        .collect();

    // curve view for refined interpolation of the phase distance
    let curve = SampledCurve::new(
        tr.samples
            .iter()
            .map(|s| crate::finsler::CurveSample {
                s: s.s,
                chart: s.chart,
                x: s.y[..dim].to_vec(),
                v: s.y[dim..].to_vec(),
            })
            .collect(),
    );

    let mut found: Vec<Candidate> = Vec::new();
    for k in 1..tr.samples.len() - 1 {
        let s_k = tr.samples[k].s;
        if s_k < params.min_return {
            continue;
        }
        if dists[k] <= dists[k - 1] && dists[k] <= dists[k + 1] && dists[k] < params.capture_dist {
            let mut obj = |s: f64| -> f64 {
                let (chart, x, v) = curve.eval_at(s);
                phase_dist(&phase_embed(m, chart, &x, &v), &e0)
            };
            let (s_best, d_best) =
                golden_min(&mut obj, tr.samples[k - 1].s, tr.samples[k + 1].s, 1e-10);
            found.push(Candidate {
                chart: p0.chart,
                x: p0.x.clone(),
                v: v0.to_vec(),
                t: s_best,
                dist: d_best,
                start_idx,
            });
        }
    }
    found.sort_by(|a, b| a.dist.total_cmp(&b.dist));
    found.truncate(2);
    Ok(found)
}

fn polish_candidate(
    f: &FinslerMetric,
    cand: &Candidate,
    params: &SearchParams,
) -> Result<Option<(usize, Vec<f64>, Vec<f64>, f64)>> {
    let m = f.manifold().clone();
    let dim = f.dim();
    let chart = cand.chart;
    let t_floor = 0.25 * params.min_return.max(1e-3);
    let mut residual = |q: &[f64]| -> Result<Vec<f64>> {
        let x = &q[..dim];
        let v = &q[dim..2 * dim];
        let t = q[2 * dim];
        if t < t_floor {
            return Err(Error::domain("period collapsed during polish"));
        }
        if !m.contains(chart, x) {
            return Err(Error::domain("polish left the chart"));
        }
        let end = phase_flow(f, chart, x, v, t, params.polish_tol)?;
        let mut r = closure_residual(&m, chart, x, v, &end)?;
        let p = Point::new(chart, x.to_vec());
        r.push(f.f(&p, v)? - 1.0);
        Ok(r)
    };
    let mut q0 = cand.x.clone();
    q0.extend_from_slice(&cand.v);
    q0.push(cand.t);
    let lm = levenberg_marquardt(
        &mut residual,
        &q0,
        &LmOptions {
            max_iter: 40,
            residual_tol: 0.3 * params.closure_tol,
            fd_step: 1e-7,
            stall_iters: 5,
        },
    )?;
    if !lm.converged {
        return Ok(None);
    }
    let x = lm.x[..dim].to_vec();
    let v = lm.x[dim..2 * dim].to_vec();
    let t = lm.x[2 * dim];
    Ok(Some((chart, x, v, t)))
}

/// Reduce an orbit to its fundamental period: if the flow already closes at
/// `T/k`, divide. Checks divisors up to 12 and keeps dividing.
fn reduce_period(
    f: &FinslerMetric,
    chart: usize,
    x: &[f64],
    v: &[f64],
    t: f64,
    params: &SearchParams,
) -> Result<(f64, u32)> {
    let m = f.manifold();
    let mut t_now = t;
    let mut mult = 1u32;
    'outer: loop {
        for k in 2..=12u32 {
            let tk = t_now / k as f64;
            if tk < 0.5 * params.min_return.max(1e-3) {
                continue;
            }
            let end = phase_flow(f, chart, x, v, tk, params.polish_tol)?;
            if let Ok(r) = closure_residual(m, chart, x, v, &end) {
                if crate::num::norm(&r) < 50.0 * params.closure_tol {
                    t_now = tk;
                    mult *= k;
                    continue 'outer;
                }
            }
        }
        break;
    }
    Ok((t_now, mult))
}

/// Does an already-found geodesic explain this candidate (its start lies on
/// the support with aligned tangent and a commensurable period)?
fn explained_by(f: &FinslerMetric, geo: &ClosedGeodesic, cand: &Candidate) -> bool {
    let m = f.manifold();
    let e = phase_embed(m, cand.chart, &cand.x, &cand.v);
    let mut best = f64::INFINITY;
    for s in &geo.path.curve.samples {
        let d = phase_dist(&phase_embed(m, s.chart, &s.x, &s.v), &e);
        if d < best {
            best = d;
        }
    }
    if best > 0.5 * cand.dist.max(0.05) {
        return false;
    }
    // commensurable period
    for k in 1..=6 {
        if (cand.t - k as f64 * geo.period).abs() < 0.15 * geo.period {
            return true;
        }
    }
    false
}

/// Shoot from seeded quasi-random starts on the unit sphere bundle, detect
/// near-returns, polish them into closed geodesics, deduplicate and report.
pub fn find_closed_geodesics(f: &FinslerMetric, params: &SearchParams) -> Result<SearchReport> {
    let m = f.manifold().clone();
    if !m.is_compact() {
        m.sample_box(0)?; // require declared bounds
    }
    let dim = m.dim();
    let mut rng = crate::sampling::rng(params.seed);
    let mut starts = Vec::with_capacity(params.n_starts);
    for _ in 0..params.n_starts {
        let p = m.random_point(&mut rng)?;
        let v = crate::sampling::f_unit_vector(f, &p, &mut rng)?;
        starts.push((p, v));
    }

    // shooting stage, one independent job per start
    let shot: Vec<Result<Vec<Candidate>>> = crate::sampling::thread_pool().install(|| {
        starts
            .par_iter()
            .enumerate()
            .map(|(i, (p, v))| shoot_one_start(f, p, v, params, i))
            .collect()
    });

    let mut candidates: Vec<Candidate> = Vec::new();
    let mut n_failures = 0usize;
    let mut starts_with_tight_return: Vec<f64> = Vec::new();
    for res in shot {
        match res {
            Ok(cands) => {
                if let Some(best) = cands.first() {
                    if best.dist < 1e-3 {
                        starts_with_tight_return.push(best.t);
                    }
                }
                candidates.extend(cands);
            }
            Err(_) => n_failures += 1,
        }
    }
    let n_candidates = candidates.len();

    // continuum control: most starts re-close at a common parameter value
    let continuum_suspected = if starts_with_tight_return.len() * 2 > params.n_starts {
        let mut ts = starts_with_tight_return.clone();
        ts.sort_by(|a, b| a.total_cmp(b));
        let median = ts[ts.len() / 2];
        let near = ts.iter().filter(|t| (**t - median).abs() < 0.01 * median).count();
        near * 2 > params.n_starts
    } else {
        false
    };

    candidates.sort_by(|a, b| a.dist.total_cmp(&b.dist).then(a.start_idx.cmp(&b.start_idx)));
    let polish_budget = if continuum_suspected { 8 } else { params.max_polish };

    let mut geodesics: Vec<ClosedGeodesic> = Vec::new();
    let mut n_polished = 0usize;
    let mut n_converged = 0usize;

    for cand in &candidates {
        if n_polished >= polish_budget {
            break;
        }
        if geodesics.iter().any(|g| explained_by(f, g, cand)) {
            continue;
        }
        n_polished += 1;
        let polished = match polish_candidate(f, cand, params) {
            Ok(Some(p)) => p,
            Ok(None) => continue,
            Err(_) => continue,
        };
        let (chart, x, v, t) = polished;
        let (t_fund, _mult) = match reduce_period(f, chart, &x, &v, t, params) {
            Ok(r) => r,
            Err(_) => (t, 1),
        };
        // re-polish at the fundamental period when reduced
        let (x, v, t_fund) = if t_fund < t {
            let c2 = Candidate {
                chart,
                x: x.clone(),
                v: v.clone(),
                t: t_fund,
                dist: 0.0,
                start_idx: cand.start_idx,
            };
            match polish_candidate(f, &c2, params) {
                Ok(Some((_, x2, v2, t2))) => (x2, v2, t2),
                _ => (x, v, t_fund),
            }
        } else {
            (x, v, t_fund)
        };

        // verification at 10x tighter tolerance
        let verify_tol = (params.polish_tol / 10.0).max(1e-14);
        let p0 = Point::new(chart, x.clone());
        let end = match phase_flow(f, chart, &x, &v, t_fund, verify_tol) {
            Ok(e) => e,
            Err(_) => continue,
        };
        let resid = match closure_residual(&m, chart, &x, &v, &end) {
            Ok(r) => crate::num::norm(&r),
            Err(_) => continue,
        };
        if resid > params.closure_tol {
            continue;
        }
        n_converged += 1;

        let path = match integrate_geodesic(f, &p0, &v, t_fund, params.polish_tol) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let geo = ClosedGeodesic {
            length: path.length,
            period: t_fund,
            multiplicity_guess: 1,
            initial_point: p0,
            initial_velocity: v,
            closure_residual: resid,
            path,
        };
        // dedupe against previously accepted geodesics
        let mut duplicate = false;
        for other in &geodesics {
            match classify_distinct(&m, &geo, other, params.closure_tol) {
                Classification::Distinct => {}
                Classification::Same | Classification::Iterate => {
                    duplicate = true;
                    break;
                }
            }
        }
        if !duplicate {
            geodesics.push(geo);
        }
    }
    geodesics.sort_by(|a, b| a.length.total_cmp(&b.length));

    Ok(SearchReport {
        geodesics,
        continuum_suspected,
        stats: SearchStats {
            n_starts: params.n_starts,
            n_candidates,
            n_polished,
            n_converged,
            n_failures,
        },
    })
}

/// Distance from an embedded point to a sampled curve, refined by golden
/// search on the Hermite interpolant around the best sample.
fn point_to_curve(m: &ChartManifold, pt: &[f64], curve: &SampledCurve) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    for s in &curve.samples {
        let e = m.embed(s.chart, &s.x);
        let d = phase_dist(&e, pt);
        if d < best.0 {
            best = (d, s.s);
        }
    }
    let (a, b) = curve.param_range();
    let span = (b - a) / (curve.samples.len() as f64 - 1.0);
    let lo = (best.1 - 1.5 * span).max(a);
    let hi = (best.1 + 1.5 * span).min(b);
    let mut obj = |s: f64| -> f64 {
        let (chart, x, _) = curve.eval_at(s);
        phase_dist(&m.embed(chart, &x), pt)
    };
    let (s_ref, d_ref) = golden_min(&mut obj, lo, hi, 1e-12);
    if d_ref < best.0 {
        (d_ref, s_ref)
    } else {
        best
    }
}

fn directed_hausdorff(m: &ChartManifold, from: &SampledCurve, to: &SampledCurve) -> f64 {
    let stride = (from.samples.len() / 96).max(1);
    let mut worst: f64 = 0.0;
    for s in from.samples.iter().step_by(stride) {
        let e = m.embed(s.chart, &s.x);
        worst = worst.max(point_to_curve(m, &e, to).0);
    }
    worst
}

/// Geometric classification of two closed geodesics: same support with the
/// same orientation and length, an iterate (supports coincide, lengths in a
/// small rational ratio), or geometrically distinct. Reversed traversals of
/// one support are distinct closed geodesics for non-reversible metrics.
pub fn classify_distinct(
    m: &ChartManifold,
    a: &ClosedGeodesic,
    b: &ClosedGeodesic,
    closure_tol: f64,
) -> Classification {
    let hd_tol = 10.0 * closure_tol;
    let ca = &a.path.curve;
    let cb = &b.path.curve;
    let hd = directed_hausdorff(m, ca, cb).max(directed_hausdorff(m, cb, ca));
    if hd > hd_tol {
        return Classification::Distinct;
    }
    // supports coincide; compare lengths
    let (la, lb) = (a.length, b.length);
    let len_tol = hd_tol * (1.0 + la.max(lb));
    if (la - lb).abs() < len_tol {
        // same length: orientation decides
        let s0 = &ca.samples[0];
        let ea = m.embed(s0.chart, &s0.x);
        let (_, s_near) = point_to_curve(m, &ea, cb);
        let (chart_b, xb, vb) = cb.eval_at(s_near);
        let ta = m.embed_tangent(s0.chart, &s0.x, &s0.v);
        let tb = m.embed_tangent(chart_b, &xb, &vb);
        let dot = crate::num::dot(&ta, &tb);
        if dot > 0.0 {
            Classification::Same
        } else {
            Classification::Distinct
        }
    } else {
        // rational multiple up to 12
        let (long, short) = if la > lb { (la, lb) } else { (lb, la) };
        for q in 1..=12u32 {
            for p in q..=12u32 {
                if (long / short - p as f64 / q as f64).abs() < 1e-4 {
                    return Classification::Iterate;
                }
            }
        }
        Classification::Distinct
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RiemannMetric;
    use approx::assert_relative_eq;

    fn round_sphere() -> FinslerMetric {
        let m = ChartManifold::sphere(2).unwrap();
        FinslerMetric::riemannian(RiemannMetric::round(m).unwrap())
    }

    #[test]
    fn round_sphere_is_a_continuum_of_great_circles() {
        let f = round_sphere();
        let params = SearchParams {
            n_starts: 40,
            s_max: 14.0,
            seed: 7,
            ..Default::default()
        };
        let rep = find_closed_geodesics(&f, &params).unwrap();
        assert!(rep.continuum_suspected, "stats: {:?}", rep.stats);
        for g in &rep.geodesics {
            assert_relative_eq!(g.length, std::f64::consts::TAU, max_relative = 1e-6);
        }
        assert!(!rep.geodesics.is_empty());
    }

    #[test]
    fn flat_torus_finds_unit_lengths() {
        let m = ChartManifold::torus(2);
        let f = FinslerMetric::riemannian(RiemannMetric::euclidean(m));
        let params = SearchParams {
            n_starts: 80,
            s_max: 6.0,
            min_return: 0.4,
            seed: 3,
            ..Default::default()
        };
        let rep = find_closed_geodesics(&f, &params).unwrap();
        assert!(!rep.geodesics.is_empty(), "stats {:?}", rep.stats);
        let shortest = rep.geodesics[0].length;
        assert_relative_eq!(shortest, 1.0, max_relative = 1e-4);
    }

    #[test]
    fn classification_same_iterate_distinct() {
        let f = round_sphere();
        let m = f.manifold().clone();
        // equator east
        let mk = |v0: [f64; 2], shift: f64| -> ClosedGeodesic {
            let p0 = if shift == 0.0 {
                Point::new(0, vec![1.0, 0.0])
            } else {
                Point::new(0, vec![shift.cos(), shift.sin()])
            };
            let v = if v0[1] > 0.0 {
                [-shift.sin(), shift.cos()]
            } else {
                [shift.sin(), -shift.cos()]
            };
            let path =
                integrate_geodesic(&f, &p0, &v, std::f64::consts::TAU, 1e-11).unwrap();
            ClosedGeodesic {
                length: path.length,
                period: std::f64::consts::TAU,
                multiplicity_guess: 1,
                initial_point: p0,
                initial_velocity: v.to_vec(),
                closure_residual: 0.0,
                path,
            }
        };
        let east = mk([0.0, 1.0], 0.0);
        let east_shifted = mk([0.0, 1.0], 0.37);
        let west = mk([0.0, -1.0], 0.0);
        assert_eq!(classify_distinct(&m, &east, &east_shifted, 1e-8), Classification::Same);
        assert_eq!(classify_distinct(&m, &east, &west, 1e-8), Classification::Distinct);
        let double = east.iterate(&f, 2).unwrap();
        assert_eq!(classify_distinct(&m, &east, &double, 1e-8), Classification::Iterate);
        // symmetry
        assert_eq!(classify_distinct(&m, &west, &east, 1e-8), Classification::Distinct);
        assert_eq!(classify_distinct(&m, &east_shifted, &east, 1e-8), Classification::Same);
    }
}
