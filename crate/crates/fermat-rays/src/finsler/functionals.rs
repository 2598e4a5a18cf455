//! Length and energy of sampled curves.
//!
//! Curves are sequences of `(s, chart, x, v)` samples. Integrals use a
//! composite Simpson rule with Hermite-reconstructed midpoints; the error
//! estimate is the Richardson-style difference against the trapezoid rule.
//! Samples duplicated at a chart handoff produce zero-width intervals that
//! are skipped, so quadrature never crosses charts.

use super::FinslerMetric;
use crate::geometry::{ChartManifold, Point};
use crate::num::interp::{hermite_point, MonotoneProfile};
use crate::{Error, Result};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct CurveSample {
    pub s: f64,
    pub chart: usize,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SampledCurve {
    pub samples: Vec<CurveSample>,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
}

impl SampledCurve {
    pub fn new(samples: Vec<CurveSample>) -> Self {
        SampledCurve { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn param_range(&self) -> (f64, f64) {
        (self.samples[0].s, self.samples[self.samples.len() - 1].s)
    }

    pub fn start_point(&self) -> Point {
        Point::new(self.samples[0].chart, self.samples[0].x.clone())
    }

    /// The same support traversed backwards: parameters relabelled to keep
    /// the original range, velocities negated.
    pub fn reversed(&self) -> Self {
        let (a, b) = self.param_range();
        let samples = self
            .samples
            .iter()
            .rev()
            .map(|smp| CurveSample {
                s: a + b - smp.s,
                chart: smp.chart,
                x: smp.x.clone(),
                v: smp.v.iter().map(|c| -c).collect(),
            })
            .collect();
        SampledCurve { samples }
    }

    /// Hermite evaluation at parameter `s`: `(chart, x, v)`.
    pub fn eval_at(&self, s: f64) -> (usize, Vec<f64>, Vec<f64>) {
        let n = self.samples.len();
        debug_assert!(n >= 2);
        let idx = match self
            .samples
            .binary_search_by(|smp| smp.s.total_cmp(&s))
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i.clamp(1, n - 1) - 1,
        };
        // Prefer a non-degenerate interval (handoff duplicates share s).
        let mut i = idx;
        while i + 2 < n && self.samples[i + 1].s <= s && self.samples[i + 1].s > self.samples[i].s {
            i += 1;
        }
        while i + 1 < n && self.samples[i + 1].s == self.samples[i].s && i + 2 < n {
            i += 1;
        }
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let h = b.s - a.s;
        if h == 0.0 {
            return (a.chart, a.x.clone(), a.v.clone());
        }
        let u = ((s - a.s) / h).clamp(0.0, 1.0);
        let (x, v) = hermite_point(&a.x, &a.v, &b.x, &b.v, h, u);
        (a.chart, x, v)
    }

    /// Embedded point at parameter `s`.
    pub fn embed_at(&self, manifold: &ChartManifold, s: f64) -> Vec<f64> {
        let (chart, x, _) = self.eval_at(s);
        manifold.embed(chart, &x)
    }

    /// Reparametrize by a strictly increasing profile `ell(s)` (with
    /// derivative `dell`), emitting `n_out` samples uniform in the new
    /// parameter. Velocities are rescaled by `ds/dell`.
    pub fn reparametrize(&self, profile: &MonotoneProfile, n_out: usize) -> SampledCurve {
        let l0 = profile.val[0];
        let l1 = *profile.val.last().unwrap();
        let mut out = Vec::with_capacity(n_out);
        for k in 0..n_out {
            let ell = l0 + (l1 - l0) * k as f64 / (n_out - 1) as f64;
            let s = profile.invert(ell);
            let (chart, x, v) = self.eval_at(s);
            let rate = profile_derivative(profile, s).max(1e-300);
            let vv: Vec<f64> = v.iter().map(|c| c / rate).collect();
            out.push(CurveSample { s: ell, chart, x, v: vv });
        }
        SampledCurve { samples: out }
    }
}

fn profile_derivative(profile: &MonotoneProfile, s: f64) -> f64 {
    // knot derivatives are exact; Hermite-interpolate between them
    let n = profile.s.len();
    let i = match profile.s.binary_search_by(|a| a.total_cmp(&s)) {
        Ok(i) => return profile.dval[i],
        Err(i) => i.clamp(1, n - 1) - 1,
    };
    let h = profile.s[i + 1] - profile.s[i];
    if h == 0.0 {
        return profile.dval[i];
    }
    let u = (s - profile.s[i]) / h;
    crate::num::interp::hermite_scalar(
        profile.val[i],
        h * profile.dval[i],
        profile.val[i + 1],
        h * profile.dval[i + 1],
        u,
    )
    .1 / h
}

/// Integrand values along a curve with Simpson/trapezoid composite sums.
fn composite<FN: Fn(usize, &[f64], &[f64]) -> Result<f64>>(
    curve: &SampledCurve,
    f: FN,
) -> Result<(f64, f64, Vec<f64>)> {
    if curve.len() < 2 {
        return Err(Error::domain("a curve needs at least 2 samples"));
    }
    let n = curve.len();
    let mut simpson_cum = Vec::with_capacity(n);
    simpson_cum.push(0.0);
    let mut simpson = 0.0;
    let mut err = 0.0;
    let mut f_prev = f(curve.samples[0].chart, &curve.samples[0].x, &curve.samples[0].v)?;
    for i in 0..n - 1 {
        let (a, b) = (&curve.samples[i], &curve.samples[i + 1]);
        let h = b.s - a.s;
        if h == 0.0 {
            // chart handoff duplicate; re-evaluate in the new chart
            f_prev = f(b.chart, &b.x, &b.v)?;
            simpson_cum.push(simpson);
            continue;
        }
        let (xm, vm) = hermite_point(&a.x, &a.v, &b.x, &b.v, h, 0.5);
        let fm = f(a.chart, &xm, &vm)?;
        let fb = f(b.chart, &b.x, &b.v)?;
        let sim = h / 6.0 * (f_prev + 4.0 * fm + fb);
        let tra = h / 2.0 * (f_prev + fb);
        simpson += sim;
        err += (sim - tra).abs() / 15.0;
        simpson_cum.push(simpson);
        f_prev = fb;
    }
    Ok((simpson, err, simpson_cum))
}

/// Finsler length `L = int F(x, x') ds`.
pub fn finsler_length(metric: &FinslerMetric, curve: &SampledCurve) -> Result<QuadratureResult> {
    let (value, error_estimate, _) = composite(curve, |chart, x, v| {
        metric.f(&Point::new(chart, x.to_vec()), v)
    })?;
    Ok(QuadratureResult { value, error_estimate })
}

/// Energy `E = int F^2(x, x') ds`.
pub fn finsler_energy(metric: &FinslerMetric, curve: &SampledCurve) -> Result<QuadratureResult> {
    let (value, error_estimate, _) = composite(curve, |chart, x, v| {
        metric.f2(&Point::new(chart, x.to_vec()), v)
    })?;
    Ok(QuadratureResult { value, error_estimate })
}

/// Cumulative length profile along the curve: one value per sample, plus the
/// exact integrand values as knot derivatives, packaged for inversion.
pub fn cumulative_length(
    metric: &FinslerMetric,
    curve: &SampledCurve,
) -> Result<MonotoneProfile> {
    let (_, _, cum) = composite(curve, |chart, x, v| {
        metric.f(&Point::new(chart, x.to_vec()), v)
    })?;
    let s: Vec<f64> = curve.samples.iter().map(|smp| smp.s).collect();
    let dval: Vec<f64> = curve
        .samples
        .iter()
        .map(|smp| metric.f(&Point::new(smp.chart, smp.x.clone()), &smp.v))
        .collect::<Result<_>>()?;
    Ok(MonotoneProfile::new(s, cum, dval))
}

/// Uniformly sampled curve from a closed-form parametrization.
pub fn curve_from_fn(
    manifold: &Arc<ChartManifold>,
    chart: usize,
    a: f64,
    b: f64,
    n: usize,
    f: impl Fn(f64) -> (Vec<f64>, Vec<f64>),
) -> SampledCurve {
    let samples = (0..n)
        .map(|k| {
            let s = a + (b - a) * k as f64 / (n - 1) as f64;
            let (x, v) = f(s);
            debug_assert!(manifold.contains(chart, &x));
            CurveSample { s, chart, x, v }
        })
        .collect();
    SampledCurve { samples }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::{FinslerData, Provenance, StationaryData};
    use crate::geometry::{ChartManifold, RiemannMetric, ScalarField, VectorField};
    use approx::assert_relative_eq;

    fn euclid_metric() -> FinslerMetric {
        let m = ChartManifold::euclidean_bounded(2, vec![-3.0, -3.0], vec![3.0, 3.0]).unwrap();
        FinslerMetric::riemannian(RiemannMetric::euclidean(m))
    }

    #[test]
    fn unit_segment_has_unit_length_and_energy() {
        let f = euclid_metric();
        let curve = curve_from_fn(f.manifold(), 0, 0.0, 1.0, 33, |s| {
            (vec![s, 0.0], vec![1.0, 0.0])
        });
        let l = finsler_length(&f, &curve).unwrap();
        let e = finsler_energy(&f, &curve).unwrap();
        assert_relative_eq!(l.value, 1.0, epsilon = 1e-12);
        assert_relative_eq!(e.value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unit_circle_on_unit_interval() {
        let f = euclid_metric();
        let tau = std::f64::consts::TAU;
        let curve = curve_from_fn(f.manifold(), 0, 0.0, 1.0, 257, |s| {
            (
                vec![(tau * s).cos(), (tau * s).sin()],
                vec![-tau * (tau * s).sin(), tau * (tau * s).cos()],
            )
        });
        let l = finsler_length(&f, &curve).unwrap();
        let e = finsler_energy(&f, &curve).unwrap();
        assert_relative_eq!(l.value, tau, max_relative = 1e-9);
        assert_relative_eq!(e.value, tau * tau, max_relative = 1e-9);
        assert!(l.error_estimate < 1e-8);
    }

    #[test]
    fn too_few_samples_is_domain_error() {
        let f = euclid_metric();
        let curve = SampledCurve::new(vec![CurveSample {
            s: 0.0,
            chart: 0,
            x: vec![0.0, 0.0],
            v: vec![1.0, 0.0],
        }]);
        assert!(matches!(finsler_length(&f, &curve), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn fermat_length_asymmetry_matches_reversibility() {
        // 1-dim drift: F(1) = phi_+ = 0.5 + sqrt(1.25), F(-1) = -0.5 + sqrt(1.25).
        let m = ChartManifold::euclidean_bounded(1, vec![-2.0], vec![2.0]).unwrap();
        let st = StationaryData::new(
            RiemannMetric::euclidean(m.clone()),
            ScalarField::constant(m.clone(), 1.0),
            VectorField::constant(m.clone(), vec![0.5]).unwrap(),
        )
        .unwrap();
        let f = FinslerMetric::from_data(FinslerData::Fermat(st), Provenance::Fermat);
        let curve = curve_from_fn(f.manifold(), 0, 0.0, 1.0, 9, |s| (vec![s], vec![1.0]));
        let fwd = finsler_length(&f, &curve).unwrap().value;
        let bwd = finsler_length(&f, &curve.reversed()).unwrap().value;
        let expect_fwd = 0.5 + 1.25_f64.sqrt();
        let expect_bwd = -0.5 + 1.25_f64.sqrt();
        assert_relative_eq!(fwd, expect_fwd, epsilon = 1e-12);
        assert_relative_eq!(bwd, expect_bwd, epsilon = 1e-12);
        // ratio equals the reversibility constant lambda
        let lam = (expect_fwd / expect_bwd).abs();
        assert_relative_eq!(fwd / bwd, lam, epsilon = 1e-12);
    }

    #[test]
    fn holder_inequality_on_random_polylines() {
        let f = euclid_metric();
        let mut rng = crate::sampling::rng(21);
        for _ in 0..1000 {
            let n = 8;
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let p = f.manifold().random_point(&mut rng).unwrap();
                    p.x
                })
                .collect();
            let (a, b) = (0.0, 1.0);
            let mut samples = Vec::new();
            for (i, w) in pts.windows(2).enumerate() {
                let s0 = a + (b - a) * i as f64 / (n - 1) as f64;
                let s1 = a + (b - a) * (i + 1) as f64 / (n - 1) as f64;
                let v: Vec<f64> = w[1]
                    .iter()
                    .zip(&w[0])
                    .map(|(q, p)| (q - p) / (s1 - s0))
                    .collect();
                samples.push(CurveSample { s: s0, chart: 0, x: w[0].clone(), v: v.clone() });
                if i == n - 2 {
                    samples.push(CurveSample { s: s1, chart: 0, x: w[1].clone(), v });
                }
            }
            let curve = SampledCurve::new(samples);
            let l = finsler_length(&f, &curve).unwrap().value;
            let e = finsler_energy(&f, &curve).unwrap().value;
            assert!(
                l * l <= e * (b - a) * (1.0 + 1e-12),
                "Hoelder violated: L^2 = {} > E (b-a) = {}",
                l * l,
                e
            );
        }
    }

    #[test]
    fn reparametrization_by_arclength_gives_unit_speed() {
        let f = euclid_metric();
        // quadratic curve, non-uniform speed
        let curve = curve_from_fn(f.manifold(), 0, 0.0, 1.0, 129, |s| {
            (vec![s, s * s], vec![1.0, 2.0 * s])
        });
        let prof = cumulative_length(&f, &curve).unwrap();
        let re = curve.reparametrize(&prof, 101);
        for smp in &re.samples {
            let p = Point::new(smp.chart, smp.x.clone());
            let speed = f.f(&p, &smp.v).unwrap();
            assert_relative_eq!(speed, 1.0, max_relative = 1e-6);
        }
    }
}
