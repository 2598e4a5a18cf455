//! Finite chart atlases with explicit transition maps.
//!
//! Built-in geometries: Euclidean space (one chart), flat tori (one chart
//! with periodic axes) and the round spheres S^2, S^3 with two stereographic
//! charts each, projected from the two poles of the last embedding axis.
//! The transition between the stereographic charts is the coordinate
//! inversion `y = x/|x|^2`, which is its own inverse.

use crate::num::{HDual, Real};
use crate::{Error, Result};
use rand::Rng;
use std::sync::Arc;

/// Half-width of the coordinate box of each stereographic chart. The two
/// charts overlap in the annulus `1/R < |x| < R`; handing off at 90% of the
/// box keeps iterates well inside the destination chart.
const SPHERE_CHART_HALF_WIDTH: f64 = 2.0;
/// Fraction of the box treated as the chart core; leaving it triggers a
/// transition.
const CORE_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub enum ManifoldKind {
    Euclidean,
    Torus { periods: Vec<f64> },
    Sphere,
}

#[derive(Debug, Clone)]
pub struct ChartManifold {
    name: String,
    dim: usize,
    kind: ManifoldKind,
    /// Per-chart coordinate boxes (lo, hi).
    boxes: Vec<(Vec<f64>, Vec<f64>)>,
    /// Declared sampling bounds for non-compact manifolds.
    bounds: Option<(Vec<f64>, Vec<f64>)>,
}

/// A point as chart index plus chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub chart: usize,
    pub x: Vec<f64>,
}

impl Point {
    pub fn new(chart: usize, x: Vec<f64>) -> Self {
        Point { chart, x }
    }
}

impl ChartManifold {
    pub fn euclidean(dim: usize) -> Arc<Self> {
        assert!(dim >= 1);
        let big = 1e12;
        Arc::new(ChartManifold {
            name: format!("euclidean:{dim}"),
            dim,
            kind: ManifoldKind::Euclidean,
            boxes: vec![(vec![-big; dim], vec![big; dim])],
            bounds: None,
        })
    }

    /// Euclidean space with a declared bounded sampling domain.
    pub fn euclidean_bounded(dim: usize, lo: Vec<f64>, hi: Vec<f64>) -> Result<Arc<Self>> {
        if lo.len() != dim || hi.len() != dim || lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(Error::config("invalid bounds for euclidean manifold"));
        }
        let big = 1e12;
        Ok(Arc::new(ChartManifold {
            name: format!("euclidean:{dim}"),
            dim,
            kind: ManifoldKind::Euclidean,
            boxes: vec![(vec![-big; dim], vec![big; dim])],
            bounds: Some((lo, hi)),
        }))
    }

    pub fn torus(dim: usize) -> Arc<Self> {
        Self::torus_with_periods(vec![1.0; dim])
    }

    pub fn torus_with_periods(periods: Vec<f64>) -> Arc<Self> {
        let dim = periods.len();
        assert!(dim >= 1 && periods.iter().all(|&p| p > 0.0));
        Arc::new(ChartManifold {
            name: format!("torus:{dim}"),
            dim,
            kind: ManifoldKind::Torus { periods: periods.clone() },
            boxes: vec![(vec![0.0; dim], periods)],
            bounds: None,
        })
    }

    /// Round sphere S^dim for dim 2 or 3, two stereographic charts.
    pub fn sphere(dim: usize) -> Result<Arc<Self>> {
        if dim != 2 && dim != 3 {
            return Err(Error::config(format!("sphere:{dim} not supported (only 2 and 3)")));
        }
        let r = SPHERE_CHART_HALF_WIDTH;
        Ok(Arc::new(ChartManifold {
            name: format!("sphere:{dim}"),
            dim,
            kind: ManifoldKind::Sphere,
            boxes: vec![
                (vec![-r; dim], vec![r; dim]),
                (vec![-r; dim], vec![r; dim]),
            ],
            bounds: None,
        }))
    }

    /// Parse a geometry name such as `euclidean:2`, `torus:3`, `sphere:2`.
    pub fn by_name(name: &str) -> Result<Arc<Self>> {
        let (kind, d) = name
            .split_once(':')
            .ok_or_else(|| Error::config(format!("bad geometry name `{name}`")))?;
        let dim: usize = d
            .parse()
            .map_err(|_| Error::config(format!("bad dimension in geometry name `{name}`")))?;
        if dim == 0 {
            return Err(Error::config("dimension must be >= 1"));
        }
        match kind {
            "euclidean" => Ok(Self::euclidean(dim)),
            "torus" => Ok(Self::torus(dim)),
            "sphere" => Self::sphere(dim),
            _ => Err(Error::config(format!("unknown geometry `{name}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ManifoldKind {
        &self.kind
    }

    pub fn n_charts(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self.kind, ManifoldKind::Euclidean)
    }

    /// Sampling domain: the declared bounds (Euclidean) or the chart box.
    pub fn sample_box(&self, chart: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        match (&self.kind, &self.bounds) {
            (ManifoldKind::Euclidean, Some((lo, hi))) => Ok((lo.clone(), hi.clone())),
            (ManifoldKind::Euclidean, None) => Err(Error::config(
                "non-compact manifold without declared bounds; construct with euclidean_bounded",
            )),
            _ => {
                let (lo, hi) = &self.boxes[chart];
                Ok((lo.clone(), hi.clone()))
            }
        }
    }

    pub fn contains(&self, chart: usize, x: &[f64]) -> bool {
        if chart >= self.boxes.len() || x.len() != self.dim {
            return false;
        }
        match &self.kind {
            ManifoldKind::Torus { .. } => true, // wraps
            _ => {
                let (lo, hi) = &self.boxes[chart];
                x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| v > l && v < h)
            }
        }
    }

    /// Whether the point sits inside the shrunken core of its chart.
    pub fn in_core(&self, chart: usize, x: &[f64]) -> bool {
        match &self.kind {
            ManifoldKind::Sphere => {
                let (_, hi) = &self.boxes[chart];
                x.iter().zip(hi).all(|(v, h)| v.abs() < CORE_FRACTION * h)
            }
            _ => true,
        }
    }

    /// Canonicalize coordinates in place (wrap periodic axes).
    pub fn normalize(&self, x: &mut [f64]) {
        if let ManifoldKind::Torus { periods } = &self.kind {
            for (v, p) in x.iter_mut().zip(periods) {
                *v = v.rem_euclid(*p);
            }
        }
    }

    /// Shortest displacement from `a` to `b` in the same chart.
    pub fn displacement(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        match &self.kind {
            ManifoldKind::Torus { periods } => a
                .iter()
                .zip(b)
                .zip(periods)
                .map(|((ai, bi), p)| {
                    let d = (bi - ai).rem_euclid(*p);
                    if d > 0.5 * p {
                        d - p
                    } else {
                        d
                    }
                })
                .collect(),
            _ => b.iter().zip(a).map(|(bi, ai)| bi - ai).collect(),
        }
    }

    /// Transition a point from one chart to another. `None` when the point
    /// is not in the overlap or the manifold has a single chart.
    pub fn transition(&self, from: usize, to: usize, x: &[f64]) -> Option<Vec<f64>> {
        if from == to {
            return Some(x.to_vec());
        }
        match &self.kind {
            ManifoldKind::Sphere => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if r2 == 0.0 {
                    return None; // projection pole of the other chart
                }
                let y: Vec<f64> = x.iter().map(|v| v / r2).collect();
                self.contains(to, &y).then_some(y)
            }
            _ => None,
        }
    }

    /// Transition with the Jacobian of the chart change (row-major), for
    /// transporting velocities.
    pub fn transition_jacobian(
        &self,
        from: usize,
        to: usize,
        x: &[f64],
    ) -> Option<(Vec<f64>, Vec<f64>)> {
        if from == to {
            let mut jac = vec![0.0; self.dim * self.dim];
            for i in 0..self.dim {
                jac[i * self.dim + i] = 1.0;
            }
            return Some((x.to_vec(), jac));
        }
        match &self.kind {
            ManifoldKind::Sphere => {
                let y = self.transition(from, to, x)?;
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let n = self.dim;
                let mut jac = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        let kron = if i == j { r2 } else { 0.0 };
                        jac[i * n + j] = (kron - 2.0 * x[i] * x[j]) / (r2 * r2);
                    }
                }
                Some((y, jac))
            }
            _ => None,
        }
    }

    /// If the point left its chart core, pick the chart whose core contains
    /// it and return the new chart data.
    pub fn handoff(&self, chart: usize, x: &[f64]) -> Option<(usize, Vec<f64>, Vec<f64>)> {
        if self.in_core(chart, x) {
            return None;
        }
        for to in 0..self.n_charts() {
            if to == chart {
                continue;
            }
            if let Some((y, jac)) = self.transition_jacobian(chart, to, x) {
                if self.in_core(to, &y) {
                    return Some((to, y, jac));
                }
            }
        }
        None
    }

    /// Dimension of the ambient space used by [`Self::embed`].
    pub fn embed_dim(&self) -> usize {
        match &self.kind {
            ManifoldKind::Euclidean => self.dim,
            ManifoldKind::Torus { .. } => 2 * self.dim,
            ManifoldKind::Sphere => self.dim + 1,
        }
    }

    /// Chart-independent smooth embedding into Euclidean space, used for
    /// comparing points and curves across charts.
    pub fn embed<T: Real>(&self, chart: usize, x: &[T]) -> Vec<T> {
        match &self.kind {
            ManifoldKind::Euclidean => x.to_vec(),
            ManifoldKind::Torus { periods } => {
                let mut out = Vec::with_capacity(2 * self.dim);
                for (v, p) in x.iter().zip(periods) {
                    let scale = p / std::f64::consts::TAU;
                    let ang = *v * T::from_f64(std::f64::consts::TAU / p);
                    out.push(ang.cos() * T::from_f64(scale));
                    out.push(ang.sin() * T::from_f64(scale));
                }
                out
            }
            ManifoldKind::Sphere => {
                // Inverse stereographic projection onto the unit sphere;
                // chart 1 projects from the opposite pole (flip last axis).
                let mut r2 = T::zero();
                for v in x {
                    r2 = r2 + *v * *v;
                }
                let denom = (T::one() + r2).recip();
                let mut out: Vec<T> =
                    x.iter().map(|v| T::from_f64(2.0) * *v * denom).collect();
                let last = (r2 - T::one()) * denom;
                out.push(if chart == 0 { last } else { -last });
                out
            }
        }
    }

    /// Differential of the embedding applied to a tangent vector.
    pub fn embed_tangent(&self, chart: usize, x: &[f64], v: &[f64]) -> Vec<f64> {
        let xs: Vec<HDual> = x
            .iter()
            .zip(v)
            .map(|(&xi, &vi)| HDual::seeded(xi, vi, 0.0))
            .collect();
        self.embed(chart, &xs).into_iter().map(|h| h.d1).collect()
    }

    /// Embedded point of a [`Point`].
    pub fn embed_point(&self, p: &Point) -> Vec<f64> {
        self.embed(p.chart, &p.x)
    }

    /// Uniform-ish random point: uniform on spheres and tori, uniform in the
    /// declared bounds on Euclidean space.
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Result<Point> {
        match &self.kind {
            ManifoldKind::Euclidean => {
                let (lo, hi) = self.sample_box(0)?;
                let x = lo
                    .iter()
                    .zip(&hi)
                    .map(|(l, h)| rng.gen_range(*l..*h))
                    .collect();
                Ok(Point::new(0, x))
            }
            ManifoldKind::Torus { periods } => {
                let x = periods.iter().map(|p| rng.gen_range(0.0..*p)).collect();
                Ok(Point::new(0, x))
            }
            ManifoldKind::Sphere => {
                // Gaussian direction in the ambient space, normalized.
                let n = self.dim + 1;
                let mut p: Vec<f64>;
                loop {
                    p = (0..n).map(|_| gaussian(rng)).collect();
                    let norm: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > 1e-8 {
                        p.iter_mut().for_each(|v| *v /= norm);
                        break;
                    }
                }
                Ok(self.point_from_embedding(&p))
            }
        }
    }

    /// Sphere only: build the chart point of an embedded unit vector.
    pub fn point_from_embedding(&self, p: &[f64]) -> Point {
        debug_assert!(matches!(self.kind, ManifoldKind::Sphere));
        let z = p[self.dim];
        if z <= 0.0 {
            let x = p[..self.dim].iter().map(|v| v / (1.0 - z)).collect();
            Point::new(0, x)
        } else {
            let x = p[..self.dim].iter().map(|v| v / (1.0 + z)).collect();
            Point::new(1, x)
        }
    }

    /// Atlas self-check: transition composed with its inverse must be the
    /// identity to within `1e-12` on sampled overlap points.
    pub fn validate_atlas<R: Rng>(&self, rng: &mut R, n: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        if self.n_charts() < 2 {
            return Ok(0.0);
        }
        for _ in 0..n {
            let p = self.random_point(rng)?;
            for to in 0..self.n_charts() {
                if to == p.chart {
                    continue;
                }
                if let Some(y) = self.transition(p.chart, to, &p.x) {
                    if let Some(back) = self.transition(to, p.chart, &y) {
                        let err = back
                            .iter()
                            .zip(&p.x)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0_f64, f64::max);
                        worst = worst.max(err);
                    }
                }
            }
        }
        if worst > 1e-12 {
            return Err(Error::invariant(format!(
                "atlas transition round-trip error {worst:.3e} exceeds 1e-12"
            )));
        }
        Ok(worst)
    }
}

/// Standard normal via Box-Muller.
pub(crate) fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u1.ln()).sqrt() * u2.cos()
}
