//! Cubic Hermite interpolation and monotone profile inversion.

/// Evaluate the cubic Hermite interpolant on `[0, 1]` with endpoint values
/// `p0, p1` and endpoint derivatives `m0, m1` (already scaled by the
/// interval length). Returns value and derivative with respect to `u`.
pub fn hermite_scalar(p0: f64, m0: f64, p1: f64, m1: f64, u: f64) -> (f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    let v = h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1;
    let dh00 = 6.0 * u2 - 6.0 * u;
    let dh10 = 3.0 * u2 - 4.0 * u + 1.0;
    let dh01 = -dh00;
    let dh11 = 3.0 * u2 - 2.0 * u;
    let dv = dh00 * p0 + dh10 * m0 + dh01 * p1 + dh11 * m1;
    (v, dv)
}

/// Componentwise Hermite interpolation of a curve segment.
/// `x0, x1` are endpoint positions, `v0, v1` endpoint velocities with
/// respect to the curve parameter, `h` the parameter width, `u in [0,1]`.
/// Returns interpolated position and velocity (per unit curve parameter).
pub fn hermite_point(
    x0: &[f64],
    v0: &[f64],
    x1: &[f64],
    v1: &[f64],
    h: f64,
    u: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = x0.len();
    let mut x = vec![0.0; n];
    let mut v = vec![0.0; n];
    for i in 0..n {
        let (p, dp) = hermite_scalar(x0[i], h * v0[i], x1[i], h * v1[i], u);
        x[i] = p;
        v[i] = dp / h;
    }
    (x, v)
}

/// Strictly increasing cumulative profile `val(s)` with known derivative
/// `dval(s) > 0` at the knots; supports evaluation and inversion.
#[derive(Debug, Clone)]
pub struct MonotoneProfile {
    pub s: Vec<f64>,
    pub val: Vec<f64>,
    pub dval: Vec<f64>,
}

impl MonotoneProfile {
    pub fn new(s: Vec<f64>, val: Vec<f64>, dval: Vec<f64>) -> Self {
        debug_assert_eq!(s.len(), val.len());
        debug_assert_eq!(s.len(), dval.len());
        MonotoneProfile { s, val, dval }
    }

    fn segment(&self, s: f64) -> usize {
        match self.s.binary_search_by(|a| a.total_cmp(&s)) {
            Ok(i) => i.min(self.s.len() - 2),
            Err(i) => i.clamp(1, self.s.len() - 1) - 1,
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let i = self.segment(s);
        let h = self.s[i + 1] - self.s[i];
        if h == 0.0 {
            return self.val[i];
        }
        let u = (s - self.s[i]) / h;
        hermite_scalar(self.val[i], h * self.dval[i], self.val[i + 1], h * self.dval[i + 1], u).0
    }

    /// Invert the profile: find `s` with `val(s) = target`.
    /// Newton iteration with a bisection safeguard.
    pub fn invert(&self, target: f64) -> f64 {
        let n = self.s.len();
        if target <= self.val[0] {
            return self.s[0];
        }
        if target >= self.val[n - 1] {
            return self.s[n - 1];
        }
        let i = match self.val.binary_search_by(|a| a.total_cmp(&target)) {
            Ok(i) => return self.s[i],
            Err(i) => i - 1,
        };
        let (mut lo, mut hi) = (self.s[i], self.s[i + 1]);
        let mut s = lo + (hi - lo) * (target - self.val[i]) / (self.val[i + 1] - self.val[i]);
        for _ in 0..60 {
            let f = self.eval(s) - target;
            if f.abs() < 1e-15 * (1.0 + target.abs()) {
                break;
            }
            if f > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let h = self.s[i + 1] - self.s[i];
            let u = (s - self.s[i]) / h;
            let d = hermite_scalar(
                self.val[i],
                h * self.dval[i],
                self.val[i + 1],
                h * self.dval[i + 1],
                u,
            )
            .1 / h;
            let step = if d > 0.0 { f / d } else { 0.0 };
            let cand = s - step;
            s = if cand > lo && cand < hi { cand } else { 0.5 * (lo + hi) };
        }
        s
    }
}
