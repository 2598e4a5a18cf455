//! Embedded Dormand-Prince 5(4) stepper with PI-free step control.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-10, h_max: 0.25, max_steps: 2_000_000 }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions { rtol: tol, atol: tol, ..Default::default() }
    }
}

/// One accepted step: endpoint data sufficient for cubic Hermite dense
/// output on `[s0, s1]`.
#[derive(Debug, Clone)]
pub struct AcceptedStep {
    pub s0: f64,
    pub s1: f64,
    pub y1: Vec<f64>,
    pub f1: Vec<f64>,
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Adaptive integrator state. The right-hand side is supplied per call so
/// that the surrounding chart logic can swap it on transitions.
pub struct DpStepper {
    pub s: f64,
    pub y: Vec<f64>,
    pub f: Vec<f64>, // RHS at (s, y), maintained for FSAL
    h: f64,
    opts: OdeOptions,
    steps_taken: usize,
}

impl DpStepper {
    pub fn new(
        s0: f64,
        y0: Vec<f64>,
        opts: OdeOptions,
        rhs: &mut dyn FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    ) -> Result<Self> {
        let mut f = vec![0.0; y0.len()];
        rhs(s0, &y0, &mut f)?;
        // initial step heuristic
        let ynorm = y0.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
        let fnorm = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let h = if fnorm > 0.0 {
            (0.01 * ynorm / fnorm).min(opts.h_max)
        } else {
            opts.h_max
        }
        .max(1e-10);
        Ok(DpStepper { s: s0, y: y0, f, h, opts, steps_taken: 0 })
    }

    /// Reset the cached RHS after the state was modified externally
    /// (chart transition).
    pub fn refresh(
        &mut self,
        rhs: &mut dyn FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    ) -> Result<()> {
        rhs(self.s, &self.y, &mut self.f)?;
        Ok(())
    }

    /// Advance by one accepted step, not beyond `s_end`.
    pub fn step(
        &mut self,
        s_end: f64,
        rhs: &mut dyn FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    ) -> Result<AcceptedStep> {
        let n = self.y.len();
        let mut k = vec![vec![0.0; n]; 7];
        k[0].copy_from_slice(&self.f);
        let mut ytmp = vec![0.0; n];
        loop {
            self.steps_taken += 1;
            if self.steps_taken > self.opts.max_steps {
                return Err(Error::Stiffness(self.s));
            }
            let h = self.h.min(s_end - self.s).min(self.opts.h_max);
            if h <= f64::EPSILON * self.s.abs().max(1.0) {
                return Err(Error::Stiffness(self.s));
            }
            for stage in 0..6 {
                for i in 0..n {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(stage + 1) {
                        acc += A[stage][j] * kj[i];
                    }
                    ytmp[i] = self.y[i] + h * acc;
                }
                let c = if stage == 5 { 1.0 } else { A[stage].iter().sum::<f64>() };
                let (head, tail) = k.split_at_mut(stage + 1);
                let _ = head;
                rhs(self.s + c * h, &ytmp, &mut tail[0])?;
            }
            // ytmp now holds the 5th-order solution (b row equals A[5]);
            // k[6] is its RHS (FSAL).
            let mut err: f64 = 0.0;
            for i in 0..n {
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += E[j] * kj[i];
                }
                e *= h;
                let sc = self.opts.atol + self.opts.rtol * self.y[i].abs().max(ytmp[i].abs());
                err += (e / sc) * (e / sc);
            }
            err = (err / n as f64).sqrt();
            if err <= 1.0 {
                let s0 = self.s;
                self.s += h;
                self.y.copy_from_slice(&ytmp);
                self.f.copy_from_slice(&k[6]);
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                self.h = (h * factor).min(self.opts.h_max);
                return Ok(AcceptedStep { s0, s1: self.s, y1: self.y.clone(), f1: self.f.clone() });
            }
            self.h = h * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
}
