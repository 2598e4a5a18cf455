//! Derivative-free local optimization and damped least squares.

use crate::num::linalg;
use crate::Result;

/// Nelder-Mead simplex minimization. Deterministic given the start; good
/// enough to polish grid optima of smooth functions to ~1e-10.
pub fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    scale: f64,
    max_iter: usize,
    ftol: f64,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += scale;
        let v = f(&x);
        simplex.push((x, v));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= ftol * (1.0 + best.abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|(x, _)| x[d]).sum::<f64>() / n as f64)
            .collect();
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&simplex[n].0)
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        let fr = f(&reflect);
        if fr < simplex[0].1 {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + gamma * (c - w))
                .collect();
            let fe = f(&expand);
            simplex[n] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
        } else {
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + rho * (w - c))
                .collect();
            let fc = f(&contract);
            if fc < simplex[n].1 {
                simplex[n] = (contract, fc);
            } else {
                let best_x = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = entry
                        .0
                        .iter()
                        .zip(&best_x)
                        .map(|(xi, bi)| bi + sigma * (xi - bi))
                        .collect();
                    entry.1 = f(&x);
                    entry.0 = x;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Golden-section minimization on `[a, b]`.
pub fn golden_min(f: &mut dyn FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}

#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iter: usize,
    pub residual_tol: f64,
    pub fd_step: f64,
    /// Abort early when the residual has not improved by 10x within this
    /// many iterations (doomed candidates are common in shooting searches).
    pub stall_iters: usize,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { max_iter: 30, residual_tol: 1e-9, fd_step: 1e-7, stall_iters: 5 }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Damped Gauss-Newton (Levenberg-Marquardt) with a finite-difference
/// Jacobian. Handles the rank deficiency of return maps along the flow
/// direction through the damping term.
pub fn levenberg_marquardt(
    residual: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
    x0: &[f64],
    opts: &LmOptions,
) -> Result<LmResult> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = residual(&x)?;
    let m = r.len();
    let mut rnorm = crate::num::norm(&r);
    let mut lambda = 1e-3;
    let mut best_seen = rnorm;
    let mut since_improvement = 0usize;
    let mut iterations = 0usize;

    for _ in 0..opts.max_iter {
        iterations += 1;
        if rnorm < opts.residual_tol {
            return Ok(LmResult { x, residual_norm: rnorm, converged: true, iterations });
        }
        // finite-difference Jacobian, column per unknown
        let mut jac = vec![0.0; m * n];
        for j in 0..n {
            let h = opts.fd_step * (1.0 + x[j].abs());
            let mut xp = x.clone();
            xp[j] += h;
            let rp = residual(&xp)?;
            for i in 0..m {
                jac[i * n + j] = (rp[i] - r[i]) / h;
            }
        }
        // normal equations with adaptive damping
        let mut jtj = vec![0.0; n * n];
        let mut jtr = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..m {
                    s += jac[k * n + i] * jac[k * n + j];
                }
                jtj[i * n + j] = s;
            }
            let mut s = 0.0;
            for k in 0..m {
                s += jac[k * n + i] * r[k];
            }
            jtr[i] = s;
        }
        let mut stepped = false;
        for _ in 0..12 {
            let mut damped = jtj.clone();
            for i in 0..n {
                damped[i * n + i] += lambda * (1.0 + jtj[i * n + i]);
            }
            let Some(step) = linalg::solve_spd(n, &damped, &jtr) else {
                lambda *= 10.0;
                continue;
            };
            let xt: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a - s).collect();
            match residual(&xt) {
                Ok(rt) => {
                    let rtnorm = crate::num::norm(&rt);
                    if rtnorm < rnorm {
                        x = xt;
                        r = rt;
                        rnorm = rtnorm;
                        lambda = (lambda * 0.3).max(1e-14);
                        stepped = true;
                        break;
                    }
                    lambda *= 8.0;
                }
                Err(_) => {
                    lambda *= 8.0;
                }
            }
        }
        if rnorm < 0.1 * best_seen {
            best_seen = rnorm;
            since_improvement = 0;
        } else {
            since_improvement += 1;
            if since_improvement >= opts.stall_iters && rnorm > opts.residual_tol {
                break;
            }
        }
        if !stepped {
            break;
        }
    }
    Ok(LmResult {
        converged: rnorm < opts.residual_tol,
        x,
        residual_norm: rnorm,
        iterations,
    })
}
