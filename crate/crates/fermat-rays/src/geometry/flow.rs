//! Flows of smooth vector fields.

use super::charted::{integrate_charted, ChartedOptions, StateLayout};
use super::fields::VectorField;
use super::manifold::Point;
use crate::num::HDual;
use crate::Result;

/// Flow `phi(t, x0)` of a vector field, integrated with local tolerance
/// `tol`. Negative `t` runs the flow backwards.
pub fn flow(field: &VectorField, x0: &Point, t: f64, tol: f64) -> Result<Point> {
    if t == 0.0 {
        return Ok(x0.clone());
    }
    let m = &field.manifold;
    let dim = m.dim();
    let sign = t.signum();
    let mut rhs = |_c: usize, _s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let v = field.eval(&y[..dim]);
        for i in 0..dim {
            dy[i] = sign * v[i];
        }
        Ok(())
    };
    let opts = ChartedOptions { ode: super::ode::OdeOptions::with_tol(tol), ..Default::default() };
    let tr = integrate_charted(
        m,
        StateLayout::Position,
        x0.chart,
        x0.x.clone(),
        0.0,
        t.abs(),
        &opts,
        &mut rhs,
        None,
    )?;
    let last = tr.samples.last().unwrap();
    Ok(Point::new(last.chart, last.y.clone()))
}

/// Flow together with its differential `D phi_t(x0)` (row-major), mapping
/// tangent vectors at `x0` to tangent vectors at the endpoint. The variational
/// equation `J' = DW(phi) J` is integrated alongside the point.
pub fn flow_with_jacobian(
    field: &VectorField,
    x0: &Point,
    t: f64,
    tol: f64,
) -> Result<(Point, Vec<f64>)> {
    let m = &field.manifold;
    let dim = m.dim();
    if t == 0.0 {
        let mut jac = vec![0.0; dim * dim];
        for i in 0..dim {
            jac[i * dim + i] = 1.0;
        }
        return Ok((x0.clone(), jac));
    }
    let sign = t.signum();
    let mut rhs = |_c: usize, _s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let x = &y[..dim];
        let v = field.eval(x);
        for i in 0..dim {
            dy[i] = sign * v[i];
        }
        // DW at x, column by column against the stored J columns.
        let mut dw = vec![0.0; dim * dim];
        for j in 0..dim {
            let xs: Vec<HDual> = x
                .iter()
                .enumerate()
                .map(|(k, &xv)| HDual::seeded(xv, if k == j { 1.0 } else { 0.0 }, 0.0))
                .collect();
            let w = field.eval(&xs);
            for i in 0..dim {
                dw[i * dim + j] = w[i].d1;
            }
        }
        for col in 0..dim {
            for r in 0..dim {
                let mut acc = 0.0;
                for k in 0..dim {
                    acc += dw[r * dim + k] * y[dim + col * dim + k];
                }
                dy[dim + col * dim + r] = sign * acc;
            }
        }
        Ok(())
    };
    let mut y0 = vec![0.0; dim + dim * dim];
    y0[..dim].copy_from_slice(&x0.x);
    for i in 0..dim {
        y0[dim + i * dim + i] = 1.0;
    }
    let opts = ChartedOptions { ode: super::ode::OdeOptions::with_tol(tol), ..Default::default() };
    let tr = integrate_charted(
        m,
        StateLayout::PositionWithJacobian,
        x0.chart,
        y0,
        0.0,
        t.abs(),
        &opts,
        &mut rhs,
        None,
    )?;
    let last = tr.samples.last().unwrap();
    let p = Point::new(last.chart, last.y[..dim].to_vec());
    // stored column-major; return row-major
    let mut jac = vec![0.0; dim * dim];
    for col in 0..dim {
        for r in 0..dim {
            jac[r * dim + col] = last.y[dim + col * dim + r];
        }
    }
    Ok((p, jac))
}
