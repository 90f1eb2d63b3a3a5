use std::f64::consts::TAU;

use serde::Serialize;

use super::dynamics::observed_orders;
use crate::{Error, Result, C64};

/// `V′(x)` by a five-point stencil.
fn derivative(v: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-3 * x.abs().max(1.0);
    (v(x - 2.0 * h) - 8.0 * v(x - h) + 8.0 * v(x + h) - v(x + 2.0 * h)) / (12.0 * h)
}

/// Classical `d/dt e^{2πip/p₀} = −i(2π/p₀)V′(x)e^{2πip/p₀}`.
pub fn classical_modular_rate(x: f64, p: f64, v: impl Fn(f64) -> f64, p0: f64) -> C64 {
    let k = TAU / p0;
    C64::new(0.0, -k * derivative(v, x)) * C64::from_polar(1.0, k * p)
}

/// Fixed-step RK4 trajectory of `H = p²/2m + V(x)`; returns `steps + 1`
/// phase-space points.
pub fn hamilton_rk4(
    v: impl Fn(f64) -> f64 + Copy,
    mass: f64,
    x0: f64,
    p0: f64,
    dt: f64,
    steps: usize,
) -> Vec<(f64, f64)> {
    let f = |x: f64, p: f64| (p / mass, -derivative(v, x));
    let mut out = Vec::with_capacity(steps + 1);
    let (mut x, mut p) = (x0, p0);
    out.push((x, p));
    for _ in 0..steps {
        let (a1, b1) = f(x, p);
        let (a2, b2) = f(x + 0.5 * dt * a1, p + 0.5 * dt * b1);
        let (a3, b3) = f(x + 0.5 * dt * a2, p + 0.5 * dt * b2);
        let (a4, b4) = f(x + dt * a3, p + dt * b3);
        x += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        p += dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        out.push((x, p));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalReport {
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
}

/// Five-point finite difference of `e^{2πip(t)/p₀}` along RK4 trajectories,
/// compared with [`classical_modular_rate`] at the trajectory point `t`.
#[allow(clippy::too_many_arguments)]
pub fn classical_rate_convergence(
    v: impl Fn(f64) -> f64 + Copy,
    mass: f64,
    x0: f64,
    p_init: f64,
    p0: f64,
    t: f64,
    dts: &[f64],
) -> Result<ClassicalReport> {
    if dts.len() < 2 {
        return Err(Error::param("dts", "need at least 2 levels"));
    }
    let mut errors = Vec::with_capacity(dts.len());
    for &dt in dts {
        let n = (t / dt).round();
        if (n * dt - t).abs() > 1e-9 * t.max(1.0) || n < 2.0 {
            return Err(Error::param(
                "dts",
                format!("t = {t} is not a multiple of {dt}"),
            ));
        }
        let n = n as usize;
        let traj = hamilton_rk4(v, mass, x0, p_init, dt, n + 2);
        let e = |i: usize| C64::from_polar(1.0, TAU * traj[i].1 / p0);
        let fd = (e(n - 2) - e(n - 1) * 8.0 + e(n + 1) * 8.0 - e(n + 2)) / (12.0 * dt);
        let (x, p) = traj[n];
        errors.push((fd - classical_modular_rate(x, p, v, p0)).norm());
    }
    Ok(ClassicalReport {
        dts: dts.to_vec(),
        orders: observed_orders(dts, &errors),
        errors,
    })
}
