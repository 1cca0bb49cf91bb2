//! Fixed-step classical RK4, kept as an independent reference for the
//! adaptive integrator. Shares nothing with it beyond the field evaluation.

use crate::flow::{velocity, FlowParams, Point3};
use crate::scalar::Real;

fn rk4_step<T: Real>(params: &FlowParams<T>, y: Point3<T>, h: T) -> Point3<T> {
    let half = T::lit(0.5);
    let k1 = velocity(params, &y);
    let k2 = velocity(params, &(y + k1 * (h * half)));
    let k3 = velocity(params, &(y + k2 * (h * half)));
    let k4 = velocity(params, &(y + k3 * h));
    y + (k1 + k2 * T::lit(2.0) + k3 * T::lit(2.0) + k4) * (h / T::lit(6.0))
}

/// RK4 from `t_span.0` to `t_span.1` using `n = ceil(|Δt| / h)` equal steps.
pub fn rk4_fixed<T: Real>(params: &FlowParams<T>, p0: Point3<T>, t_span: (T, T), h: T) -> Point3<T> {
    let dt = t_span.1 - t_span.0;
    let n = (dt.abs() / h.abs()).ceil().to_usize().unwrap_or(0).max(1);
    let step = dt / T::from_usize(n).unwrap();
    (0..n).fold(p0, |y, _| rk4_step(params, y, step))
}

/// RK4 samples `(t, X(t))` every step, including both end points.
pub fn rk4_samples<T: Real>(params: &FlowParams<T>, p0: Point3<T>, t_span: (T, T), h: T) -> Vec<(T, Point3<T>)> {
    let dt = t_span.1 - t_span.0;
    let n = (dt.abs() / h.abs()).ceil().to_usize().unwrap_or(0).max(1);
    let step = dt / T::from_usize(n).unwrap();
    let mut out = Vec::with_capacity(n + 1);
    let mut y = p0;
    out.push((t_span.0, y));
    for i in 1..=n {
        y = rk4_step(params, y, step);
        out.push((t_span.0 + step * T::from_usize(i).unwrap(), y));
    }
    out
}
