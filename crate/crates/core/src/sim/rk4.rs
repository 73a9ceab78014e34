//! Classical fixed-step Runge-Kutta integration.

use nalgebra::SVector;

/// One RK4 step of `x' = f(t, x)` from `t` to `t + h`.
pub fn rk4_step<const N: usize, F>(mut f: F, x: &SVector<f64, N>, t: f64, h: f64) -> SVector<f64, N>
where
    F: FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
{
    let k1 = f(t, x);
    let k2 = f(t + 0.5 * h, &(x + 0.5 * h * k1));
    let k3 = f(t + 0.5 * h, &(x + 0.5 * h * k2));
    let k4 = f(t + h, &(x + h * k3));
    x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}
