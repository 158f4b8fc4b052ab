//! Classical fixed-step fourth-order Runge–Kutta.

use crate::error::{Error, Result};

/// One RK4 step of `y' = f(y)` with step `h`.
pub fn rk4_step<const N: usize, F>(f: F, y: &[f64; N], h: f64) -> Result<[f64; N]>
where
    F: Fn(&[f64; N]) -> Result<[f64; N]>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Contract(format!("step size must be positive, got {h}")));
    }
    let axpy = |a: &[f64; N], k: &[f64; N], s: f64| {
        let mut out = *a;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += s * ki;
        }
        out
    };
    let k1 = f(y)?;
    let k2 = f(&axpy(y, &k1, 0.5 * h))?;
    let k3 = f(&axpy(y, &k2, 0.5 * h))?;
    let k4 = f(&axpy(y, &k3, h))?;
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}
