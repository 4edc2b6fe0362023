//! Classical fixed-step fourth-order Runge-Kutta over a flat state vector.
//!
//! The whole augmented system (motor, controller integrators, every filter
//! state, observers) advances in one step so every subsystem sees the same
//! time base.

// The kernel walks several parallel slices by index; zipping five iterators
// reads worse than the subscript form.
#![allow(clippy::needless_range_loop)]

/// Scratch buffers reused across steps to keep the loop allocation-free.
pub struct Rk4Buffers {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Buffers {
    pub fn new(n: usize) -> Self {
        Rk4Buffers {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}

/// Advance `x` in place from t to t + dt.
///
/// `f(t, x, dx)` must fill `dx` completely.
pub fn step<F>(t: f64, dt: f64, x: &mut [f64], buf: &mut Rk4Buffers, f: &mut F)
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = x.len();
    debug_assert_eq!(buf.k1.len(), n);

    f(t, x, &mut buf.k1);
    for j in 0..n {
        buf.tmp[j] = x[j] + 0.5 * dt * buf.k1[j];
    }
    f(t + 0.5 * dt, &buf.tmp, &mut buf.k2);
    for j in 0..n {
        buf.tmp[j] = x[j] + 0.5 * dt * buf.k2[j];
    }
    f(t + 0.5 * dt, &buf.tmp, &mut buf.k3);
    for j in 0..n {
        buf.tmp[j] = x[j] + dt * buf.k3[j];
    }
    f(t + dt, &buf.tmp, &mut buf.k4);
    let w = dt / 6.0;
    for j in 0..n {
        x[j] += w * (buf.k1[j] + 2.0 * buf.k2[j] + 2.0 * buf.k3[j] + buf.k4[j]);
    }
}
