//! First-order filter primitives used by every regression chain.
//!
//! Each primitive maps (pole, state, input) to (outputs, state derivative) and
//! is integrated by the caller inside the global RK4 step, so filters of
//! products of continuously varying signals stay consistent with the motor
//! integration. All realizations are strictly proper in state: no input is
//! ever differentiated numerically.
//!
//! Transfer functions, with p the differentiation operator and alpha > 0:
//! - [`lowpass_derivative`] realizes alpha/(p+alpha) and alpha*p/(p+alpha) from one state
//! - [`pure_lag`] realizes 1/(p+alpha)
//! - [`washout`] realizes p/(p+alpha) = 1 - alpha/(p+alpha) on a lag state

use crate::vec2::Vec2;

/// Low-pass pair: state x with xdot = alpha*(u - x).
///
/// Returns (y_lp, y_dlp, xdot) where y_lp = alpha/(p+alpha)[u] = x and
/// y_dlp = alpha*p/(p+alpha)[u] = alpha*(u - x) = xdot.
#[inline]
pub fn lowpass_derivative(alpha: f64, x: f64, u: f64) -> (f64, f64, f64) {
    let d = alpha * (u - x);
    (x, d, d)
}

/// Pure lag: state x with xdot = u - alpha*x; output y = 1/(p+alpha)[u] = x.
#[inline]
pub fn pure_lag(alpha: f64, x: f64, u: f64) -> (f64, f64) {
    (x, u - alpha * x)
}

/// Washout: y = p/(p+alpha)[u] = u - alpha*(1/(p+alpha))[u] on a lag state x.
///
/// Returns (y, xdot); note xdot = y for this realization.
#[inline]
pub fn washout(alpha: f64, x: f64, u: f64) -> (f64, f64) {
    let y = u - alpha * x;
    (y, y)
}

/// Component-wise low-pass pair for plane vectors.
#[inline]
pub fn lowpass_derivative_vec2(alpha: f64, x: Vec2, u: Vec2) -> (Vec2, Vec2, Vec2) {
    let d = (u - x) * alpha;
    (x, d, d)
}

/// Component-wise pure lag for plane vectors.
#[inline]
pub fn pure_lag_vec2(alpha: f64, x: Vec2, u: Vec2) -> (Vec2, Vec2) {
    (x, u - x * alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dc_gains() {
        // constant input already settled: lowpass passes DC, its derivative
        // output and the washout kill DC, the lag settles at u/alpha
        let alpha = 37.0;
        let u = 4.2;
        let (ylp, ydlp, dx) = lowpass_derivative(alpha, u, u);
        assert_eq!(ylp, u);
        assert_eq!(ydlp, 0.0);
        assert_eq!(dx, 0.0);

        let (ylag, dlag) = pure_lag(alpha, u / alpha, u);
        assert_eq!(ylag, u / alpha);
        assert_eq!(dlag, 0.0);

        let (ywo, dwo) = washout(alpha, u / alpha, u);
        assert_eq!(ywo, 0.0);
        assert_eq!(dwo, 0.0);
    }

    #[test]
    fn homogeneous_decay_direction() {
        // u = 0, x = 1: every state decays toward zero at rate alpha
        let alpha = 10.0;
        assert_eq!(lowpass_derivative(alpha, 1.0, 0.0).2, -alpha);
        assert_eq!(pure_lag(alpha, 1.0, 0.0).1, -alpha);
        assert_eq!(washout(alpha, 1.0, 0.0).1, -alpha);
    }
}
