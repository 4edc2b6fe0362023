//! Field-oriented controller with PI loops on flux norm, speed, and dq current.
//!
//! The controller reads the true motor state (full-state measurement): the
//! observer stack under test never feeds back into the drive. The flux angle
//! delta = atan2(lambda_b, lambda_a) defines the rotating dq frame; current
//! references come from the flux-norm and speed PI loops, and a PI current
//! loop produces the dq voltage, rotated back to the fixed frame.

use serde::{Deserialize, Serialize};

use crate::motor::MotorParams;
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerConfig {
    /// When false the drive is off: v = 0 and the PI integrators hold.
    pub enabled: bool,
    /// dq current loop PI gains.
    pub kp: f64,
    pub ki: f64,
    /// Flux-norm loop PI gains.
    pub k_lambda_p: f64,
    pub k_lambda_i: f64,
    /// Speed loop PI gains.
    pub k_omega_p: f64,
    pub k_omega_i: f64,
    /// Flux-norm reference (Wb).
    pub lambda_norm_ref: f64,
    /// Speed reference (rad/s).
    pub omega_ref: f64,
    /// Rotor resistance value the controller uses in its feedforward path.
    /// The drive is conventional equipment here, so it is allowed to know it.
    pub rr_for_control: f64,
    /// Minimum flux norm used for the frame angle and the i_q reference
    /// division; only relevant in the first instants of a cold start.
    pub flux_floor: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            enabled: true,
            kp: 100.0,
            ki: 100.0,
            k_lambda_p: 10.0,
            k_lambda_i: 100.0,
            k_omega_p: 10.0,
            k_omega_i: 10.0,
            lambda_norm_ref: 0.0455,
            omega_ref: 40.0,
            rr_for_control: 3.9,
            flux_floor: 1e-6,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        for (name, v) in [
            ("controller.kp", self.kp),
            ("controller.ki", self.ki),
            ("controller.k_lambda_p", self.k_lambda_p),
            ("controller.k_lambda_i", self.k_lambda_i),
            ("controller.k_omega_p", self.k_omega_p),
            ("controller.k_omega_i", self.k_omega_i),
            ("controller.rr_for_control", self.rr_for_control),
            ("controller.flux_floor", self.flux_floor),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("{name} must be strictly positive, got {v}"));
            }
        }
        for (name, v) in [
            ("controller.lambda_norm_ref", self.lambda_norm_ref),
            ("controller.omega_ref", self.omega_ref),
        ] {
            if !v.is_finite() {
                errs.push(format!("{name} must be finite, got {v}"));
            }
        }
        if self.lambda_norm_ref <= 0.0 {
            errs.push(format!(
                "controller.lambda_norm_ref must be positive, got {}",
                self.lambda_norm_ref
            ));
        }
        errs
    }
}

/// Controller PI integrator states, stored in the augmented ODE state.
#[derive(Debug, Clone, Copy, Default)]
pub struct ControllerState {
    pub int_idq: Vec2,
    pub int_e_lambda: f64,
    pub int_e_omega: f64,
}

/// Voltage command plus the integrator derivatives for the augmented ODE.
#[derive(Debug, Clone, Copy)]
pub struct ControlOutput {
    pub v: Vec2,
    pub d_int_idq: Vec2,
    pub d_int_e_lambda: f64,
    pub d_int_e_omega: f64,
    /// True when the flux norm had to be floored (cold-start instants only).
    pub flux_floored: bool,
}

pub fn foc_control(
    lambda: Vec2,
    i: Vec2,
    omega: f64,
    ctrl: &ControllerState,
    cfg: &ControllerConfig,
    p: &MotorParams,
) -> ControlOutput {
    if !cfg.enabled {
        return ControlOutput {
            v: Vec2::new(0.0, 0.0),
            d_int_idq: Vec2::new(0.0, 0.0),
            d_int_e_lambda: 0.0,
            d_int_e_omega: 0.0,
            flux_floored: false,
        };
    }

    let raw_norm = lambda.norm();
    let flux_floored = raw_norm < cfg.flux_floor;
    let norm = raw_norm.max(cfg.flux_floor);
    let delta = lambda.b.atan2(lambda.a);

    let i_dq = i.rotated(-delta);

    let e_lambda = cfg.lambda_norm_ref - norm;
    let e_omega = cfg.omega_ref - omega;

    let i_d_ref = norm / p.m
        + (p.lr / (cfg.rr_for_control * p.m))
            * (cfg.k_lambda_p * e_lambda + cfg.k_lambda_i * ctrl.int_e_lambda);
    let i_q_ref = (p.j * p.lr / (p.m * norm))
        * (cfg.k_omega_p * e_omega + cfg.k_omega_i * ctrl.int_e_omega);

    let e_idq = Vec2::new(i_d_ref, i_q_ref) - i_dq;
    let v_dq = e_idq * cfg.kp + ctrl.int_idq * cfg.ki;
    let v = v_dq.rotated(delta);

    ControlOutput {
        v,
        d_int_idq: e_idq,
        d_int_e_lambda: e_lambda,
        d_int_e_omega: e_omega,
        flux_floored,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_error_zero_integrators_zero_voltage() {
        let cfg = ControllerConfig::default();
        let p = MotorParams::default();
        // flux exactly on reference along axis a, speed on reference,
        // current exactly at its reference
        let lambda = Vec2::new(cfg.lambda_norm_ref, 0.0);
        let ctrl = ControllerState::default();
        let i_d_ref = cfg.lambda_norm_ref / p.m;
        let i = Vec2::new(i_d_ref, 0.0); // delta = 0 so dq == ab
        let out = foc_control(lambda, i, cfg.omega_ref, &ctrl, &cfg, &p);
        assert!(out.v.norm() < 1e-12);
        assert!(out.d_int_idq.norm() < 1e-12);
        assert_eq!(out.d_int_e_lambda, 0.0);
        assert_eq!(out.d_int_e_omega, 0.0);
        assert!(!out.flux_floored);
    }

    #[test]
    fn frame_rotation_consistency() {
        // rotating the flux and current by a common angle rotates the voltage
        // by the same angle and leaves the scalar loops unchanged
        let cfg = ControllerConfig::default();
        let p = MotorParams::default();
        let ctrl = ControllerState {
            int_idq: Vec2::new(0.01, -0.02),
            int_e_lambda: 0.003,
            int_e_omega: 0.5,
        };
        let lambda = Vec2::new(0.03, 0.01);
        let i = Vec2::new(1.0, -0.5);
        let base = foc_control(lambda, i, 20.0, &ctrl, &cfg, &p);
        let ang = 1.234;
        let rot = foc_control(lambda.rotated(ang), i.rotated(ang), 20.0, &ctrl, &cfg, &p);
        assert!((rot.v - base.v.rotated(ang)).norm() < 1e-9);
        assert!((rot.d_int_idq - base.d_int_idq).norm() < 1e-9);
        assert!((rot.d_int_e_lambda - base.d_int_e_lambda).abs() < 1e-12);
    }

    #[test]
    fn disabled_controller_is_silent() {
        let cfg = ControllerConfig {
            enabled: false,
            ..ControllerConfig::default()
        };
        let p = MotorParams::default();
        let ctrl = ControllerState {
            int_idq: Vec2::new(5.0, 5.0),
            int_e_lambda: 1.0,
            int_e_omega: 1.0,
        };
        let out = foc_control(Vec2::new(0.04, 0.0), Vec2::new(1.0, 2.0), 10.0, &ctrl, &cfg, &p);
        assert_eq!(out.v, Vec2::new(0.0, 0.0));
        assert_eq!(out.d_int_idq, Vec2::new(0.0, 0.0));
        assert_eq!(out.d_int_e_lambda, 0.0);
        assert_eq!(out.d_int_e_omega, 0.0);
    }

    #[test]
    fn flux_floor_flags_cold_start() {
        let cfg = ControllerConfig::default();
        let p = MotorParams::default();
        let ctrl = ControllerState::default();
        let out = foc_control(Vec2::new(0.0, 0.0), Vec2::new(0.0, 0.0), 0.0, &ctrl, &cfg, &p);
        assert!(out.flux_floored);
        assert!(out.v.is_finite());
    }
}
