//! Fixed-frame voltage-fed induction motor model.
//!
//! State: rotor flux lambda (2-vector, Wb), stator current i (2-vector, A),
//! rotor speed omega (rad/s). Input: stator voltage v (2-vector, V). With
//! J2 = [[0,-1],[1,0]] (a quarter-turn), beta = M/Lr and sigma the leakage:
//!
//!   lambda_dot = -(Rr/Lr) lambda + n_p omega J2 lambda + Rr beta i
//!   Ls sigma i_dot = -(Rs + Rr beta^2) i + beta ((Rr/Lr) I - n_p omega J2) lambda + v
//!   J omega_dot = -n_p beta lambda' J2 i - T_L
//!
//! Only Rr and T_L are treated as unknown downstream; everything else is a
//! known constant. The regression chains therefore consume the restricted
//! [`ElectricalKnowns`] view, which has no rotor resistance or load torque
//! field at all.

use serde::{Deserialize, Serialize};

use crate::vec2::Vec2;

/// Full motor parameter set (ground truth; includes the unknowns).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotorParams {
    /// Stator inductance (H).
    pub ls: f64,
    /// Rotor inductance (H).
    pub lr: f64,
    /// Mutual inductance (H).
    pub m: f64,
    /// Stator resistance (Ohm).
    pub rs: f64,
    /// Rotor resistance (Ohm): unknown to the estimators, ground truth here.
    pub rr_true: f64,
    /// Rotor inertia (kg m^2).
    pub j: f64,
    /// Pole pairs.
    pub pole_pairs: u32,
    /// Load torque (N m): unknown to the estimators, ground truth here.
    pub tl_true: f64,
}

impl Default for MotorParams {
    fn default() -> Self {
        MotorParams {
            ls: 0.14,
            lr: 0.14,
            m: 0.117,
            rs: 1.7,
            rr_true: 3.9,
            j: 1.1e-4,
            pole_pairs: 1,
            tl_true: 0.05,
        }
    }
}

impl MotorParams {
    /// beta = M / Lr, always recomputed from the primary fields.
    pub fn beta(&self) -> f64 {
        self.m / self.lr
    }

    /// Leakage sigma = 1 - M^2 / (Ls Lr), always recomputed.
    pub fn sigma(&self) -> f64 {
        1.0 - self.m * self.m / (self.ls * self.lr)
    }

    pub fn n_p(&self) -> f64 {
        self.pole_pairs as f64
    }

    /// Collect every invariant violation (empty when valid).
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        for (name, v) in [
            ("motor.ls", self.ls),
            ("motor.lr", self.lr),
            ("motor.m", self.m),
            ("motor.rs", self.rs),
            ("motor.rr_true", self.rr_true),
            ("motor.j", self.j),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("{name} must be strictly positive, got {v}"));
            }
        }
        if self.pole_pairs == 0 {
            errs.push("motor.pole_pairs must be at least 1".into());
        }
        if !self.tl_true.is_finite() {
            errs.push(format!("motor.tl_true must be finite, got {}", self.tl_true));
        }
        let sigma = self.sigma();
        if !(sigma > 0.0 && sigma < 1.0) {
            errs.push(format!(
                "leakage sigma = 1 - m^2/(ls*lr) must lie in (0,1), got {sigma}"
            ));
        }
        errs
    }

    /// The constants the regression chains are allowed to see.
    pub fn electrical_knowns(&self) -> ElectricalKnowns {
        ElectricalKnowns {
            ls: self.ls,
            lr: self.lr,
            rs: self.rs,
            beta: self.beta(),
            sigma: self.sigma(),
        }
    }
}

/// Constants available to the electrical regression and flux observer.
///
/// Deliberately excludes rotor resistance and load torque: holding the known
/// constants in this struct makes "the chains never read the unknowns" a
/// type-level fact rather than a convention.
#[derive(Debug, Clone, Copy)]
pub struct ElectricalKnowns {
    pub ls: f64,
    pub lr: f64,
    pub rs: f64,
    pub beta: f64,
    pub sigma: f64,
}

/// Motor state as named fields over the flat state slice.
#[derive(Debug, Clone, Copy)]
pub struct MotorState {
    pub lambda: Vec2,
    pub i: Vec2,
    pub omega: f64,
}

impl MotorState {
    pub fn from_slice(x: &[f64]) -> MotorState {
        MotorState {
            lambda: Vec2::new(x[0], x[1]),
            i: Vec2::new(x[2], x[3]),
            omega: x[4],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.lambda.is_finite() && self.i.is_finite() && self.omega.is_finite()
    }
}

/// Time derivative of the motor state under voltage v.
#[derive(Debug, Clone, Copy)]
pub struct MotorDerivative {
    pub d_lambda: Vec2,
    pub d_i: Vec2,
    pub d_omega: f64,
}

pub fn motor_derivative(st: &MotorState, v: Vec2, p: &MotorParams) -> MotorDerivative {
    let beta = p.beta();
    let sigma = p.sigma();
    let n_p = p.n_p();
    let jlam = st.lambda.perp();

    let d_lambda = st.lambda * (-p.rr_true / p.lr) + jlam * (n_p * st.omega) + st.i * (p.rr_true * beta);
    let d_i = (st.i * (-(p.rs + p.rr_true * beta * beta))
        + (st.lambda * (p.rr_true / p.lr) - jlam * (n_p * st.omega)) * beta
        + v)
        * (1.0 / (p.ls * sigma));
    let d_omega = (-n_p * beta * st.lambda.dot(st.i.perp()) - p.tl_true) / p.j;
    MotorDerivative {
        d_lambda,
        d_i,
        d_omega,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants_match_parameter_set() {
        let p = MotorParams::default();
        assert!((p.beta() - 0.117 / 0.14).abs() < 1e-15);
        assert!((p.sigma() - (1.0 - 0.117 * 0.117 / (0.14 * 0.14))).abs() < 1e-15);
        assert!(p.validate().is_empty());
    }

    #[test]
    fn unforced_equilibrium() {
        let p = MotorParams {
            tl_true: 0.0,
            ..MotorParams::default()
        };
        let st = MotorState {
            lambda: Vec2::new(0.0, 0.0),
            i: Vec2::new(0.0, 0.0),
            omega: 0.0,
        };
        let d = motor_derivative(&st, Vec2::new(0.0, 0.0), &p);
        assert_eq!(d.d_lambda, Vec2::new(0.0, 0.0));
        assert_eq!(d.d_i, Vec2::new(0.0, 0.0));
        assert_eq!(d.d_omega, 0.0);
    }

    #[test]
    fn pure_flux_decay() {
        let p = MotorParams {
            tl_true: 0.0,
            ..MotorParams::default()
        };
        let st = MotorState {
            lambda: Vec2::new(1.0, 0.0),
            i: Vec2::new(0.0, 0.0),
            omega: 0.0,
        };
        let d = motor_derivative(&st, Vec2::new(0.0, 0.0), &p);
        assert!((d.d_lambda.a + p.rr_true / p.lr).abs() < 1e-15);
        assert_eq!(d.d_lambda.b, 0.0);
        assert_eq!(d.d_omega, 0.0);
    }

    #[test]
    fn torque_balance_holds_identically() {
        // J*omega_dot + n_p*beta*lambda'J2 i + TL = 0 for arbitrary states
        let p = MotorParams::default();
        let cases = [
            (0.3, -0.1, 2.0, 1.5, 100.0, 4.0, -7.0),
            (-0.02, 0.045, -3.0, 0.2, -40.0, 0.0, 12.0),
            (1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
        ];
        for (la, lb, ia, ib, w, va, vb) in cases {
            let st = MotorState {
                lambda: Vec2::new(la, lb),
                i: Vec2::new(ia, ib),
                omega: w,
            };
            let d = motor_derivative(&st, Vec2::new(va, vb), &p);
            let balance = p.j * d.d_omega + p.n_p() * p.beta() * st.lambda.dot(st.i.perp()) + p.tl_true;
            assert!(balance.abs() < 1e-12, "balance = {balance}");
        }
    }
}
