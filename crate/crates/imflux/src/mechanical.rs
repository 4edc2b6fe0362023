//! Mechanical regression: load torque and speed from flux, resistance, current.
//!
//! Given the flux vector and rotor resistance (ground truth or estimates,
//! depending on mode) plus measured current, low-pass filtering the flux
//! equation and substituting the torque balance yields the 2x2 matrix
//! regression
//!
//! ```text
//! z_m = Phi_m * (T_L, omega)'
//! ```
//!
//! with columns of Phi_m built from filtered versions of eta2 = n_p J2 lambda.
//! Mixing by the adjugate gives zeta_m = Delta_m * (T_L, omega)' with
//! Delta_m = det(Phi_m).
//!
//! Signals:
//! - eta1 = (Rr/Lr) lambda - Rr beta i   (flux-equation drift)
//! - eta2 = n_p J2 lambda                 (rotation channel)
//! - z_m = a*p/(p+a)[lambda] + a/(p+a)[eta1] + (beta/J) * 1/(p+a)[(eta2 . i) * a/(p+a)[eta2]]
//! - Phi_m = [ (1/J) * a/(p+a)^2 [eta2] | a/(p+a)[eta2] ]
//!
//! The washout term is realized as a*(lambda - a/(p+a)[lambda]); nothing is
//! differentiated. The correction lag arises from eliminating omega_dot with
//! the torque balance, which is what brings T_L into the regression.

use crate::filters::{lowpass_derivative_vec2, pure_lag_vec2};
use crate::linalg::{self, Mat};
use crate::vec2::Vec2;

/// Number of ODE states of the chain.
pub const MECH_STATES: usize = 10;

// State offsets.
const XFLAM: usize = 0; // a/(p+a)[lambda] (2)
const XFETA1: usize = 2; // a/(p+a)[eta1] (2)
const XFETA2: usize = 4; // a/(p+a)[eta2] (2)
const XGETA2: usize = 6; // a/(p+a)^2[eta2] (2)
const XCORR: usize = 8; // 1/(p+a)[(eta2 . i) * a/(p+a)[eta2]] (2)

/// Constants the mechanical chain is allowed to know. Rotor resistance is an
/// input (true value or estimate), never a field here.
#[derive(Debug, Clone, Copy)]
pub struct MechanicalKnowns {
    pub lr: f64,
    pub beta: f64,
    pub j: f64,
    pub n_p: f64,
    /// Filter pole a (rad/s).
    pub a: f64,
}

/// Chain inputs: flux and rotor resistance are ground truth in ground-truth
/// mode, estimates in certainty-equivalence mode, and zero while gated off.
#[derive(Debug, Clone, Copy)]
pub struct MechInputs {
    pub lambda: Vec2,
    pub rr: f64,
    pub i: Vec2,
}

impl MechInputs {
    pub const ZERO: MechInputs = MechInputs {
        lambda: Vec2::new(0.0, 0.0),
        rr: 0.0,
        i: Vec2::new(0.0, 0.0),
    };
}

fn etas(kn: &MechanicalKnowns, inp: &MechInputs) -> (Vec2, Vec2) {
    let eta1 = inp.lambda * (inp.rr / kn.lr) - inp.i * (inp.rr * kn.beta);
    let eta2 = inp.lambda.perp() * kn.n_p;
    (eta1, eta2)
}

/// Fill the 10 state derivatives.
pub fn mech_derivative(kn: &MechanicalKnowns, inp: &MechInputs, xs: &[f64], dxs: &mut [f64]) {
    let (eta1, eta2) = etas(kn, inp);
    let a = kn.a;
    let xflam = Vec2::from_slice(&xs[XFLAM..]);
    let xfeta1 = Vec2::from_slice(&xs[XFETA1..]);
    let xfeta2 = Vec2::from_slice(&xs[XFETA2..]);
    let xgeta2 = Vec2::from_slice(&xs[XGETA2..]);
    let xcorr = Vec2::from_slice(&xs[XCORR..]);

    let (_, _, d_flam) = lowpass_derivative_vec2(a, xflam, inp.lambda);
    let (_, _, d_feta1) = lowpass_derivative_vec2(a, xfeta1, eta1);
    let (_, _, d_feta2) = lowpass_derivative_vec2(a, xfeta2, eta2);
    let (_, d_geta2) = pure_lag_vec2(a, xgeta2, xfeta2);
    let (_, d_corr) = pure_lag_vec2(a, xcorr, xfeta2 * eta2.dot(inp.i));

    d_flam.write_to(&mut dxs[XFLAM..XFLAM + 2]);
    d_feta1.write_to(&mut dxs[XFETA1..XFETA1 + 2]);
    d_feta2.write_to(&mut dxs[XFETA2..XFETA2 + 2]);
    d_geta2.write_to(&mut dxs[XGETA2..XGETA2 + 2]);
    d_corr.write_to(&mut dxs[XCORR..XCORR + 2]);
}

/// Assemble z_m and Phi_m from the current states and inputs.
pub fn mech_outputs(kn: &MechanicalKnowns, inp: &MechInputs, xs: &[f64]) -> (Vec2, Mat<2>) {
    let a = kn.a;
    let xflam = Vec2::from_slice(&xs[XFLAM..]);
    let xfeta1 = Vec2::from_slice(&xs[XFETA1..]);
    let xfeta2 = Vec2::from_slice(&xs[XFETA2..]);
    let xgeta2 = Vec2::from_slice(&xs[XGETA2..]);
    let xcorr = Vec2::from_slice(&xs[XCORR..]);

    let z_m = (inp.lambda - xflam) * a + xfeta1 + xcorr * (kn.beta / kn.j);
    // columns: a/(p+a)^2[eta2]/J | a/(p+a)[eta2]
    let phi_m = [
        [xgeta2.a / kn.j, xfeta2.a],
        [xgeta2.b / kn.j, xfeta2.b],
    ];
    (z_m, phi_m)
}

/// Mixed scalar regressions: zeta_m = adj(Phi_m) z_m, Delta_m = det(Phi_m).
/// zeta_m pairs component 1 with T_L and component 2 with omega.
pub fn mix_mechanical(z_m: Vec2, phi_m: &Mat<2>) -> ([f64; 2], f64) {
    linalg::mix(phi_m, &[z_m.a, z_m.b])
}

/// Steady-state prediction of Delta_m.
#[derive(Debug, Clone, Copy)]
pub struct SteadyStateDelta {
    /// Electrical rotation rate of the flux vector: omega + Rr*TL/|lambda|^2.
    pub varpi: f64,
    /// Phase lag of the a/(p+a) stage at varpi.
    pub psi: f64,
    /// |Delta_m| from the frequency response of both filter chains.
    pub predicted_abs: f64,
    /// The unscaled textbook form (|lambda|/J) sin(psi), reported for
    /// comparison only; it omits the filter gain magnitudes and uses
    /// |lambda| where the dimensional analysis of Phi_m requires |lambda|^2.
    pub unscaled_reference: f64,
}

/// Predict the settled Delta_m for steady rotation at speed `omega_star` with
/// flux norm `lambda_norm_star`.
///
/// In steady state the flux vector rotates at varpi, so both columns of Phi_m
/// are LTI-filtered rotating vectors. Filtering a rotating 2-vector equals
/// multiplying the corresponding complex phasor by the filter's frequency
/// response, and the determinant of two rotating columns is the product of
/// their magnitudes times the sine of their phase difference. Both columns
/// share one a/(p+a) stage (gain a/sqrt(varpi^2+a^2) each, entering the
/// magnitude product twice); column 1 adds a 1/(p+a) stage, contributing gain
/// 1/sqrt(varpi^2+a^2) and the entire phase difference psi = arctan(varpi/a).
/// With |eta2| = |lambda| (one pole pair; this prediction assumes n_p = 1,
/// which is also baked into the varpi formula):
///
///   |Delta_m| = a^2/(varpi^2+a^2) * 1/sqrt(varpi^2+a^2) * |lambda|^2/J * sin(psi)
pub fn steady_state_delta(
    omega_star: f64,
    lambda_norm_star: f64,
    rr: f64,
    tl: f64,
    a: f64,
    j: f64,
) -> SteadyStateDelta {
    assert!(
        lambda_norm_star > 0.0,
        "steady-state prediction needs a positive flux norm"
    );
    let varpi = omega_star + rr * tl / (lambda_norm_star * lambda_norm_star);
    let psi = (varpi / a).atan();
    let gain_sq = a * a / (varpi * varpi + a * a);
    let lag_gain = 1.0 / varpi.hypot(a);
    let predicted_abs =
        gain_sq * lag_gain * (lambda_norm_star * lambda_norm_star / j) * psi.sin();
    SteadyStateDelta {
        varpi,
        psi,
        predicted_abs,
        unscaled_reference: (lambda_norm_star / j) * psi.sin(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn knowns() -> MechanicalKnowns {
        MechanicalKnowns {
            lr: 0.14,
            beta: 0.117 / 0.14,
            j: 1.1e-4,
            n_p: 1.0,
            a: 50.0,
        }
    }

    #[test]
    fn zero_flux_kills_the_regression() {
        let kn = knowns();
        let inp = MechInputs {
            lambda: Vec2::new(0.0, 0.0),
            rr: 3.9,
            i: Vec2::new(2.0, -1.0),
        };
        let (eta1, eta2) = etas(&kn, &inp);
        assert!((eta1 + inp.i * (inp.rr * kn.beta)).norm() < 1e-15);
        assert_eq!(eta2, Vec2::new(0.0, 0.0));
        // with zero states, Phi_m = 0 and Delta_m = 0
        let xs = [0.0; MECH_STATES];
        let (_, phi_m) = mech_outputs(&kn, &inp, &xs);
        let (_, delta) = mix_mechanical(Vec2::new(0.0, 0.0), &phi_m);
        assert_eq!(delta, 0.0);
    }

    #[test]
    fn identity_phi_passes_z_through() {
        let z = Vec2::new(3.0, 5.0);
        let phi = [[1.0, 0.0], [0.0, 1.0]];
        let (zeta, delta) = mix_mechanical(z, &phi);
        assert_eq!(delta, 1.0);
        assert_eq!(zeta, [3.0, 5.0]);
    }

    #[test]
    fn prediction_limits() {
        // TL = 0 leaves varpi = omega
        let s = steady_state_delta(40.0, 0.0455, 3.9, 0.0, 50.0, 1.1e-4);
        assert_eq!(s.varpi, 40.0);
        // varpi = a gives psi = pi/4
        let s = steady_state_delta(50.0, 1.0, 3.9, 0.0, 50.0, 1.1e-4);
        assert!((s.psi - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn canonical_prediction_value() {
        // frozen reference for the canonical operating point
        let s = steady_state_delta(40.0, 0.0455, 3.9, 0.05, 50.0, 1.1e-4);
        // 40 + 3.9*0.05/0.0455^2
        assert!((s.varpi - 134.191523).abs() < 1e-5, "varpi = {}", s.varpi);
        assert!(
            (s.predicted_abs - 0.0150133).abs() < 1e-6,
            "predicted = {}",
            s.predicted_abs
        );
    }
}
