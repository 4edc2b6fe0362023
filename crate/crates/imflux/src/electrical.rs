//! Per-pole electrical regression chains and the stacked 6x6 regression.
//!
//! For each filter pole alpha, a chain of first-order filters applied to the
//! measured stator current i and voltage v produces a scalar linear regression
//!
//! ```text
//! z(t, alpha) = phi(t, alpha)' Theta(t) + (decaying filter-IC transient)
//! ```
//!
//! over the mixed unknown vector Theta = (Rr, lambda, Rr*lambda, Rr*|lambda|^2).
//! Six chains with distinct poles stack into z6 = Phi * Theta, which the
//! adjugate mixing step decouples into scalar equations zeta_k = Delta_e * Theta_k
//! with Delta_e = det(Phi).
//!
//! Chain construction (all differentiation-free):
//! - f_i, f_v: low-passed current/voltage; fdot_i = alpha*(i - f_i) realizes
//!   the band-limited derivative without differentiating the input.
//! - eight pure lags on products of those signals implement the filtered
//!   cross-terms that arise when the flux is eliminated from the motor
//!   equations using the stator equation and the filter swapping identity.
//! - rho1, rho2, rho3 recombine the filter outputs into flux-free measurables;
//!   the regressor row groups them against the unknowns.
//!
//! The chains consume only [`ElectricalKnowns`] (no rotor resistance, no load
//! torque): the unknowns appear exclusively on the Theta side of the identity.

use crate::filters::{lowpass_derivative_vec2, pure_lag};
use crate::linalg::{self, Mat};
use crate::motor::ElectricalKnowns;
use crate::vec2::Vec2;

/// Number of ODE states per chain.
pub const CHAIN_STATES: usize = 12;

/// Number of chains / stacked rows. The mixing step needs a square system
/// over the 6-dimensional Theta, hence exactly six poles.
pub const N_CHAINS: usize = 6;

// State offsets within one chain slice.
const XFI: usize = 0; // low-passed current (2)
const XFV: usize = 2; // low-passed voltage (2)
const L_VFV: usize = 4; // lag of v . f_v
const L_IFV: usize = 5; // lag of i . f_v
const L_VFI: usize = 6; // lag of v . f_i
const L_IFI: usize = 7; // lag of i . f_i
const L_VDFI: usize = 8; // lag of v . fdot_i
const L_DFVDFI: usize = 9; // lag of fdot_v . fdot_i
const L_IDFI: usize = 10; // lag of i . fdot_i
const L_DFI2: usize = 11; // lag of |fdot_i|^2

/// Filter outputs recombined into the row of one scalar regression.
#[derive(Debug, Clone, Copy)]
pub struct ChainOutputs {
    pub rho1: Vec2,
    pub rho2: f64,
    pub rho3: f64,
    /// Left-hand side z = rho2.
    pub z: f64,
    /// Regressor row phi against Theta = (Rr, la, lb, Rr*la, Rr*lb, Rr*|l|^2).
    pub phi: [f64; 6],
}

/// Fill the 12 state derivatives of one chain.
pub fn chain_derivative(
    alpha: f64,
    i: Vec2,
    v: Vec2,
    xs: &[f64],
    dxs: &mut [f64],
) {
    let fi = Vec2::new(xs[XFI], xs[XFI + 1]);
    let fv = Vec2::new(xs[XFV], xs[XFV + 1]);
    let (_, dfi, dfi_state) = lowpass_derivative_vec2(alpha, fi, i);
    let (_, dfv, dfv_state) = lowpass_derivative_vec2(alpha, fv, v);
    dfi_state.write_to(&mut dxs[XFI..XFI + 2]);
    dfv_state.write_to(&mut dxs[XFV..XFV + 2]);
    dxs[L_VFV] = pure_lag(alpha, xs[L_VFV], v.dot(fv)).1;
    dxs[L_IFV] = pure_lag(alpha, xs[L_IFV], i.dot(fv)).1;
    dxs[L_VFI] = pure_lag(alpha, xs[L_VFI], v.dot(fi)).1;
    dxs[L_IFI] = pure_lag(alpha, xs[L_IFI], i.dot(fi)).1;
    dxs[L_VDFI] = pure_lag(alpha, xs[L_VDFI], v.dot(dfi)).1;
    dxs[L_DFVDFI] = pure_lag(alpha, xs[L_DFVDFI], dfv.dot(dfi)).1;
    dxs[L_IDFI] = pure_lag(alpha, xs[L_IDFI], i.dot(dfi)).1;
    dxs[L_DFI2] = pure_lag(alpha, xs[L_DFI2], dfi.dot(dfi)).1;
}

/// Assemble z and phi for one chain from its filter states and the measured
/// current (the regression sees voltage only through the filtered states).
pub fn chain_outputs(alpha: f64, kn: &ElectricalKnowns, i: Vec2, xs: &[f64]) -> ChainOutputs {
    let beta = kn.beta;
    let b2 = beta * beta;
    let ls = kn.ls;
    let sigma = kn.sigma;
    let rs = kn.rs;

    let fi = Vec2::new(xs[XFI], xs[XFI + 1]);
    let fv = Vec2::new(xs[XFV], xs[XFV + 1]);
    let dfi = (i - fi) * alpha;

    let rho1 = (fi * (-rs) - dfi * (sigma * ls) + fv) * (2.0 / beta);

    let mu1 = (2.0 / b2) * (xs[L_IFV] + xs[L_VFI]);
    let mu2 = (2.0 * ls / (alpha * b2)) * fv.dot(dfi)
        + (2.0 * ls / b2) * (xs[L_VDFI] - xs[L_DFVDFI] / alpha);
    let mu3 = -(2.0 / b2) * xs[L_IFI];
    let mu4 = -(2.0 * ls / b2) * xs[L_IDFI]
        + (2.0 * ls / (alpha * b2)) * (-fi.dot(dfi) + xs[L_DFI2]);
    let d2 = dfi.dot(dfi);
    let mu5 = (2.0 * ls * ls / (alpha * b2)) * (-d2 + 0.5 * (d2 - alpha * xs[L_DFI2]));

    let rho2 = -(2.0 / b2) * xs[L_VFV]
        + rs * mu1
        + sigma * mu2
        + rs * rs * mu3
        + rs * sigma * mu4
        + sigma * sigma * mu5;

    let rho3 = (rs / beta) * xs[L_IFI] - (1.0 / beta) * xs[L_VFI]
        + (ls * sigma / (alpha * beta)) * (fi.dot(dfi) - xs[L_DFI2]);

    let two_over_alpha_lr = 2.0 / (alpha * kn.lr);
    let phi = [
        two_over_alpha_lr * rho2 + 2.0 * beta * rho3,
        -rho1.a,
        -rho1.b,
        two_over_alpha_lr * rho1.a + 2.0 * beta * fi.a,
        two_over_alpha_lr * rho1.b + 2.0 * beta * fi.b,
        -2.0 / kn.lr,
    ];
    ChainOutputs {
        rho1,
        rho2,
        rho3,
        z: rho2,
        phi,
    }
}

/// The six-chain bank with its stacked regression.
#[derive(Debug, Clone)]
pub struct ElectricalBank {
    pub alphas: [f64; N_CHAINS],
    pub knowns: ElectricalKnowns,
}

/// Stacked system z6 = Phi * Theta and its mixed form.
#[derive(Debug, Clone, Copy)]
pub struct ElectricalRegression {
    pub z6: [f64; N_CHAINS],
    pub phi: Mat<N_CHAINS>,
    pub zeta_e: [f64; N_CHAINS],
    pub delta_e: f64,
}

impl ElectricalBank {
    pub fn new(alphas: [f64; N_CHAINS], knowns: ElectricalKnowns) -> Self {
        ElectricalBank { alphas, knowns }
    }

    pub const STATES: usize = CHAIN_STATES * N_CHAINS;

    /// Fill all chain state derivatives; `xs`/`dxs` hold the bank's states.
    pub fn derivative(&self, i: Vec2, v: Vec2, xs: &[f64], dxs: &mut [f64]) {
        for (k, &alpha) in self.alphas.iter().enumerate() {
            let o = k * CHAIN_STATES;
            chain_derivative(alpha, i, v, &xs[o..o + CHAIN_STATES], &mut dxs[o..o + CHAIN_STATES]);
        }
    }

    /// Stack the six scalar regressions into z6 = Phi * Theta.
    pub fn stacked(&self, i: Vec2, xs: &[f64]) -> ([f64; N_CHAINS], Mat<N_CHAINS>) {
        let mut z6 = [0.0; N_CHAINS];
        let mut phi = [[0.0; N_CHAINS]; N_CHAINS];
        for (k, &alpha) in self.alphas.iter().enumerate() {
            let o = k * CHAIN_STATES;
            let out = chain_outputs(alpha, &self.knowns, i, &xs[o..o + CHAIN_STATES]);
            z6[k] = out.z;
            phi[k] = out.phi;
        }
        (z6, phi)
    }

    /// Stack and mix: zeta_e = adj(Phi) z6, Delta_e = det(Phi).
    pub fn regression(&self, i: Vec2, xs: &[f64]) -> ElectricalRegression {
        let (z6, phi) = self.stacked(i, xs);
        let (zeta_e, delta_e) = linalg::mix(&phi, &z6);
        ElectricalRegression {
            z6,
            phi,
            zeta_e,
            delta_e,
        }
    }
}

/// Ground-truth value of the stacked unknown vector
/// Theta = (Rr, lambda, Rr*lambda, Rr*|lambda|^2).
///
/// Consumed only by telemetry and tests; the regression itself never sees it.
pub fn electrical_theta(rr: f64, lambda: Vec2) -> [f64; 6] {
    [
        rr,
        lambda.a,
        lambda.b,
        rr * lambda.a,
        rr * lambda.b,
        rr * lambda.norm_sq(),
    ]
}
