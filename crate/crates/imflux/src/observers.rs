//! Estimation laws driven by the mixed regressions, plus excitation monitors.
//!
//! Every estimator is a plain gradient law on a scalar regression
//! zeta = Delta * theta: d/dt(est) = gamma * Delta * (zeta - est * Delta),
//! so each error obeys err_dot = -gamma * Delta^2 * err (plus the decaying
//! filter-IC transient), giving the closed form
//! |err(t)| = exp(-gamma * int Delta^2) * |err(0)|. No projection, dead zone,
//! or normalization is applied; the laws run exactly as written.
//!
//! The flux observer integrates the measurable combination of the stator
//! equation (chi_dot = v/beta - (Rs/beta) i) and reconstructs
//! lambda_hat = -(sigma Ls / beta) i + chi, with the same gradient correction
//! on top. With zero correction (Delta_e = 0) it is an exact open-loop flux
//! integrator: the error stays frozen, never growing — which is precisely why
//! poor excitation leaves the initial error in place.

use serde::{Deserialize, Serialize};

use crate::mechanical::MechanicalKnowns;
use crate::motor::ElectricalKnowns;
use crate::vec2::Vec2;

/// Gradient gains for the four estimation laws.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ObserverGains {
    pub gamma_lambda: f64,
    pub gamma_r: f64,
    pub gamma_omega: f64,
    pub gamma_t: f64,
}

impl Default for ObserverGains {
    fn default() -> Self {
        ObserverGains {
            gamma_lambda: 1e-3,
            gamma_r: 1e-4,
            gamma_omega: 1e6,
            gamma_t: 1e6,
        }
    }
}

/// Flux estimate from the observer state chi and the measured current.
#[inline]
pub fn lambda_hat(chi: Vec2, i: Vec2, kn: &ElectricalKnowns) -> Vec2 {
    chi - i * (kn.sigma * kn.ls / kn.beta)
}

/// chi derivative: copy dynamics plus the gradient correction on the
/// flux components of the mixed regression (zeta_e components 2-3).
#[inline]
pub fn flux_observer_derivative(
    i: Vec2,
    v: Vec2,
    zeta_e23: Vec2,
    delta_e: f64,
    chi: Vec2,
    kn: &ElectricalKnowns,
    gamma_lambda: f64,
) -> Vec2 {
    let lam_hat = lambda_hat(chi, i, kn);
    (v - i * kn.rs) * (1.0 / kn.beta) + (zeta_e23 - lam_hat * delta_e) * (gamma_lambda * delta_e)
}

/// Rotor-resistance gradient law on zeta_e component 1.
#[inline]
pub fn rr_estimator_derivative(zeta_e1: f64, delta_e: f64, rr_hat: f64, gamma_r: f64) -> f64 {
    gamma_r * delta_e * (zeta_e1 - rr_hat * delta_e)
}

/// Load-torque gradient law on zeta_m component 1.
#[inline]
pub fn tl_estimator_derivative(zeta_m1: f64, delta_m: f64, tl_hat: f64, gamma_t: f64) -> f64 {
    gamma_t * delta_m * (zeta_m1 - tl_hat * delta_m)
}

/// Speed observer: torque balance driven by the estimated load torque, with a
/// gradient correction on zeta_m component 2. `lambda_in`/`i_in` follow the
/// mechanical chain's inputs (true or estimated flux, gated), so ground-truth
/// and certainty-equivalence modes stay separated by construction.
#[inline]
#[allow(clippy::too_many_arguments)]
pub fn speed_observer_derivative(
    zeta_m2: f64,
    delta_m: f64,
    tl_hat: f64,
    omega_hat: f64,
    lambda_in: Vec2,
    i_in: Vec2,
    kn: &MechanicalKnowns,
    gamma_omega: f64,
) -> f64 {
    -tl_hat / kn.j - (kn.n_p * kn.beta / kn.j) * lambda_in.dot(i_in.perp())
        + gamma_omega * delta_m * (zeta_m2 - omega_hat * delta_m)
}

/// Excitation classification, diagnostic only; never feeds back into the
/// estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExcitationClass {
    /// Energy integral has effectively stopped growing (L2-like or dead).
    Insufficient,
    /// Integral keeps diverging but the windowed energy is fading: enough for
    /// asymptotic convergence, no exponential rate.
    NonL2Trending,
    /// Windowed energy uniformly bounded below: persistent excitation.
    PeLike,
}

impl std::fmt::Display for ExcitationClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExcitationClass::Insufficient => "insufficient",
            ExcitationClass::NonL2Trending => "non-L2-trending",
            ExcitationClass::PeLike => "PE-like",
        })
    }
}

/// Running energy integral of a mixing determinant with windowed diagnostics.
#[derive(Debug, Clone)]
pub struct ExcitationMonitor {
    integral: f64,
    last_sq: f64,
    window: f64,
    pe_threshold: f64,
    growth_threshold: f64,
    /// (t, integral) samples at decimated step boundaries.
    samples: Vec<(f64, f64)>,
}

impl ExcitationMonitor {
    pub fn new(window: f64, pe_threshold: f64, growth_threshold: f64) -> Self {
        ExcitationMonitor {
            integral: 0.0,
            last_sq: 0.0,
            window,
            pe_threshold,
            growth_threshold,
            samples: Vec::new(),
        }
    }

    /// Trapezoidal accumulation of Delta^2 over one step ending with value
    /// `delta`. Call once per integration step, with the gated Delta.
    pub fn accumulate(&mut self, delta: f64, dt: f64) {
        let sq = delta * delta;
        self.integral += 0.5 * (self.last_sq + sq) * dt;
        self.last_sq = sq;
    }

    /// Record a (t, integral) sample; call at telemetry boundaries.
    pub fn record(&mut self, t: f64) {
        self.samples.push((t, self.integral));
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    /// Classify the excitation from the recorded history.
    pub fn classify(&self, start_time: f64) -> ExcitationClass {
        classify_excitation(
            &self.samples,
            self.window,
            self.pe_threshold,
            self.growth_threshold,
            start_time,
        )
    }
}

/// Windowed integral W(t) = I(t) - I(t - window) at sample `idx` of a
/// monotone (t, integral) history.
fn windowed_at(samples: &[(f64, f64)], window: f64, idx: usize) -> f64 {
    let (t, i_now) = samples[idx];
    let t0 = t - window;
    // last sample with time <= t0
    let pos = samples.partition_point(|&(ts, _)| ts <= t0);
    if pos == 0 {
        return i_now - samples[0].1;
    }
    i_now - samples[pos - 1].1
}

/// Classify excitation from (t, running integral of Delta^2) samples.
///
/// Decision ladder over the windowed energy W(t), evaluated from `start_time`
/// (observer enable) plus one window onward:
/// - final W below the growth floor: insufficient;
/// - W decaying faster than ~1/t (log-log slope <= -1.1): the energy
///   integral is converging, insufficient;
/// - W roughly flat (slope >= -0.5) and uniformly above the PE floor:
///   PE-like;
/// - otherwise: integral still diverging without a PE bound, non-L2-trending.
///
/// Works equally on a live monitor's history and on telemetry integral
/// columns, so post-hoc checks reproduce the in-run classification exactly.
pub fn classify_excitation(
    samples: &[(f64, f64)],
    window: f64,
    pe_threshold: f64,
    growth_threshold: f64,
    start_time: f64,
) -> ExcitationClass {
    let t0 = start_time + window;
    let first = samples.partition_point(|&(ts, _)| ts < t0);
    if first >= samples.len() {
        return ExcitationClass::Insufficient;
    }
    let last = samples.len() - 1;
    let w_end = windowed_at(samples, window, last);
    if w_end < growth_threshold {
        return ExcitationClass::Insufficient;
    }
    let t_first = samples[first].0;
    let t_end = samples[last].0;
    let t_mid = 0.5 * (t_first + t_end);
    let mid = samples.partition_point(|&(ts, _)| ts < t_mid).min(last);
    let w_mid = windowed_at(samples, window, mid.max(first));
    let slope = if w_mid <= 0.0 {
        f64::INFINITY
    } else if samples[mid].0 >= t_end {
        0.0
    } else {
        (w_end / w_mid).ln() / (t_end / samples[mid].0).ln()
    };
    if slope <= -1.1 {
        return ExcitationClass::Insufficient;
    }
    let mut w_min = f64::INFINITY;
    for idx in first..=last {
        w_min = w_min.min(windowed_at(samples, window, idx));
    }
    if w_min >= pe_threshold && slope >= -0.5 {
        ExcitationClass::PeLike
    } else {
        ExcitationClass::NonL2Trending
    }
}
