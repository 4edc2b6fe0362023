//! Scenario configuration: TOML with full defaults, dotted-key overrides, and
//! exhaustive validation.
//!
//! Every field has a default so an empty config runs the canonical scenario.
//! Unknown keys are rejected everywhere (typos in gain names must not pass
//! silently). Validation collects every violation instead of stopping at the
//! first.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controller::ControllerConfig;
use crate::error::{Error, Result};
use crate::motor::MotorParams;
use crate::observers::ObserverGains;

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub motor: MotorParams,
    pub controller: ControllerConfig,
    pub initial: InitialConditions,
    pub regression: RegressionConfig,
    pub observer: ObserverConfig,
    pub excitation: ExcitationConfig,
    pub sim: SimConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConditions {
    /// Rotor flux (Wb).
    pub lambda: [f64; 2],
    /// Stator current (A).
    pub i: [f64; 2],
    /// Rotor speed (rad/s).
    pub omega: f64,
    /// Rotor angle (rad). Accepted for scenario-file compatibility and
    /// ignored: the fixed-frame model carries no rotor-angle state.
    pub theta: f64,
}

impl Default for InitialConditions {
    fn default() -> Self {
        InitialConditions {
            lambda: [0.02, 0.0],
            i: [0.0, 0.0],
            omega: 0.0,
            theta: -3.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegressionConfig {
    /// Electrical chain filter poles (rad/s); exactly six distinct values.
    pub alphas: Vec<f64>,
    /// Mechanical chain filter pole (rad/s).
    pub a: f64,
    /// Uniform initial value for every regression filter state. Nonzero
    /// values exercise robustness to the decaying filter-IC transient.
    pub filter_ic: f64,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        RegressionConfig {
            alphas: vec![10.0, 20.0, 30.0, 40.0, 50.0, 100.0],
            a: 50.0,
            filter_ic: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObserverMode {
    /// Mechanical chain consumes true flux and rotor resistance.
    GroundTruth,
    /// Mechanical chain consumes the flux observer's and resistance
    /// estimator's outputs instead; convergence here is measured, not
    /// guaranteed.
    CertaintyEquivalence,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObserverConfig {
    pub mode: ObserverMode,
    /// Time at which the estimation laws start receiving the mixed
    /// regressions; before this every observer input is held at zero. The
    /// electrical filter chains themselves run from t = 0.
    pub enable_time: f64,
    pub gamma_lambda: f64,
    pub gamma_r: f64,
    pub gamma_omega: f64,
    pub gamma_t: f64,
    /// Certainty-equivalence only: the mechanical chain additionally waits
    /// until the electrical excitation integral reaches this level.
    pub ce_excitation_gate: f64,
}

impl Default for ObserverConfig {
    fn default() -> Self {
        let g = ObserverGains::default();
        ObserverConfig {
            mode: ObserverMode::GroundTruth,
            enable_time: 2.0,
            gamma_lambda: g.gamma_lambda,
            gamma_r: g.gamma_r,
            gamma_omega: g.gamma_omega,
            gamma_t: g.gamma_t,
            ce_excitation_gate: 0.0,
        }
    }
}

impl ObserverConfig {
    pub fn gains(&self) -> ObserverGains {
        ObserverGains {
            gamma_lambda: self.gamma_lambda,
            gamma_r: self.gamma_r,
            gamma_omega: self.gamma_omega,
            gamma_t: self.gamma_t,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExcitationConfig {
    /// Sliding window length (s) for the persistence diagnostic.
    pub window: f64,
    /// Windowed-energy floor for the PE-like classification.
    pub pe_threshold: f64,
    /// Final windowed-energy floor below which excitation counts as gone.
    pub growth_threshold: f64,
}

impl Default for ExcitationConfig {
    fn default() -> Self {
        ExcitationConfig {
            window: 1.0,
            pe_threshold: 1e-6,
            growth_threshold: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Fixed integrator step (s).
    pub dt: f64,
    /// Simulated duration (s).
    pub duration: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 2e-5,
            duration: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Log every n-th integration step (plus the final one).
    pub decimation: u64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { decimation: 100 }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<ScenarioConfig> {
        let cfg: ScenarioConfig =
            toml::from_str(s).map_err(|e| Error::ConfigParse(e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<ScenarioConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::ConfigParse(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    /// Serialize the effective config back to TOML.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| Error::ConfigParse(format!("config serialization: {e}")))
    }

    /// Apply `key=value` overrides with dotted paths, e.g.
    /// `observer.gamma_r=2e-4` or `controller.enabled=false`.
    ///
    /// The value is parsed as a TOML literal and falls back to a bare string,
    /// so `observer.mode=certainty-equivalence` works unquoted. The override
    /// is validated against the schema (unknown keys are rejected).
    pub fn apply_overrides(&mut self, sets: &[String]) -> Result<()> {
        if sets.is_empty() {
            return Ok(());
        }
        let mut value = toml::Value::try_from(&*self)
            .map_err(|e| Error::ConfigParse(format!("internal serialization: {e}")))?;
        for set in sets {
            let (path, raw) = set.split_once('=').ok_or_else(|| {
                Error::ConfigParse(format!("override '{set}' is not of the form key=value"))
            })?;
            let leaf = parse_toml_literal(raw);
            insert_at_path(&mut value, path.trim(), leaf)
                .map_err(|msg| Error::ConfigParse(format!("override '{set}': {msg}")))?;
        }
        *self = value
            .try_into()
            .map_err(|e| Error::ConfigParse(format!("after overrides: {e}")))?;
        Ok(())
    }

    /// Collect every config invariant violation.
    pub fn validate_collect(&self) -> Vec<String> {
        let mut errs = self.motor.validate();
        errs.extend(self.controller.validate());

        let r = &self.regression;
        if r.alphas.len() != 6 {
            errs.push(format!(
                "regression.alphas must list exactly 6 poles (the stacked regression is 6x6), got {}",
                r.alphas.len()
            ));
        }
        for (k, &al) in r.alphas.iter().enumerate() {
            if !(al > 0.0 && al.is_finite()) {
                errs.push(format!(
                    "regression.alphas[{k}] must be strictly positive, got {al}"
                ));
            }
        }
        for a in 0..r.alphas.len() {
            for b in (a + 1)..r.alphas.len() {
                if r.alphas[a] == r.alphas[b] {
                    errs.push(format!(
                        "regression.alphas must be distinct; entries {a} and {b} both equal {}",
                        r.alphas[a]
                    ));
                }
            }
        }
        if !(r.a > 0.0 && r.a.is_finite()) {
            errs.push(format!("regression.a must be strictly positive, got {}", r.a));
        }
        if !r.filter_ic.is_finite() {
            errs.push(format!("regression.filter_ic must be finite, got {}", r.filter_ic));
        }

        let o = &self.observer;
        for (name, v) in [
            ("observer.gamma_lambda", o.gamma_lambda),
            ("observer.gamma_r", o.gamma_r),
            ("observer.gamma_omega", o.gamma_omega),
            ("observer.gamma_t", o.gamma_t),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("{name} must be strictly positive, got {v}"));
            }
        }
        if !(o.enable_time >= 0.0 && o.enable_time.is_finite()) {
            errs.push(format!(
                "observer.enable_time must be non-negative, got {}",
                o.enable_time
            ));
        }
        if !(o.ce_excitation_gate >= 0.0 && o.ce_excitation_gate.is_finite()) {
            errs.push(format!(
                "observer.ce_excitation_gate must be non-negative, got {}",
                o.ce_excitation_gate
            ));
        }

        let e = &self.excitation;
        if !(e.window > 0.0 && e.window.is_finite()) {
            errs.push(format!("excitation.window must be positive, got {}", e.window));
        }
        if !(e.pe_threshold >= 0.0 && e.pe_threshold.is_finite()) {
            errs.push(format!(
                "excitation.pe_threshold must be non-negative, got {}",
                e.pe_threshold
            ));
        }
        if !(e.growth_threshold >= 0.0 && e.growth_threshold.is_finite()) {
            errs.push(format!(
                "excitation.growth_threshold must be non-negative, got {}",
                e.growth_threshold
            ));
        }

        let s = &self.sim;
        if !(s.dt > 0.0 && s.dt.is_finite()) {
            errs.push(format!("sim.dt must be strictly positive, got {}", s.dt));
        }
        if !(s.duration > 0.0 && s.duration.is_finite()) {
            errs.push(format!(
                "sim.duration must be strictly positive, got {}",
                s.duration
            ));
        } else if s.dt > 0.0 && (s.duration / s.dt).round() < 1.0 {
            errs.push(format!(
                "sim.duration ({}) must cover at least one step of dt = {}",
                s.duration, s.dt
            ));
        }

        if self.output.decimation == 0 {
            errs.push("output.decimation must be at least 1".into());
        }

        for (name, v) in [
            ("initial.lambda[0]", self.initial.lambda[0]),
            ("initial.lambda[1]", self.initial.lambda[1]),
            ("initial.i[0]", self.initial.i[0]),
            ("initial.i[1]", self.initial.i[1]),
            ("initial.omega", self.initial.omega),
            ("initial.theta", self.initial.theta),
        ] {
            if !v.is_finite() {
                errs.push(format!("{name} must be finite, got {v}"));
            }
        }

        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.validate_collect();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::config(errs))
        }
    }

    /// Number of integration steps, rounding the duration to the step grid.
    pub fn steps(&self) -> u64 {
        (self.sim.duration / self.sim.dt).round() as u64
    }

    /// First step index at which the observers are enabled (may exceed the
    /// step count, in which case they never activate).
    pub fn enable_step(&self) -> u64 {
        (self.observer.enable_time / self.sim.dt).round() as u64
    }
}

fn parse_toml_literal(raw: &str) -> toml::Value {
    let wrapped = format!("v = {}", raw.trim());
    if let Ok(table) = wrapped.parse::<toml::Table>() {
        if let Some(v) = table.get("v") {
            return v.clone();
        }
    }
    toml::Value::String(raw.trim().to_string())
}

fn insert_at_path(
    root: &mut toml::Value,
    path: &str,
    leaf: toml::Value,
) -> std::result::Result<(), String> {
    if path.is_empty() {
        return Err("empty key".into());
    }
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (n, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err("empty path segment".into());
        }
        let table = cur
            .as_table_mut()
            .ok_or_else(|| format!("'{}' is not a table", parts[..n].join(".")))?;
        if n == parts.len() - 1 {
            table.insert(part.to_string(), leaf);
            return Ok(());
        }
        cur = table
            .entry(part.to_string())
            .or_insert(toml::Value::Table(toml::Table::new()));
    }
    unreachable!("loop returns on the last segment");
}
