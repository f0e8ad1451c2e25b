//! Run configuration files.
//!
//! A config is a TOML document with `[params]`, optional `[polarization]`
//! and `[env]`, `[task]` and, for sweeps, `[sweep]`. Every key has a default
//! (the reference parameter set, a spectrum task), so an empty file is a
//! valid config. Unknown keys are rejected.

use nsit_core::analysis::{FeatureKind, Mode, SweepVariable};
use nsit_core::doppler::{ATOMIC_MASS_UNIT, DEFAULT_QUAD_ORDER, MIN_QUAD_ORDER};
use nsit_core::{DopplerEnv, NsitError, PolarizationState, SystemParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub gamma_e: f64,
    pub gamma_s: f64,
    pub gamma_k: f64,
    /// |Ω|.
    pub omega_c_rabi: f64,
    /// arg Ω in radians.
    pub omega_c_phase: f64,
    pub omega_p_rabi: f64,
    pub j_exchange: f64,
    pub gyro_s: f64,
    pub gyro_k: f64,
    pub b_tilde: f64,
    pub eta: f64,
    pub gamma0_hz: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self::from_params(&SystemParams::reference())
    }
}

impl ParamsSection {
    pub fn from_params(p: &SystemParams) -> Self {
        Self {
            gamma_e: p.gamma_e,
            gamma_s: p.gamma_s,
            gamma_k: p.gamma_k,
            omega_c_rabi: p.omega_c_rabi.norm(),
            omega_c_phase: p.omega_c_rabi.arg(),
            omega_p_rabi: p.omega_p_rabi,
            j_exchange: p.j_exchange,
            gyro_s: p.gyro_s,
            gyro_k: p.gyro_k,
            b_tilde: p.b_tilde,
            eta: p.eta,
            gamma0_hz: p.gamma0_hz,
        }
    }

    pub fn to_params(&self) -> SystemParams {
        SystemParams {
            gamma_e: self.gamma_e,
            gamma_s: self.gamma_s,
            gamma_k: self.gamma_k,
            omega_c_rabi: Complex64::from_polar(self.omega_c_rabi, self.omega_c_phase),
            omega_p_rabi: self.omega_p_rabi,
            j_exchange: self.j_exchange,
            gyro_s: self.gyro_s,
            gyro_k: self.gyro_k,
            b_tilde: self.b_tilde,
            eta: self.eta,
            gamma0_hz: self.gamma0_hz,
            source_scale: 1.0,
        }
    }
}

/// Polarization degrees; `j_exchange` in `[params]` is the fully polarized rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolarizationSection {
    pub p_a: f64,
    pub p_b: f64,
}

impl Default for PolarizationSection {
    fn default() -> Self {
        Self { p_a: 1.0, p_b: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSection {
    /// Kelvin.
    pub temperature: f64,
    /// Atomic mass units.
    pub atomic_mass: f64,
    pub probe_frequency_hz: f64,
    pub control_frequency_hz: f64,
    pub quad_order: usize,
}

impl Default for EnvSection {
    fn default() -> Self {
        let rb = DopplerEnv::rubidium87();
        Self {
            temperature: rb.temperature,
            atomic_mass: rb.atomic_mass / ATOMIC_MASS_UNIT,
            probe_frequency_hz: rb.omega_p_abs,
            control_frequency_hz: rb.omega_c_abs,
            quad_order: DEFAULT_QUAD_ORDER,
        }
    }
}

impl EnvSection {
    pub fn to_env(&self) -> DopplerEnv {
        DopplerEnv::new(
            self.temperature,
            self.atomic_mass * ATOMIC_MASS_UNIT,
            self.probe_frequency_hz,
            self.control_frequency_hz,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Spectrum,
    Sweep,
    Phase,
    Slopes,
    OracleCheck,
    DopplerCompare,
}

impl TaskKind {
    pub fn label(self) -> &'static str {
        match self {
            TaskKind::Spectrum => "spectrum",
            TaskKind::Sweep => "sweep",
            TaskKind::Phase => "phase",
            TaskKind::Slopes => "slopes",
            TaskKind::OracleCheck => "oracle-check",
            TaskKind::DopplerCompare => "doppler-compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Exact,
    Decomposed,
    Doppler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskSection {
    pub kind: TaskKind,
    pub mode: ModeKind,
    /// Detuning window [lo, hi] in units of Γ₀. Defaults depend on the task.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    pub normalized: bool,
    /// Output file stem. Defaults to the task name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub format: Format,
    /// Detunings compared by the oracle check.
    pub oracle_points: usize,
    /// Also write the time series of the first oracle point.
    pub trajectory: bool,
}

impl Default for TaskSection {
    fn default() -> Self {
        Self {
            kind: TaskKind::Spectrum,
            mode: ModeKind::Exact,
            window: None,
            normalized: true,
            output: None,
            format: Format::Csv,
            oracle_points: 9,
            trajectory: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    J,
    BTilde,
    Omega,
}

impl From<SweepVar> for SweepVariable {
    fn from(v: SweepVar) -> Self {
        match v {
            SweepVar::J => SweepVariable::J,
            SweepVar::BTilde => SweepVariable::BTilde,
            SweepVar::Omega => SweepVariable::Omega,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSel {
    Background,
    Eit,
    Nsia,
    Nsit,
}

impl From<FeatureSel> for FeatureKind {
    fn from(f: FeatureSel) -> Self {
        match f {
            FeatureSel::Background => FeatureKind::Background,
            FeatureSel::Eit => FeatureKind::Eit,
            FeatureSel::Nsia => FeatureKind::Nsia,
            FeatureSel::Nsit => FeatureKind::Nsit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVar,
    pub values: Vec<f64>,
    #[serde(default = "default_feature")]
    pub feature: FeatureSel,
}

fn default_feature() -> FeatureSel {
    FeatureSel::Nsia
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polarization: Option<PolarizationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env: Option<EnvSection>,
    pub task: TaskSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl RunConfig {
    /// Parameters seen by the model, with the polarization applied.
    pub fn system_params(&self) -> SystemParams {
        let p = self.params.to_params();
        nsit_core::effective_params(&p, &self.polarization_state())
    }

    pub fn polarization_state(&self) -> PolarizationState {
        let pol = self.polarization.clone().unwrap_or_default();
        PolarizationState {
            p_a: pol.p_a,
            p_b: pol.p_b,
            j_full: self.params.j_exchange,
        }
    }

    pub fn mode(&self) -> Mode {
        match self.task.mode {
            ModeKind::Exact => Mode::Exact,
            ModeKind::Decomposed => Mode::Decomposed,
            ModeKind::Doppler => {
                let env = self.env.clone().unwrap_or_default();
                Mode::Doppler {
                    env: env.to_env(),
                    quad_order: env.quad_order,
                }
            }
        }
    }

    pub fn output_stem(&self) -> String {
        self.task.output.clone().unwrap_or_else(|| self.task.kind.label().to_string())
    }

    /// Checks every invariant. Returns warnings on success and the full list
    /// of violations otherwise.
    pub fn validate(&self) -> Result<Vec<String>, CliError> {
        let mut errs = Vec::new();
        let mut warnings = Vec::new();
        let absorb = |r: nsit_core::Result<()>, prefix: &str, errs: &mut Vec<String>| {
            if let Err(NsitError::InvalidParams(v) | NsitError::InvalidEnv(v)) = r {
                errs.extend(v.into_iter().map(|e| format!("{prefix}: {e}")));
            } else if let Err(e) = r {
                errs.push(format!("{prefix}: {e}"));
            }
        };
        let params = self.params.to_params();
        match params.validate() {
            Ok(w) => warnings.extend(w),
            Err(e) => absorb(Err(e), "params", &mut errs),
        }
        if !(self.params.omega_c_rabi >= 0.0) {
            errs.push(format!("params: omega_c_rabi is a magnitude and must be >= 0 (got {})", self.params.omega_c_rabi));
        }
        absorb(self.polarization_state().validate(), "polarization", &mut errs);

        let needs_env = self.task.mode == ModeKind::Doppler || self.task.kind == TaskKind::DopplerCompare;
        match &self.env {
            Some(env) => {
                absorb(env.to_env().validate(), "env", &mut errs);
                if env.quad_order < MIN_QUAD_ORDER {
                    errs.push(format!("env: quad_order must be >= {MIN_QUAD_ORDER} (got {})", env.quad_order));
                }
            }
            None if needs_env => errs.push(format!(
                "env: section [env] is required for task {} with mode {:?}",
                self.task.kind.label(),
                self.task.mode
            )),
            None => {}
        }

        if let Some([lo, hi]) = self.task.window {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                errs.push(format!("task: window must satisfy lo < hi (got [{lo}, {hi}])"));
            }
        }
        if let Some(stem) = &self.task.output {
            if stem.is_empty() || stem.contains(['/', '\\']) {
                errs.push(format!("task: output must be a plain file stem (got {stem:?})"));
            }
        }
        if self.task.kind == TaskKind::OracleCheck && self.task.oracle_points == 0 {
            errs.push("task: oracle_points must be >= 1".to_string());
        }
        match (&self.sweep, self.task.kind) {
            (None, TaskKind::Sweep) => errs.push("sweep: section [sweep] is required for task sweep".to_string()),
            (Some(s), _) => {
                if s.values.is_empty() {
                    errs.push("sweep: values must not be empty".to_string());
                }
                if let Some(v) = s.values.iter().find(|v| !v.is_finite()) {
                    errs.push(format!("sweep: values must be finite (got {v})"));
                }
                if matches!(s.variable, SweepVar::J | SweepVar::Omega) {
                    if let Some(v) = s.values.iter().find(|v| **v < 0.0) {
                        errs.push(format!("sweep: {:?} values must be >= 0 (got {v})", s.variable));
                    }
                }
            }
            (None, _) => {}
        }

        if errs.is_empty() {
            Ok(warnings)
        } else {
            Err(CliError::Validation(errs))
        }
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
    cfg.validate()?;
    Ok(cfg)
}

fn parse_error(text: &str, e: &toml::de::Error) -> CliError {
    let (line, column) = match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            (Some(line), Some(column))
        }
        None => (None, None),
    };
    CliError::Parse {
        line,
        column,
        message: e.message().trim().to_string(),
    }
}

/// Re-reads the `config` object stored in an output's metadata.
pub fn config_from_metadata(meta: &serde_json::Value) -> Result<RunConfig, CliError> {
    let cfg = meta
        .get("config")
        .ok_or_else(|| CliError::Validation(vec!["metadata has no config block".to_string()]))?;
    let cfg: RunConfig = serde_json::from_value(cfg.clone()).map_err(|e| CliError::Parse {
        line: None,
        column: None,
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_reference_defaults() {
        let cfg = parse_config("[params]\ngamma_e = 1000.0\nomega_c_rabi = 0.1\nj_exchange = 1e-6\n").unwrap();
        assert_eq!(cfg.system_params(), SystemParams::reference());
        assert_eq!(cfg.task.kind, TaskKind::Spectrum);
        assert_eq!(cfg.output_stem(), "spectrum");
    }

    #[test]
    fn empty_document_is_valid() {
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
    }

    #[test]
    fn negative_relaxation_rejected() {
        match parse_config("[params]\ngamma_k = -1e-10\n") {
            Err(CliError::Validation(v)) => assert!(v.iter().any(|e| e.contains("gamma_k")), "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_needs_its_section() {
        match parse_config("[task]\nkind = \"sweep\"\n") {
            Err(CliError::Validation(v)) => assert!(v.iter().any(|e| e.starts_with("sweep:")), "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn every_violation_is_listed() {
        let text = "[params]\ngamma_k = -1.0\ngamma_s = -1.0\n[task]\nkind = \"doppler-compare\"\nwindow = [1.0, -1.0]\n";
        match parse_config(text) {
            Err(CliError::Validation(v)) => assert!(v.len() >= 4, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_reports_position() {
        match parse_config("[params]\ngamma_e = 1000.0\ngamma_x = 3\n") {
            Err(CliError::Parse { line, message, .. }) => {
                assert_eq!(line, Some(3));
                assert!(message.contains("gamma_x"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn polarization_scales_exchange_and_source() {
        let cfg = parse_config("[polarization]\np_a = 1.0\np_b = 0.25\n").unwrap();
        let p = cfg.system_params();
        assert!((p.j_exchange - 0.5e-6).abs() < 1e-20);
        assert_eq!(p.source_scale, 1.0);
    }

    #[test]
    fn serialized_config_round_trips() {
        let text = "[params]\nb_tilde = 1e-6\nomega_c_phase = 0.3\n[env]\ntemperature = 400.0\n[task]\nkind = \"sweep\"\nmode = \"doppler\"\nwindow = [-1.0, 1.0]\n[sweep]\nvariable = \"j\"\nvalues = [1e-7, 2e-7]\n";
        let cfg = parse_config(text).unwrap();
        let meta = serde_json::json!({ "config": serde_json::to_value(&cfg).unwrap() });
        assert_eq!(config_from_metadata(&meta).unwrap(), cfg);
        let again = toml::to_string(&cfg).unwrap();
        assert_eq!(parse_config(&again).unwrap(), cfg);
    }
}
