//! TOML configuration loading.
//!
//! A config file is a flat TOML document with three optional tables:
//! `params` (any subset of model parameter fields by name), `sim`
//! (dt, t_end, history as a 5-array, tail_fraction, conv_tol, osc_tol) and
//! `outputs` (csv, svg, stride). Unspecified fields fall back to the
//! scenario or base defaults; command-line flags override file values.

use std::path::Path;

use anyhow::{bail, Context, Result};
use hiv_dde::dde_sim::SimConfig;
use hiv_dde::model::{Parameters, State};
use hiv_dde::scenario;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub params: ParamsOverride,
    #[serde(default)]
    pub sim: SimOverride,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

macro_rules! params_override {
    ($($field:ident),* $(,)?) => {
        /// Per-field parameter overrides; every field optional.
        #[derive(Debug, Default, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct ParamsOverride {
            $(pub $field: Option<f64>,)*
        }

        impl ParamsOverride {
            pub fn apply(&self, base: &mut Parameters) {
                $(if let Some(v) = self.$field { base.$field = v; })*
            }
        }
    };
}

params_override!(
    lambda, beta1, beta2, rho, m1, m2, alpha, a, k, c, h, eta, mu1, mu2, mu3,
    mu4, mu5, tau1, tau2, tau3,
);

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimOverride {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    /// Constant initial history as `[x, p, y, v, z]`.
    pub history: Option<[f64; 5]>,
    pub tail_fraction: Option<f64>,
    pub conv_tol: Option<f64>,
    pub osc_tol: Option<f64>,
}

impl SimOverride {
    pub fn apply(&self, config: &mut SimConfig) {
        if let Some(v) = self.dt {
            config.dt = v;
        }
        if let Some(v) = self.t_end {
            config.t_end = v;
        }
        if let Some(v) = self.history {
            config.history = State::from_array(v);
        }
        if let Some(v) = self.tail_fraction {
            config.tail_fraction = v;
        }
        if let Some(v) = self.conv_tol {
            config.conv_tol = v;
        }
        if let Some(v) = self.osc_tol {
            config.osc_tol = v;
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default = "default_true")]
    pub csv: bool,
    #[serde(default = "default_true")]
    pub svg: bool,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_true() -> bool {
    true
}

fn default_stride() -> usize {
    10
}

impl Default for OutputsConfig {
    fn default() -> Self {
        Self {
            csv: true,
            svg: true,
            stride: default_stride(),
        }
    }
}

/// Loads a config file and resolves it against the base parameter set
/// (no scenario) with default simulation settings.
pub fn load_config(path: &Path) -> Result<(Parameters, SimConfig, OutputsConfig)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let file: ConfigFile = toml::from_str(&text)
        .with_context(|| format!("cannot parse config file {}", path.display()))?;
    let mut params = scenario::base_parameters();
    file.params.apply(&mut params);
    let report = params.validate();
    if !report.violations.is_empty() {
        bail!(
            "invalid parameters in {}:\n  {}",
            path.display(),
            report.violations.join("\n  ")
        );
    }
    let mut sim = SimConfig::with_defaults(&params, scenario::DEFAULT_HISTORY, 2000.0);
    file.sim.apply(&mut sim);
    sim.validate(&params)
        .map_err(|e| anyhow::anyhow!("invalid [sim] section in {}: {e}", path.display()))?;
    Ok((params, sim, file.outputs))
}
