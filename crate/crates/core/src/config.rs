//! Run configuration, stored as TOML.
//!
//! Every key carries its unit in the name. Unknown keys are rejected so a
//! misspelled unit suffix fails loudly instead of silently taking a default.
//!
//! ```toml
//! [nlf]
//! length_m = 300.0
//! lambda_ref_nm = 1547.0
//! beta2_ps2_per_m = 0.0
//!
//! [smf1]
//! length_m = 3.0
//! lambda_ref_nm = 1547.5
//! beta2_ps2_per_m = -0.02175
//! # smf2 likewise
//!
//! [loop]
//! coupler_ratio = 0.5
//! phi_p1_rad = 0.0
//! phi_p2_rad = 0.0
//!
//! [spectral]
//! lambda_p0_nm = 1547.5
//! pump_pulse_width_ps = 4.0
//! pump_filter_fwhm_nm = 0.9
//! signal_filter_fwhm_nm = 0.7
//! idler_filter_fwhm_nm = 0.7
//! split_idler_filter_fwhm_nm = 1.3
//! filter_shape = "rectangular"
//! alpha_ps2 = 0.0435
//! xi_same_per_s = 29.5
//! xi_diff_per_s = 32.3
//! quadrature_order = 16
//!
//! [source]
//! mu_per_gate = 0.004
//! pump_power_mw = 0.23
//! power_ref_mw = 0.23
//! gate_rate_hz = 3.1e6
//! rep_divisor = 8
//!
//! [spd1]
//! efficiency = 0.1
//! dark_prob_per_gate = 5e-5
//! gate_width_ns = 2.5
//! dead_time_us = 10.0
//! # spd2, spd3 likewise
//!
//! [run]
//! seed = 20100601
//! n_gates = 3100000
//! grid_start_nm = 4.0
//! grid_stop_nm = 20.0
//! grid_step_nm = 0.2
//! averaged_routing = true
//! delta_lambda_nm = 10.75
//! ```
//!
//! Optional keys: `beta1_ps_per_m` and `beta3_ps3_per_m` (default 0) in the
//! fiber sections, `output_path` in `[run]`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::{DetectorSpec, SourceSpec};
use crate::dispersion::{FiberSpec, LoopConfig};
use crate::spectral::{FilterShape, FilterSpec, SpectralConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("config parse error: {0}")]
    Parse(String),

    /// A value parsed but is out of range; the message names the key.
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSection {
    pub length_m: f64,
    pub lambda_ref_nm: f64,
    #[serde(default)]
    pub beta1_ps_per_m: f64,
    pub beta2_ps2_per_m: f64,
    #[serde(default)]
    pub beta3_ps3_per_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSection {
    pub coupler_ratio: f64,
    pub phi_p1_rad: f64,
    pub phi_p2_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSection {
    pub lambda_p0_nm: f64,
    /// Recorded for reference; the model works from the filter widths.
    pub pump_pulse_width_ps: f64,
    pub pump_filter_fwhm_nm: f64,
    pub signal_filter_fwhm_nm: f64,
    pub idler_filter_fwhm_nm: f64,
    pub split_idler_filter_fwhm_nm: f64,
    #[serde(default)]
    pub filter_shape: FilterShape,
    pub alpha_ps2: f64,
    pub xi_same_per_s: f64,
    pub xi_diff_per_s: f64,
    pub quadrature_order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub mu_per_gate: f64,
    pub pump_power_mw: f64,
    pub power_ref_mw: f64,
    pub gate_rate_hz: f64,
    pub rep_divisor: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub efficiency: f64,
    pub dark_prob_per_gate: f64,
    pub gate_width_ns: f64,
    pub dead_time_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub n_gates: u64,
    pub grid_start_nm: f64,
    pub grid_stop_nm: f64,
    pub grid_step_nm: f64,
    /// Route Monte Carlo pairs with the passband-averaged fringe phase.
    pub averaged_routing: bool,
    /// Detuning used by power sweeps.
    pub delta_lambda_nm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub nlf: FiberSection,
    pub smf1: FiberSection,
    pub smf2: FiberSection,
    #[serde(rename = "loop")]
    pub loop_section: LoopSection,
    pub spectral: SpectralSection,
    pub source: SourceSection,
    pub spd1: DetectorSection,
    pub spd2: DetectorSection,
    pub spd3: DetectorSection,
    pub run: RunSection,
}

fn field<T>(section: &str, r: crate::Result<T>) -> Result<T, ConfigError> {
    r.map_err(|e| ConfigError::Invalid(format!("[{section}] {e}")))
}

impl FiberSection {
    fn to_spec(&self, section: &str) -> Result<FiberSpec, ConfigError> {
        let spec = FiberSpec {
            length: self.length_m,
            lambda_ref: self.lambda_ref_nm,
            beta1: self.beta1_ps_per_m,
            beta2: self.beta2_ps2_per_m,
            beta3: self.beta3_ps3_per_m,
        };
        field(section, spec.validate())?;
        Ok(spec)
    }
}

impl DetectorSection {
    fn to_spec(&self, section: &str) -> Result<DetectorSpec, ConfigError> {
        let spec = DetectorSpec {
            efficiency: self.efficiency,
            dark_prob: self.dark_prob_per_gate,
            gate_width_ns: self.gate_width_ns,
            dead_time_us: self.dead_time_us,
        };
        field(section, spec.validate())?;
        Ok(spec)
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config fields are all representable in TOML")
    }

    /// Checks every section by building the domain types.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.loop_config()?;
        self.spectral_config()?;
        self.source_spec()?;
        self.detectors()?;
        let r = &self.run;
        if r.n_gates == 0 {
            return Err(ConfigError::Invalid("[run] n_gates must be > 0".into()));
        }
        for (name, v) in [
            ("grid_start_nm", r.grid_start_nm),
            ("grid_stop_nm", r.grid_stop_nm),
            ("grid_step_nm", r.grid_step_nm),
            ("delta_lambda_nm", r.delta_lambda_nm),
        ] {
            if !v.is_finite() {
                return Err(ConfigError::Invalid(format!("[run] {name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn loop_config(&self) -> Result<LoopConfig, ConfigError> {
        let l = &self.loop_section;
        let cfg = LoopConfig {
            nlf: self.nlf.to_spec("nlf")?,
            smf1: self.smf1.to_spec("smf1")?,
            smf2: self.smf2.to_spec("smf2")?,
            coupler_ratio: l.coupler_ratio,
            phi_p1: l.phi_p1_rad,
            phi_p2: l.phi_p2_rad,
        };
        field("loop", cfg.validate())?;
        Ok(cfg)
    }

    /// Signal and idler filter centers are placeholders at the pump: the
    /// model retunes them to every detuning.
    pub fn spectral_config(&self) -> Result<SpectralConfig, ConfigError> {
        let s = &self.spectral;
        let band = |fwhm| FilterSpec {
            center: s.lambda_p0_nm,
            fwhm,
            shape: s.filter_shape,
        };
        let cfg = SpectralConfig {
            lambda_p0: s.lambda_p0_nm,
            pump_filter: band(s.pump_filter_fwhm_nm),
            signal_filter: band(s.signal_filter_fwhm_nm),
            idler_filter: band(s.idler_filter_fwhm_nm),
            split_idler_filter: band(s.split_idler_filter_fwhm_nm),
            alpha: s.alpha_ps2,
            xi_same: s.xi_same_per_s,
            xi_diff: s.xi_diff_per_s,
            quadrature_order: s.quadrature_order,
        };
        field("spectral", cfg.validate())?;
        if !(s.pump_pulse_width_ps.is_finite() && s.pump_pulse_width_ps > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "[spectral] pump_pulse_width_ps must be > 0, got {}",
                s.pump_pulse_width_ps
            )));
        }
        Ok(cfg)
    }

    pub fn source_spec(&self) -> Result<SourceSpec, ConfigError> {
        let s = &self.source;
        let spec = SourceSpec {
            mu: s.mu_per_gate,
            pump_power_mw: s.pump_power_mw,
            power_ref_mw: s.power_ref_mw,
            gate_rate_hz: s.gate_rate_hz,
            rep_divisor: s.rep_divisor,
        };
        field("source", spec.validate())?;
        Ok(spec)
    }

    pub fn detectors(&self) -> Result<[DetectorSpec; 3], ConfigError> {
        Ok([
            self.spd1.to_spec("spd1")?,
            self.spd2.to_spec("spd2")?,
            self.spd3.to_spec("spd3")?,
        ])
    }
}
