//! Flat key = value configuration files with command-line overrides.
//!
//! A config is a plain text file of `key = value` lines; `#` starts a
//! comment. `--set key=value` flags override file entries. Every typed
//! accessor reports the offending key on failure, so config errors always
//! name a field.

use spinpulse::four_level::{angular_frequency_per_tesla, HBAR_EV_S};
use spinpulse::pulse::AngleProfile;
use spinpulse::sech::SechPulseParams;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Parsed key-value store. Keys are case-sensitive.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str_content(&text)
    }

    pub fn from_str_content(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(RunConfig { entries })
    }

    /// Apply `--set key=value` overrides.
    pub fn apply_overrides(&mut self, sets: &[String]) -> Result<(), ConfigError> {
        for s in sets {
            let Some((key, value)) = s.split_once('=') else {
                return err(format!("--set expects key=value, got `{s}`"));
            };
            self.entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(())
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get_str(&self, key: &str) -> Result<&str, ConfigError> {
        match self.entries.get(key) {
            Some(v) => Ok(v.as_str()),
            None => err(format!("missing key `{key}`")),
        }
    }

    pub fn get_f64(&self, key: &str) -> Result<f64, ConfigError> {
        let raw = self.get_str(key)?;
        raw.parse::<f64>()
            .map_err(|_| ConfigError(format!("key `{key}`: `{raw}` is not a number")))
    }

    pub fn get_f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        if self.has(key) {
            self.get_f64(key)
        } else {
            Ok(default)
        }
    }

    pub fn get_usize(&self, key: &str) -> Result<usize, ConfigError> {
        let raw = self.get_str(key)?;
        raw.parse::<usize>()
            .map_err(|_| ConfigError(format!("key `{key}`: `{raw}` is not a positive integer")))
    }

    pub fn out_path(&self) -> Option<&str> {
        self.entries.get("out").map(|s| s.as_str())
    }

    /// Time grid in nanoseconds: t_start, t_end, samples (≥ 2).
    pub fn time_grid(&self) -> Result<Vec<f64>, ConfigError> {
        let t_start = self.get_f64("t_start")?;
        let t_end = self.get_f64("t_end")?;
        let samples = self.get_usize("samples")?;
        if samples < 2 {
            return err("key `samples`: need at least 2");
        }
        if !t_start.is_finite() || !t_end.is_finite() || t_end <= t_start {
            return err("keys `t_start`/`t_end`: t_end must exceed t_start");
        }
        Ok(linspace(t_start, t_end, samples))
    }

    /// Pulse parameters from either the dimensionless block
    /// (a_over_omega, c_over_omega) or the laboratory-units block
    /// (J_eV, Bminus_mT); omega_GHz is required either way and exactly one
    /// block must be present.
    pub fn sech_params(&self) -> Result<SechPulseParams, ConfigError> {
        let omega = self.get_f64("omega_GHz")?;
        let dimensionless = self.has("a_over_omega") || self.has("c_over_omega");
        let units = self.has("J_eV") || self.has("Bminus_mT");
        match (dimensionless, units) {
            (true, true) => err(
                "both the dimensionless block (a_over_omega, c_over_omega) and the units block \
                 (J_eV, Bminus_mT) are present; pick one",
            ),
            (false, false) => err(
                "need a_over_omega/c_over_omega or J_eV/Bminus_mT to fix the pulse parameters",
            ),
            (true, false) => {
                let a = self.get_f64("a_over_omega")? * omega;
                let c = self.get_f64("c_over_omega")? * omega;
                SechPulseParams::new(a, c, omega).map_err(|e| ConfigError(e.to_string()))
            }
            (false, true) => {
                let (a, c) = units_to_angular(self.get_f64("J_eV")?, self.get_f64("Bminus_mT")?);
                SechPulseParams::new(a, c, omega).map_err(|e| ConfigError(e.to_string()))
            }
        }
    }

    /// One angle profile from prefixed keys, e.g. `theta_family = sine_interp`
    /// with `theta_v0`, `theta_v1`, `theta_T` (or `theta_rate`, `theta_value`).
    pub fn angle_profile(&self, prefix: &str) -> Result<AngleProfile, ConfigError> {
        let fam_key = format!("{prefix}_family");
        let family = self.get_str(&fam_key)?;
        let sub = |suffix: &str| format!("{prefix}_{suffix}");
        match family {
            "constant" => Ok(AngleProfile::Constant(self.get_f64(&sub("value"))?)),
            "sine_interp" | "sine" => Ok(AngleProfile::SineInterp {
                from: self.get_f64(&sub("v0"))?,
                to: self.get_f64(&sub("v1"))?,
                half_width: positive(self.get_f64(&sub("T"))?, &sub("T"))?,
            }),
            "gauss_deriv" | "gauss" => Ok(AngleProfile::GaussDeriv {
                amplitude: self.get_f64(&sub("v0"))?,
                baseline: self.get_f64(&sub("v1"))?,
                width: positive(self.get_f64(&sub("T"))?, &sub("T"))?,
            }),
            "linear_periodic" | "linear" => Ok(AngleProfile::LinearPeriodic {
                rate: self.get_f64(&sub("rate"))?,
            }),
            other => err(format!(
                "key `{fam_key}`: unknown family `{other}` \
                 (expected constant | sine_interp | gauss_deriv | linear_periodic)"
            )),
        }
    }
}

fn positive(v: f64, key: &str) -> Result<f64, ConfigError> {
    if v > 0.0 {
        Ok(v)
    } else {
        err(format!("key `{key}`: must be positive, got {v}"))
    }
}

/// (a, c) in angular 1/ns from a coupling in eV and a field difference in mT.
pub fn units_to_angular(j_ev: f64, bminus_mt: f64) -> (f64, f64) {
    let a = j_ev / HBAR_EV_S * 1e-9;
    let c = angular_frequency_per_tesla() * bminus_mt * 1e-3;
    (a, c)
}

pub fn linspace(start: f64, stop: f64, samples: usize) -> Vec<f64> {
    if samples == 1 {
        return vec![start];
    }
    (0..samples)
        .map(|k| start + (stop - start) * k as f64 / (samples - 1) as f64)
        .collect()
}
