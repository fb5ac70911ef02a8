//! Run configuration file.
//!
//! One TOML document serves every command; each command reads the sections
//! it needs and the rest fall back to defaults. Unknown keys are errors.
//! A `[simulation]` table without its own `eos` inherits the top-level one.

use mis_core::sampling::SamplingBox;
use mis_core::solver::{InitialCondition, SimConfig};
use mis_core::thermo::EosSpec;
use mis_core::PrimState;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Prefix for output files; defaults to the command name.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub eos: EosSpec,
    #[serde(default)]
    pub sampling: SamplingBox,
    #[serde(default)]
    pub hugoniot: HugoniotConfig,
    #[serde(default)]
    pub simulation: Option<SimConfig>,
    #[serde(default)]
    pub entropy_audit: EntropyAuditConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HugoniotConfig {
    #[serde(default = "reference_state")]
    pub left: PrimState,
    #[serde(default = "acoustic_families")]
    pub families: Vec<usize>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_step_size")]
    pub step_size: f64,
    /// Points up to this amplitude count as weak.
    #[serde(default = "default_weak")]
    pub weak_amplitude: f64,
}

impl Default for HugoniotConfig {
    fn default() -> Self {
        Self {
            left: reference_state(),
            families: acoustic_families(),
            steps: default_steps(),
            step_size: default_step_size(),
            weak_amplitude: default_weak(),
        }
    }
}

fn reference_state() -> PrimState {
    PrimState::at_rest(4.0, 1.0, 0.0)
}

fn acoustic_families() -> Vec<usize> {
    vec![1, 6]
}

fn default_steps() -> usize {
    200
}

fn default_step_size() -> f64 {
    1e-3
}

fn default_weak() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyAuditConfig {
    /// Number of resolutions `N, 2N, 4N, …` for the pointwise audit.
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_t_audit")]
    pub t_audit: f64,
}

impl Default for EntropyAuditConfig {
    fn default() -> Self {
        Self { levels: default_levels(), t_audit: default_t_audit() }
    }
}

fn default_levels() -> usize {
    3
}

fn default_t_audit() -> f64 {
    0.2
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut table: toml::Table = text.parse().map_err(|e| format!("{e}"))?;
        if let (Some(eos), Some(toml::Value::Table(sim))) = (table.get("eos").cloned(), table.get_mut("simulation")) {
            sim.entry("eos").or_insert(eos);
        }
        let config: Self = table.try_into().map_err(|e: toml::de::Error| format!("{e}"))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.eos.build().map_err(|e| e.to_string())?;
        self.sampling.validate().map_err(|e| e.to_string())?;
        if let Some(sim) = &self.simulation {
            sim.validate().map_err(|e| e.to_string())?;
            sim.eos.build().map_err(|e| e.to_string())?;
        }
        let h = &self.hugoniot;
        if h.families.is_empty() || h.families.iter().any(|k| !(1..=6).contains(k)) {
            return Err(format!("hugoniot families must lie in 1..=6, got {:?}", h.families));
        }
        if !(h.step_size > 0.0 && h.step_size.is_finite()) || !(h.weak_amplitude > 0.0) {
            return Err("hugoniot step_size and weak_amplitude must be positive".into());
        }
        if self.entropy_audit.levels < 2 || !(self.entropy_audit.t_audit > 0.0) {
            return Err("entropy_audit needs levels ≥ 2 and t_audit > 0".into());
        }
        if let Some(name) = &self.name {
            if name.is_empty() || name.contains(['/', '\\']) {
                return Err(format!("invalid run name {name:?}"));
            }
        }
        Ok(())
    }

    pub fn name_or<'a>(&'a self, fallback: &'a str) -> &'a str {
        self.name.as_deref().unwrap_or(fallback)
    }

    /// The `[simulation]` table, or a command-specific default that uses
    /// the top-level equation of state.
    pub fn simulation_or(&self, fallback: SimConfig) -> SimConfig {
        self.simulation.clone().unwrap_or(SimConfig { eos: self.eos, ..fallback })
    }

    /// SHA-256 of the canonical TOML rendering of the effective configuration.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

pub fn default_riemann() -> SimConfig {
    SimConfig::new(
        400,
        0.5,
        InitialCondition::Riemann {
            left: PrimState::at_rest(5.0, 0.9, 0.1),
            right: reference_state(),
            x0: None,
        },
    )
}

pub fn default_pulse() -> SimConfig {
    SimConfig::new(
        100,
        0.5,
        InitialCondition::SmoothPulse {
            background: reference_state(),
            eps_amplitude: 0.1,
            velocity_amplitude: 0.05,
            wavenumber: 1,
        },
    )
}
