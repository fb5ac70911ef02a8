use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::PrimState;
use crate::thermo::EosSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    #[default]
    Periodic,
    /// Zeroth-order extrapolation.
    Outflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// First-order Rusanov with forward Euler.
    #[default]
    Rusanov,
    /// Minmod-limited primitive reconstruction with SSP-RK2.
    Muscl,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    Uniform {
        state: PrimState,
    },
    /// `left` on `x < x0`, `right` on `x ≥ x0` (cell centres).
    Riemann {
        left: PrimState,
        right: PrimState,
        /// Defaults to the domain midpoint.
        #[serde(default)]
        x0: Option<f64>,
    },
    /// `ε → ε(1 + a_ε sin kx)`, `u¹ → u¹ + a_u sin kx`, one period per
    /// `wavenumber` over the domain.
    SmoothPulse {
        background: PrimState,
        #[serde(default)]
        eps_amplitude: f64,
        #[serde(default)]
        velocity_amplitude: f64,
        #[serde(default = "one")]
        wavenumber: u32,
    },
}

fn one() -> u32 {
    1
}

impl InitialCondition {
    pub fn state_at(&self, x: f64, domain: [f64; 2]) -> PrimState {
        match *self {
            Self::Uniform { state } => state,
            Self::Riemann { left, right, x0 } => {
                if x < x0.unwrap_or(0.5 * (domain[0] + domain[1])) {
                    left
                } else {
                    right
                }
            }
            Self::SmoothPulse { background, eps_amplitude, velocity_amplitude, wavenumber } => {
                let phase = std::f64::consts::TAU * wavenumber as f64 * (x - domain[0]) / (domain[1] - domain[0]);
                let mut s = background;
                s.eps *= 1.0 + eps_amplitude * phase.sin();
                s.u[0] += velocity_amplitude * phase.sin();
                s
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditToggles {
    #[serde(default = "yes")]
    pub conservation: bool,
    #[serde(default = "yes")]
    pub entropy: bool,
}

fn yes() -> bool {
    true
}

impl Default for AuditToggles {
    fn default() -> Self {
        Self { conservation: true, entropy: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub eos: EosSpec,
    /// Relaxation time, `M = 1/τ`.
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    #[serde(default)]
    pub max_steps: Option<usize>,
    pub cells: usize,
    #[serde(default = "default_domain")]
    pub domain: [f64; 2],
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub scheme: Scheme,
    pub initial: InitialCondition,
    /// Snapshot every this many steps; `0` keeps only the first and last.
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default)]
    pub audits: AuditToggles,
}

fn default_tau() -> f64 {
    0.1
}

fn default_cfl() -> f64 {
    0.4
}

fn default_domain() -> [f64; 2] {
    [0.0, 1.0]
}

impl SimConfig {
    pub fn new(cells: usize, t_end: f64, initial: InitialCondition) -> Self {
        Self {
            eos: EosSpec::default(),
            tau: default_tau(),
            cfl: default_cfl(),
            t_end,
            max_steps: None,
            cells,
            domain: default_domain(),
            boundary: Boundary::default(),
            scheme: Scheme::default(),
            initial,
            snapshot_every: 0,
            audits: AuditToggles::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad(format!("cfl must lie in (0, 1), got {}", self.cfl));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if self.cells < 4 {
            return bad(format!("need at least 4 cells, got {}", self.cells));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be finite and non-negative, got {}", self.t_end));
        }
        if !(self.domain[0].is_finite() && self.domain[1].is_finite() && self.domain[0] < self.domain[1]) {
            return bad(format!("malformed domain {:?}", self.domain));
        }
        Ok(())
    }
}
