use serde::{Deserialize, Serialize};

use super::{ConvexQuadratic, Eos, IdealGas, MisEos};
use crate::error::{Error, Result};

/// Named equation of state, as written in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EosSpec {
    /// MIS entropy over an ideal gas with heat capacity `c_v`.
    MisIdealGas {
        #[serde(default = "default_c_v")]
        c_v: f64,
    },
    /// MIS entropy over the convex `s_eq = ε²` (fails the audit).
    MisConvexQuadratic,
}

fn default_c_v() -> f64 {
    1.5
}

impl Default for EosSpec {
    fn default() -> Self {
        Self::MisIdealGas { c_v: default_c_v() }
    }
}

impl EosSpec {
    pub fn build(&self) -> Result<Box<dyn Eos>> {
        match *self {
            Self::MisIdealGas { c_v } if c_v > 0.0 && c_v.is_finite() => {
                Ok(Box::new(MisEos::new(IdealGas { c_v })))
            }
            Self::MisIdealGas { c_v } => Err(Error::Config(format!("c_v must be positive, got {c_v}"))),
            Self::MisConvexQuadratic => Ok(Box::new(MisEos::new(ConvexQuadratic))),
        }
    }
}
