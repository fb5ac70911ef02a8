//! Reproducible random states and covectors.
//!
//! All randomness is drawn from `ChaCha8Rng` seeded with a single `u64`, so
//! any sample set is identified by `(box, seed, count)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::PrimState;
use crate::thermo::{check_conditions, ConditionReport, Eos};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Axis-aligned box in `(ε, ν, C)` plus a bound on each spatial velocity
/// component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingBox {
    pub eps: [f64; 2],
    pub nu: [f64; 2],
    pub c: [f64; 2],
    #[serde(default)]
    pub u_max: f64,
}

impl Default for SamplingBox {
    /// A causal neighbourhood of the rest state `(ε, ν, C) = (4, 1, 0)`.
    fn default() -> Self {
        Self { eps: [3.0, 6.0], nu: [0.8, 1.1], c: [-0.3, 0.3], u_max: 0.5 }
    }
}

impl SamplingBox {
    pub fn at_rest(self) -> Self {
        Self { u_max: 0.0, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        if !(ok(self.eps) && ok(self.nu) && ok(self.c)) || !(self.u_max >= 0.0) {
            return Err(Error::Config(format!("malformed sampling box {self:?}")));
        }
        if self.eps[0] <= 0.0 || self.nu[0] <= 0.0 {
            return Err(Error::Config("sampling box must have ε > 0 and ν > 0".into()));
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> PrimState {
        let draw = |rng: &mut R, r: [f64; 2]| if r[0] == r[1] { r[0] } else { rng.gen_range(r[0]..=r[1]) };
        let eps = draw(rng, self.eps);
        let nu = draw(rng, self.nu);
        let c = draw(rng, self.c);
        let m = self.u_max;
        let u = [0; 3].map(|_| draw(rng, [-m, m]));
        PrimState::new(u, eps, nu, c)
    }

    pub fn sample_n(&self, seed: u64, count: usize) -> Vec<PrimState> {
        let mut r = rng(seed);
        (0..count).map(|_| self.sample(&mut r)).collect()
    }
}

/// Draws states until `count` of them pass the thermodynamic conditions
/// strictly. Fails if more than `50·count + 100` draws are needed.
pub fn sample_passing(
    eos: &dyn Eos,
    bx: &SamplingBox,
    seed: u64,
    count: usize,
) -> Result<Vec<(PrimState, ConditionReport)>> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    let budget = 50 * count + 100;
    for _ in 0..budget {
        if out.len() == count {
            break;
        }
        let p = bx.sample(&mut r);
        if let Ok(rep) = check_conditions(eos, p.eps, p.nu, p.c) {
            if rep.strict {
                out.push((p, rep));
            }
        }
    }
    if out.len() < count {
        return Err(Error::Domain(format!(
            "only {} of {count} sampled states pass the conditions",
            out.len()
        )));
    }
    Ok(out)
}

/// Future-directed unit timelike covector `ξ_α = (−γ, γv)` for a random
/// boost of rapidity at most `max_rapidity` in a uniformly random direction.
pub fn random_timelike_covector<R: Rng>(rng: &mut R, max_rapidity: f64) -> [f64; 4] {
    let eta = rng.gen_range(0.0..=max_rapidity);
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    let (g, gv) = (eta.cosh(), eta.sinh());
    [-g, gv * r * phi.cos(), gv * r * phi.sin(), gv * z]
}
