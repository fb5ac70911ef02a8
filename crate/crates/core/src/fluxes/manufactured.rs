//! An exact smooth solution used to audit the entropy balance.
//!
//! In its rest frame the fluid is homogeneous: `ε` and `ν` stay fixed and
//! `C` relaxes according to `n dC/dt = −M π(ε, ν, C)`. Viewed from a frame
//! in which the fluid moves with velocity `v` along `x`, the same solution
//! depends on both `t` and `x` through `t_rest = γ (t − v x)`.

use super::{entropy_production_smooth, EntropyProduction, RelaxationCoefficient};
use crate::error::Result;
use crate::state::PrimState;
use crate::thermo::{derived, Eos};

/// RK4 step for the rest-frame relaxation ODE.
const ODE_STEP: f64 = 1e-3;

pub struct BoostedRelaxation<'a> {
    pub eos: &'a dyn Eos,
    /// Must depend on the state only through Lorentz scalars.
    pub relaxation: &'a dyn RelaxationCoefficient,
    pub eps: f64,
    pub nu: f64,
    /// Value of `C` at rest-frame time zero.
    pub c0: f64,
    /// Three-velocity of the fluid in the audit frame, `|v| < 1`.
    pub velocity: f64,
}

impl BoostedRelaxation<'_> {
    fn gamma(&self) -> f64 {
        1.0 / (1.0 - self.velocity * self.velocity).sqrt()
    }

    fn rhs(&self, c: f64) -> Result<f64> {
        let prim = PrimState::at_rest(self.eps, self.nu, c);
        let d = derived(self.eos, self.eps, self.nu, c)?;
        Ok(-self.relaxation.rate(&prim, &d) * self.nu * d.pi)
    }

    /// `C` at rest-frame time `t` (classical RK4 from `t = 0`).
    pub fn c_at(&self, t: f64) -> Result<f64> {
        let steps = (t.abs() / ODE_STEP).ceil().max(1.0) as usize;
        let h = t / steps as f64;
        let mut c = self.c0;
        for _ in 0..steps {
            let k1 = self.rhs(c)?;
            let k2 = self.rhs(c + 0.5 * h * k1)?;
            let k3 = self.rhs(c + 0.5 * h * k2)?;
            let k4 = self.rhs(c + h * k3)?;
            c += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        Ok(c)
    }

    /// Field value at audit-frame coordinates `(t, x)`.
    pub fn state(&self, t: f64, x: f64) -> Result<PrimState> {
        let g = self.gamma();
        let c = self.c_at(g * (t - self.velocity * x))?;
        Ok(PrimState::new([g * self.velocity, 0.0, 0.0], self.eps, self.nu, c))
    }

    /// Centered second-order differences in `t` and `x`; `y` and `z`
    /// derivatives vanish identically.
    pub fn gradients(&self, t: f64, x: f64, h: f64) -> Result<[[f64; 6]; 4]> {
        let mut out = [[0.0; 6]; 4];
        let tp = self.state(t + h, x)?.to_array();
        let tm = self.state(t - h, x)?.to_array();
        let xp = self.state(t, x + h)?.to_array();
        let xm = self.state(t, x - h)?.to_array();
        for j in 0..6 {
            out[0][j] = (tp[j] - tm[j]) / (2.0 * h);
            out[1][j] = (xp[j] - xm[j]) / (2.0 * h);
        }
        Ok(out)
    }

    pub fn audit(&self, t: f64, x: f64, h: f64) -> Result<EntropyProduction> {
        let prim = self.state(t, x)?;
        let grads = self.gradients(t, x, h)?;
        entropy_production_smooth(self.eos, self.relaxation, &prim, &grads)
    }

    /// Mismatch `|∂_α S^α − M θ⁻¹ π²|` for stencil widths `h, h/2, h/4, …`
    /// together with the observed orders between consecutive levels.
    pub fn refinement_study(&self, t: f64, x: f64, h0: f64, levels: usize) -> Result<RefinementStudy> {
        let mut steps = Vec::with_capacity(levels);
        let mut errors = Vec::with_capacity(levels);
        let mut h = h0;
        for _ in 0..levels {
            steps.push(h);
            errors.push(self.audit(t, x, h)?.mismatch());
            h *= 0.5;
        }
        let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        Ok(RefinementStudy { steps, errors, orders })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementStudy {
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
}
