//! Field coordinates on Minkowski space and the conserved ↔ primitive map.
//!
//! The primitive state is `U = (u¹, u², u³, ε, ν, C)`; `u⁰ = √(1 + |u⃗|²)`
//! is derived so that `u_α u^α = −1` holds by construction. The conserved
//! state is the time component of the flux, `F⁰(U)`.

use nalgebra::LU;

use crate::error::{Error, Result};
use crate::fluxes::{flux, flux_jacobian};
use crate::linalg::Vec6;
use crate::thermo::Eos;

/// Largest admissible spatial four-velocity magnitude.
pub const MAX_SPATIAL_VELOCITY: f64 = 1e6;

pub const RECOVERY_MAX_ITER: usize = 50;
pub const RECOVERY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimState {
    /// Spatial components `(u¹, u², u³)` of the four-velocity.
    #[serde(default)]
    pub u: [f64; 3],
    /// Internal energy per particle.
    pub eps: f64,
    /// Volume per particle, `ν = 1/n`.
    pub nu: f64,
    /// Non-equilibrium variable conjugate to the bulk viscous pressure.
    #[serde(default)]
    pub c: f64,
}

impl PrimState {
    pub fn new(u: [f64; 3], eps: f64, nu: f64, c: f64) -> Self {
        Self { u, eps, nu, c }
    }

    pub fn at_rest(eps: f64, nu: f64, c: f64) -> Self {
        Self::new([0.0; 3], eps, nu, c)
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self::new([a[0], a[1], a[2]], a[3], a[4], a[5])
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.u[0], self.u[1], self.u[2], self.eps, self.nu, self.c]
    }

    pub fn to_vector(&self) -> Vec6 {
        Vec6::from(self.to_array())
    }

    pub fn n(&self) -> f64 {
        1.0 / self.nu
    }

    pub fn u0(&self) -> f64 {
        four_velocity(self.u)[0]
    }

    pub fn four_velocity(&self) -> [f64; 4] {
        four_velocity(self.u)
    }

    /// Parity image under `x¹ → −x¹`.
    pub fn mirror_x(&self) -> Self {
        Self::new([-self.u[0], self.u[1], self.u[2]], self.eps, self.nu, self.c)
    }

    /// Checks the kinematic bounds and the equation-of-state domain.
    pub fn check(&self, eos: &dyn Eos) -> Result<()> {
        let speed = (self.u[0] * self.u[0] + self.u[1] * self.u[1] + self.u[2] * self.u[2]).sqrt();
        if !(speed <= MAX_SPATIAL_VELOCITY) {
            return Err(Error::Domain(format!(
                "spatial four-velocity |u| = {speed} exceeds {MAX_SPATIAL_VELOCITY}"
            )));
        }
        eos.check_domain(self.eps, self.nu, self.c)
    }
}

/// Conserved 6-vector `(T^{00}, T^{01}, T^{02}, T^{03}, J⁰, (nC + 1) u⁰)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsState(pub [f64; 6]);

impl ConsState {
    pub fn to_vector(&self) -> Vec6 {
        Vec6::from(self.0)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

impl From<Vec6> for ConsState {
    fn from(v: Vec6) -> Self {
        let mut a = [0.0; 6];
        a.copy_from_slice(v.as_slice());
        ConsState(a)
    }
}

/// `(√(1 + |u⃗|²), u⃗)`.
pub fn four_velocity(u: [f64; 3]) -> [f64; 4] {
    let u0 = (1.0 + u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    [u0, u[0], u[1], u[2]]
}

/// `u_α u^α` with the metric `diag(−1, 1, 1, 1)`.
pub fn minkowski_norm2(v: [f64; 4]) -> f64 {
    -v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]
}

pub fn to_conserved(eos: &dyn Eos, prim: &PrimState) -> Result<ConsState> {
    Ok(ConsState::from(flux(eos, prim, 0)?))
}

/// Outcome of a successful recovery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recovered {
    pub state: PrimState,
    pub iterations: usize,
    pub residual: f64,
}

pub fn recover_primitive(eos: &dyn Eos, cons: &ConsState, guess: &PrimState) -> Result<PrimState> {
    recover_primitive_stats(eos, cons, guess).map(|r| r.state)
}

/// Newton iteration on `F⁰(U) − c = 0` with the analytic Jacobian and step
/// halving that keeps iterates admissible.
pub fn recover_primitive_stats(
    eos: &dyn Eos,
    cons: &ConsState,
    guess: &PrimState,
) -> Result<Recovered> {
    let target = cons.to_vector();
    let tol = RECOVERY_TOL * (1.0 + cons.norm_inf());
    let fail = |iterations: usize, residual: f64, last: PrimState| Error::RecoveryFailed {
        iterations,
        residual,
        last: Box::new(last),
    };

    if !cons.0.iter().all(|x| x.is_finite()) || cons.0[4] <= 0.0 || cons.0[0] <= 0.0 {
        // J⁰ = n u⁰ and T⁰⁰ are positive for every admissible state.
        return Err(fail(0, f64::INFINITY, *guess));
    }
    guess.check(eos)?;

    let residual_at = |x: &PrimState| -> Option<Vec6> {
        x.check(eos).ok()?;
        to_conserved(eos, x).ok().map(|c| c.to_vector() - target)
    };

    let mut x = *guess;
    let mut r = residual_at(&x).ok_or_else(|| fail(0, f64::INFINITY, x))?;
    let mut rnorm = r.amax();

    for it in 0..=RECOVERY_MAX_ITER {
        if rnorm <= tol {
            return Ok(Recovered { state: x, iterations: it, residual: rnorm });
        }
        if it == RECOVERY_MAX_ITER {
            break;
        }
        let jac = flux_jacobian(eos, &x, 0).map_err(|_| fail(it, rnorm, x))?;
        let lu = LU::new(jac);
        let dx = lu
            .solve(&(-r))
            .ok_or(Error::SingularJacobian("primitive recovery"))?;

        let base = x.to_vector();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = PrimState::from_array((base + lambda * dx).into());
            if let Some(rt) = residual_at(&trial) {
                let n = rt.amax();
                if n < rnorm || n <= tol {
                    accepted = Some((trial, rt, n));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xt, rt, n)) => {
                x = xt;
                r = rt;
                rnorm = n;
            }
            None => return Err(fail(it + 1, rnorm, x)),
        }
    }
    Err(fail(RECOVERY_MAX_ITER, rnorm, x))
}
