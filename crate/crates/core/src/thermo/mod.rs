//! Equation of state and the thermodynamic quantities derived from it.
//!
//! Everything is driven by the entropy per particle `s(ε, ν, C)`. The
//! temperature, pressure and bulk viscous pressure follow from
//! `θ⁻¹ = ∂_ε s`, `θ⁻¹ p = ∂_ν s` and `θ⁻¹ π = −∂_C s`, and the free
//! enthalpy is `G = ε − θ s + ν p − C π`, which satisfies
//! `dG = −s dθ + ν dp − C dπ`.
//!
//! Admissible equations of state are strictly *concave* in `(ε, ν, C)`;
//! [`check_conditions`] audits this together with the two extra inequalities
//! that make the system causal.

mod conditions;
mod eos;
mod spec;

pub use conditions::{check_conditions, partial_at_fixed, ChartStatus, ConditionReport, ThermoVar};
pub use eos::{
    mis_ideal_gas, ConvexQuadratic, Eos, EquilibriumEntropy, FnEos, FnEquilibrium, IdealGas,
    MisEos,
};
pub use spec::EosSpec;

use crate::error::{Error, Result};

/// Thermodynamic quantities at one point `(ε, ν, C)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities {
    pub eps: f64,
    pub nu: f64,
    pub c: f64,
    /// Entropy per particle.
    pub s: f64,
    /// Temperature.
    pub theta: f64,
    /// Equilibrium pressure.
    pub p: f64,
    /// Bulk viscous pressure.
    pub pi: f64,
    /// Free enthalpy `ε − θ s + ν p − C π`.
    pub g: f64,
    /// `ε + ν (p + π)`.
    pub f: f64,
}

impl DerivedQuantities {
    /// `G` recomputed from the stored fields.
    pub fn free_enthalpy_identity(&self) -> f64 {
        self.eps - self.theta * self.s + self.nu * self.p - self.c * self.pi
    }

    /// Total isotropic pressure `p + π`.
    pub fn total_pressure(&self) -> f64 {
        self.p + self.pi
    }
}

/// Gradients with respect to `(ε, ν, C)` of the derived quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoJacobian {
    pub s: [f64; 3],
    pub theta: [f64; 3],
    pub p: [f64; 3],
    pub pi: [f64; 3],
    pub g: [f64; 3],
    /// Hessian of `s`.
    pub s_hessian: [[f64; 3]; 3],
}

pub fn derived(eos: &dyn Eos, eps: f64, nu: f64, c: f64) -> Result<DerivedQuantities> {
    eos.check_domain(eps, nu, c)?;
    let s = eos.entropy(eps, nu, c);
    let grad = eos.gradient(eps, nu, c);
    from_gradient(eps, nu, c, s, grad)
}

fn from_gradient(eps: f64, nu: f64, c: f64, s: f64, grad: [f64; 3]) -> Result<DerivedQuantities> {
    if !(grad[0] > 0.0 && grad[0].is_finite()) {
        return Err(Error::Domain(format!(
            "temperature must be positive: ∂_ε s = {} at (ε, ν, C) = ({eps}, {nu}, {c})",
            grad[0]
        )));
    }
    let theta = 1.0 / grad[0];
    let p = theta * grad[1];
    let pi = -theta * grad[2];
    let g = eps - theta * s + nu * p - c * pi;
    let f = eps + nu * (p + pi);
    Ok(DerivedQuantities { eps, nu, c, s, theta, p, pi, g, f })
}

pub fn derived_with_jacobian(
    eos: &dyn Eos,
    eps: f64,
    nu: f64,
    c: f64,
) -> Result<(DerivedQuantities, ThermoJacobian)> {
    eos.check_domain(eps, nu, c)?;
    let s = eos.entropy(eps, nu, c);
    let grad = eos.gradient(eps, nu, c);
    let d = from_gradient(eps, nu, c, s, grad)?;
    let h = eos.hessian(eps, nu, c);

    let theta2 = d.theta * d.theta;
    let mut jac = ThermoJacobian {
        s: grad,
        theta: [0.0; 3],
        p: [0.0; 3],
        pi: [0.0; 3],
        g: [0.0; 3],
        s_hessian: h,
    };
    for k in 0..3 {
        let dtheta = -theta2 * h[0][k];
        let dp = dtheta * grad[1] + d.theta * h[1][k];
        let dpi = -dtheta * grad[2] - d.theta * h[2][k];
        jac.theta[k] = dtheta;
        jac.p[k] = dp;
        jac.pi[k] = dpi;
        jac.g[k] = -d.s * dtheta + nu * dp - c * dpi;
    }
    Ok((d, jac))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eos() -> MisEos<IdealGas> {
        mis_ideal_gas(1.5)
    }

    #[test]
    fn mis_entropy_values() {
        let e = eos();
        assert_eq!(e.entropy(1.0, 1.0, 0.0), 0.0);
        assert!((e.entropy(std::f64::consts::E, 1.0, 0.0) - 1.5).abs() < 1e-15);
        assert!((e.entropy(1.0, 1.0, 0.1) + 0.0075).abs() < 1e-15);
    }

    #[test]
    fn derived_at_equilibrium() {
        let d = derived(&eos(), 1.0, 1.0, 0.0).unwrap();
        assert!((d.theta - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.p - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.pi, 0.0);
        assert!((d.g - 5.0 / 3.0).abs() < 1e-15);
        assert!((d.f - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn derived_off_equilibrium() {
        // s_ε = 1.5 + 0.01·1.5/2 = 1.5075, θ = 1/1.5075, π = θ · C c_v / ε.
        let d = derived(&eos(), 1.0, 1.0, 0.1).unwrap();
        let theta = 1.0 / 1.5075;
        assert!((d.theta - theta).abs() < 1e-15);
        assert!((d.pi - theta * 0.15).abs() < 1e-15);
        assert!((d.theta - 0.66335).abs() < 5e-6);
        assert!((d.pi - 0.09950).abs() < 5e-6);
    }

    #[test]
    fn rejects_non_positive_temperature() {
        let bad = FnEos(|eps: f64, nu: f64, _c: f64| -eps.ln() + nu.ln());
        let err = derived(&bad, 1.0, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::Domain(ref m) if m.contains("temperature")));
        assert!(derived(&eos(), -1.0, 1.0, 0.0).is_err());
        assert!(derived(&eos(), 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn mis_rejects_negative_equilibrium_temperature() {
        let e = MisEos::new(FnEquilibrium(|eps: f64, nu: f64| -eps + nu.ln()));
        assert!(matches!(e.check_domain(1.0, 1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn closed_form_derivatives_match_finite_differences() {
        let e = eos();
        let fd = FnEos(|a: f64, b: f64, c: f64| mis_ideal_gas(1.5).entropy(a, b, c));
        for &(x, y, z) in &[(1.0, 1.0, 0.0), (3.2, 0.7, 0.3), (5.0, 1.4, -0.4)] {
            let g = e.gradient(x, y, z);
            let gf = fd.gradient(x, y, z);
            for i in 0..3 {
                assert!((g[i] - gf[i]).abs() <= 1e-5 * (1.0 + g[i].abs()), "{g:?} {gf:?}");
            }
            let h = e.hessian(x, y, z);
            let hf = fd.hessian(x, y, z);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((h[i][j] - hf[i][j]).abs() <= 1e-5 * (1.0 + h[i][j].abs()));
                }
            }
        }
    }

    #[test]
    fn generic_mis_matches_ideal_gas_closed_form() {
        let closed = eos();
        let generic = MisEos::new(FnEquilibrium(|eps: f64, nu: f64| 1.5 * eps.ln() + nu.ln()));
        let (a, b, c) = (2.5, 0.9, 0.2);
        let (dc, jc) = derived_with_jacobian(&closed, a, b, c).unwrap();
        let (dg, jg) = derived_with_jacobian(&generic, a, b, c).unwrap();
        assert!((dc.pi - dg.pi).abs() < 1e-8);
        for k in 0..3 {
            assert!((jc.pi[k] - jg.pi[k]).abs() < 1e-5);
            assert!((jc.p[k] - jg.p[k]).abs() < 1e-5);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences_of_derived() {
        let e = eos();
        let x = [2.0, 0.8, 0.25];
        let (_, jac) = derived_with_jacobian(&e, x[0], x[1], x[2]).unwrap();
        for k in 0..3 {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let dp = derived(&e, xp[0], xp[1], xp[2]).unwrap();
            let dm = derived(&e, xm[0], xm[1], xm[2]).unwrap();
            let fd = |a: f64, b: f64| (a - b) / (2.0 * h);
            assert!((jac.theta[k] - fd(dp.theta, dm.theta)).abs() < 1e-7);
            assert!((jac.p[k] - fd(dp.p, dm.p)).abs() < 1e-7);
            assert!((jac.pi[k] - fd(dp.pi, dm.pi)).abs() < 1e-7);
            assert!((jac.g[k] - fd(dp.g, dm.g)).abs() < 1e-7);
        }
    }
}
