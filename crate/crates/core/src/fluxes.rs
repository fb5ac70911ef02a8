//! Fluxes `F^α(U)`, relaxation source `Q(U)` and entropy flux `S^α(U)`.
//!
//! ```text
//! F^α = ( T^{α0}, T^{α1}, T^{α2}, T^{α3}, n u^α, (n C + 1) u^α )
//! T^{αβ} = n ε u^α u^β + (p + π) Δ^{αβ},   Δ^{αβ} = g^{αβ} + u^α u^β
//! Q = ( 0, 0, 0, 0, 0, −M(U) π )
//! S^α = n s u^α
//! ```

pub mod manufactured;

use crate::error::Result;
use crate::linalg::{Mat6, Vec6};
use crate::state::PrimState;
use crate::thermo::{derived, derived_with_jacobian, DerivedQuantities, Eos, ThermoJacobian};

const METRIC: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

/// Inverse relaxation scale `M(U) > 0` in the equation of motion for `C`.
pub trait RelaxationCoefficient: Send + Sync {
    fn rate(&self, prim: &PrimState, thermo: &DerivedQuantities) -> f64;
}

/// `M = 1/τ` with a constant relaxation time `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantRelaxation {
    pub tau: f64,
}

impl ConstantRelaxation {
    pub fn new(tau: f64) -> Self {
        assert!(tau > 0.0, "relaxation time must be positive");
        Self { tau }
    }
}

impl RelaxationCoefficient for ConstantRelaxation {
    fn rate(&self, _prim: &PrimState, _thermo: &DerivedQuantities) -> f64 {
        1.0 / self.tau
    }
}

/// All fluxes, the source and the entropy flux at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxSet {
    pub fluxes: [Vec6; 4],
    pub source: Vec6,
    pub entropy: [f64; 4],
}

pub fn flux_set(eos: &dyn Eos, m: &dyn RelaxationCoefficient, prim: &PrimState) -> Result<FluxSet> {
    prim.check(eos)?;
    let d = derived(eos, prim.eps, prim.nu, prim.c)?;
    Ok(FluxSet {
        fluxes: [0, 1, 2, 3].map(|a| flux_with(prim, &d, a)),
        source: source_with(m, prim, &d),
        entropy: entropy_flux_with(prim, &d),
    })
}

pub fn flux(eos: &dyn Eos, prim: &PrimState, alpha: usize) -> Result<Vec6> {
    let d = derived(eos, prim.eps, prim.nu, prim.c)?;
    Ok(flux_with(prim, &d, alpha))
}

pub(crate) fn flux_with(prim: &PrimState, d: &DerivedQuantities, alpha: usize) -> Vec6 {
    let u = prim.four_velocity();
    let n = prim.n();
    let pt = d.p + d.pi;
    let ne = n * prim.eps;
    let mut out = Vec6::zeros();
    for beta in 0..4 {
        let proj = match (alpha, beta) {
            (0, 0) => prim.u.iter().map(|v| v * v).sum(),
            (a, b) if a == b => u[a] * u[b] + METRIC[a],
            _ => u[alpha] * u[beta],
        };
        out[beta] = ne * u[alpha] * u[beta] + pt * proj;
    }
    out[4] = n * u[alpha];
    out[5] = (n * prim.c + 1.0) * u[alpha];
    out
}

pub fn source(eos: &dyn Eos, m: &dyn RelaxationCoefficient, prim: &PrimState) -> Result<Vec6> {
    let d = derived(eos, prim.eps, prim.nu, prim.c)?;
    Ok(source_with(m, prim, &d))
}

pub(crate) fn source_with(m: &dyn RelaxationCoefficient, prim: &PrimState, d: &DerivedQuantities) -> Vec6 {
    let mut q = Vec6::zeros();
    q[5] = -m.rate(prim, d) * d.pi;
    q
}

pub fn entropy_flux(eos: &dyn Eos, prim: &PrimState) -> Result<[f64; 4]> {
    let d = derived(eos, prim.eps, prim.nu, prim.c)?;
    Ok(entropy_flux_with(prim, &d))
}

pub(crate) fn entropy_flux_with(prim: &PrimState, d: &DerivedQuantities) -> [f64; 4] {
    let ns = prim.n() * d.s;
    prim.four_velocity().map(|ua| ns * ua)
}

/// `∂u^α/∂u^i` for the spatial components `i = 1, 2, 3` (column `i − 1`).
fn velocity_jacobian(u: &[f64; 4]) -> [[f64; 3]; 4] {
    let mut j = [[0.0; 3]; 4];
    for i in 0..3 {
        j[0][i] = u[i + 1] / u[0];
        j[i + 1][i] = 1.0;
    }
    j
}

/// Analytic `∂F^α/∂U` with `U = (u¹, u², u³, ε, ν, C)`.
pub fn flux_jacobian(eos: &dyn Eos, prim: &PrimState, alpha: usize) -> Result<Mat6> {
    let (d, jac) = derived_with_jacobian(eos, prim.eps, prim.nu, prim.c)?;
    Ok(flux_jacobian_with(prim, &d, &jac, alpha))
}

pub(crate) fn flux_jacobian_with(
    prim: &PrimState,
    d: &DerivedQuantities,
    jac: &ThermoJacobian,
    alpha: usize,
) -> Mat6 {
    let u = prim.four_velocity();
    let du = velocity_jacobian(&u);
    let n = prim.n();
    let pt = d.p + d.pi;
    let w = n * prim.eps + pt;
    let dpt = [0, 1, 2].map(|k| jac.p[k] + jac.pi[k]);
    let dw = [n + dpt[0], -n * n * prim.eps + dpt[1], dpt[2]];
    let k_coef = n * prim.c + 1.0;

    let mut m = Mat6::zeros();
    for beta in 0..4 {
        let g = if alpha == beta { METRIC[alpha] } else { 0.0 };
        for i in 0..3 {
            m[(beta, i)] = w * (du[alpha][i] * u[beta] + u[alpha] * du[beta][i]);
        }
        for k in 0..3 {
            m[(beta, 3 + k)] = dw[k] * u[alpha] * u[beta] + dpt[k] * g;
        }
    }
    for i in 0..3 {
        m[(4, i)] = n * du[alpha][i];
        m[(5, i)] = k_coef * du[alpha][i];
    }
    m[(4, 4)] = -n * n * u[alpha];
    m[(5, 4)] = -n * n * prim.c * u[alpha];
    m[(5, 5)] = n * u[alpha];
    m
}

/// Analytic `∂S^α/∂U`, one row per `α`.
pub(crate) fn entropy_flux_gradient_with(
    prim: &PrimState,
    d: &DerivedQuantities,
    jac: &ThermoJacobian,
) -> [[f64; 6]; 4] {
    let u = prim.four_velocity();
    let du = velocity_jacobian(&u);
    let n = prim.n();
    let mut out = [[0.0; 6]; 4];
    for alpha in 0..4 {
        for i in 0..3 {
            out[alpha][i] = n * d.s * du[alpha][i];
        }
        out[alpha][3] = n * jac.s[0] * u[alpha];
        out[alpha][4] = (-n * n * d.s + n * jac.s[1]) * u[alpha];
        out[alpha][5] = n * jac.s[2] * u[alpha];
    }
    out
}

pub fn entropy_flux_gradient(eos: &dyn Eos, prim: &PrimState) -> Result<[[f64; 6]; 4]> {
    let (d, jac) = derived_with_jacobian(eos, prim.eps, prim.nu, prim.c)?;
    Ok(entropy_flux_gradient_with(prim, &d, &jac))
}

/// The two sides of the smooth-flow entropy balance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyProduction {
    /// `∂_α S^α` assembled from the supplied gradients by the chain rule.
    pub divergence: f64,
    /// `M θ⁻¹ π²`, which equals the divergence on solutions.
    pub closed_form: f64,
}

impl EntropyProduction {
    pub fn mismatch(&self) -> f64 {
        (self.divergence - self.closed_form).abs()
    }
}

/// `gradients[α][j] = ∂_α U_j`.
pub fn entropy_production_smooth(
    eos: &dyn Eos,
    m: &dyn RelaxationCoefficient,
    prim: &PrimState,
    gradients: &[[f64; 6]; 4],
) -> Result<EntropyProduction> {
    let (d, jac) = derived_with_jacobian(eos, prim.eps, prim.nu, prim.c)?;
    let ds = entropy_flux_gradient_with(prim, &d, &jac);
    let divergence = (0..4)
        .map(|a| (0..6).map(|j| ds[a][j] * gradients[a][j]).sum::<f64>())
        .sum();
    let closed_form = m.rate(prim, &d) * d.pi * d.pi / d.theta;
    Ok(EntropyProduction { divergence, closed_form })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::mis_ideal_gas;

    fn fd_jacobian(f: impl Fn(&PrimState) -> Vec6, p: &PrimState) -> Mat6 {
        let base = p.to_array();
        let mut m = Mat6::zeros();
        for j in 0..6 {
            let h = 1e-6 * base[j].abs().max(1.0);
            let mut a = base;
            let mut b = base;
            a[j] += h;
            b[j] -= h;
            let col = (f(&PrimState::from_array(a)) - f(&PrimState::from_array(b))) / (2.0 * h);
            m.set_column(j, &col);
        }
        m
    }

    #[test]
    fn rest_state_fluxes() {
        let eos = mis_ideal_gas(1.5);
        let rest = PrimState::at_rest(1.0, 1.0, 0.0);
        let f1 = flux(&eos, &rest, 1).unwrap();
        let expect = [0.0, 2.0 / 3.0, 0.0, 0.0, 0.0, 0.0];
        for (a, b) in f1.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let f0 = flux(&eos, &rest, 0).unwrap();
        assert_eq!(f0.as_slice(), &[1.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn contraction_with_velocity() {
        // u_β T^{αβ} = −n ε u^α.
        let eos = mis_ideal_gas(1.5);
        let p = PrimState::new([0.4, -0.3, 1.1], 3.0, 0.8, 0.2);
        let u = p.four_velocity();
        for alpha in 0..4 {
            let f = flux(&eos, &p, alpha).unwrap();
            let contracted: f64 = (0..4).map(|b| METRIC[b] * u[b] * f[b]).sum();
            let expect = -p.n() * p.eps * u[alpha];
            assert!((contracted - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn third_flux_in_v_coordinates() {
        // (C + ν) v^α with v^α = n u^α.
        let eos = mis_ideal_gas(1.5);
        let p = PrimState::new([0.2, 0.5, -0.7], 2.0, 1.3, -0.4);
        let u = p.four_velocity();
        for alpha in 0..4 {
            let f = flux(&eos, &p, alpha).unwrap()[5];
            let v_form = (p.c + p.nu) * (p.n() * u[alpha]);
            assert!((f - v_form).abs() <= 1e-15 * f.abs().max(1.0));
        }
    }

    #[test]
    fn source_structure() {
        let eos = mis_ideal_gas(1.5);
        let m = ConstantRelaxation::new(0.5);
        let q = source(&eos, &m, &PrimState::at_rest(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(q, Vec6::zeros());
        let q = source(&eos, &m, &PrimState::at_rest(1.0, 1.0, 0.1)).unwrap();
        assert!(q.iter().take(5).all(|&x| x == 0.0));
        assert!((q[5] + 0.19900).abs() < 1e-5);
        for c in [-0.3, -0.01, 0.02, 0.4] {
            let p = PrimState::new([0.1, 0.0, 0.0], 2.0, 1.0, c);
            let q = source(&eos, &m, &p).unwrap()[5];
            let pi = derived(&eos, 2.0, 1.0, c).unwrap().pi;
            assert_eq!(q.signum(), -pi.signum());
        }
    }

    #[test]
    fn entropy_flux_matches_definition() {
        let eos = mis_ideal_gas(1.5);
        let p = PrimState::new([0.3, 0.0, -0.2], 2.5, 0.9, 0.1);
        let set = flux_set(&eos, &ConstantRelaxation::new(1.0), &p).unwrap();
        let s = eos.entropy(p.eps, p.nu, p.c);
        let u = p.four_velocity();
        for a in 0..4 {
            assert!((set.entropy[a] - p.n() * u[a] * s).abs() <= 1e-14 * (1.0 + set.entropy[a].abs()));
        }
    }

    #[test]
    fn analytic_jacobians_match_finite_differences() {
        let eos = mis_ideal_gas(1.5);
        let p = PrimState::new([0.4, -0.2, 0.1], 3.0, 0.9, 0.15);
        for alpha in 0..4 {
            let a = flux_jacobian(&eos, &p, alpha).unwrap();
            let f = fd_jacobian(|x| flux(&eos, x, alpha).unwrap(), &p);
            assert!((a - f).amax() < 1e-7, "alpha {alpha}: {}", (a - f).amax());
        }
        let ds = entropy_flux_gradient(&eos, &p).unwrap();
        for alpha in 0..4 {
            let f = fd_jacobian(
                |x| {
                    let s = entropy_flux(&eos, x).unwrap();
                    Vec6::new(s[alpha], 0.0, 0.0, 0.0, 0.0, 0.0)
                },
                &p,
            );
            for j in 0..6 {
                assert!((ds[alpha][j] - f[(0, j)]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn closed_form_entropy_production_is_non_negative() {
        let eos = mis_ideal_gas(1.5);
        let m = ConstantRelaxation::new(0.1);
        let zero = [[0.0; 6]; 4];
        let eq = entropy_production_smooth(&eos, &m, &PrimState::at_rest(2.0, 1.0, 0.0), &zero).unwrap();
        assert_eq!(eq.closed_form, 0.0);
        for c in [-0.5, -0.1, 0.0, 0.2, 0.6] {
            let e = entropy_production_smooth(&eos, &m, &PrimState::at_rest(2.0, 1.0, c), &zero).unwrap();
            assert!(e.closed_form >= 0.0);
        }
    }
}
