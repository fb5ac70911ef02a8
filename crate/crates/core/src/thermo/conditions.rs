use nalgebra::{Matrix2, Matrix3, Vector3};

use super::{derived_with_jacobian, DerivedQuantities, Eos, ThermoJacobian};
use crate::error::Result;
use crate::linalg::{det_rows, sym_eigenvalues3, Mat3};

/// Flag tolerance: a value passes when `value ≥ −TOL·(1 + |value|)`.
pub const CONDITION_TOL: f64 = 1e-8;

/// Relative threshold below which a Jacobian determinant is treated as zero.
const SINGULAR_TOL: f64 = 1e-12;

/// A thermodynamic variable, usable as a coordinate in [`partial_at_fixed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThermoVar {
    Eps,
    Nu,
    C,
    S,
    Theta,
    P,
    Pi,
}

/// Whether `(θ, p, π)` is a valid coordinate system at the audited point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartStatus {
    Regular,
    /// `D(θ, p, π)/D(ε, ν, C)` vanishes: `G(θ, p, π)` is not defined here.
    Singular,
}

/// Audit of the admissibility conditions at one `(ε, ν, C)`.
///
/// With `H = −D²G` in `(θ, p, π)`, `c = ν²/f` and `e = (0, 1, 1)`, the
/// matrix `G̃ = H − c e eᵀ` must be non-negative definite. `condition_1` and
/// `condition_2` are its second and third leading principal minors divided by
/// the corresponding minors of `H`:
///
/// ```text
/// condition_1 = 1 + (ν²/f) ∂p/∂ν|_{s,π}
/// condition_2 = 1 + (ν²/f) (∂p/∂ν|_{s,C} + 2 ∂π/∂ν|_{s,C} − ∂π/∂C|_{s,ν})
/// ```
///
/// At a rest state `condition_2 = 1 − λ²` where `λ` is the fastest
/// characteristic speed, so a negative value signals superluminal sound.
///
/// The isothermal forms `1 + (ν²/f) ∂p/∂ν|_{θ,C}` and
/// `1 + (ν²/f)(−∂π/∂C|_{θ,p} + ∂p/∂ν|_{θ,π} + 2 ∂π/∂ν|_{θ,p})` are reported
/// alongside for reference; they are `None` where one of their determinant
/// ratios is singular (for the ideal-gas family `(θ, ν, p)` are never
/// independent). They do not drive the flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub state: [f64; 3],
    pub derived: DerivedQuantities,
    /// Ascending eigenvalues of the Hessian of `s` in `(ε, ν, C)`.
    pub hessian_eigenvalues: [f64; 3],
    pub chart: ChartStatus,
    pub condition_1: Option<f64>,
    pub condition_2: Option<f64>,
    /// Leading principal minors of `G̃`.
    pub gtilde_minors: Option<[f64; 3]>,
    pub isothermal_1: Option<f64>,
    pub isothermal_2: Option<f64>,
    pub concave: bool,
    pub condition_1_ok: bool,
    pub condition_2_ok: bool,
    /// Both conditions hold with a strict margin and `s` is strictly concave.
    pub strict: bool,
}

impl ConditionReport {
    pub fn passes(&self) -> bool {
        self.concave && self.condition_1_ok && self.condition_2_ok
    }
}

fn flag(v: Option<f64>) -> bool {
    v.is_some_and(|v| v >= -CONDITION_TOL * (1.0 + v.abs()))
}

fn strict_flag(v: Option<f64>) -> bool {
    v.is_some_and(|v| v > CONDITION_TOL * (1.0 + v.abs()))
}

fn gradient_of(var: ThermoVar, jac: &ThermoJacobian) -> [f64; 3] {
    match var {
        ThermoVar::Eps => [1.0, 0.0, 0.0],
        ThermoVar::Nu => [0.0, 1.0, 0.0],
        ThermoVar::C => [0.0, 0.0, 1.0],
        ThermoVar::S => jac.s,
        ThermoVar::Theta => jac.theta,
        ThermoVar::P => jac.p,
        ThermoVar::Pi => jac.pi,
    }
}

/// `∂a/∂b` holding `hold[0]` and `hold[1]` fixed, as the ratio of Jacobian
/// determinants `D(a, h₀, h₁) / D(b, h₀, h₁)` over `(ε, ν, C)`. `None` when
/// the denominator vanishes relative to the row norms.
pub fn partial_at_fixed(
    jac: &ThermoJacobian,
    a: ThermoVar,
    b: ThermoVar,
    hold: [ThermoVar; 2],
) -> Option<f64> {
    let h0 = gradient_of(hold[0], jac);
    let h1 = gradient_of(hold[1], jac);
    let ra = gradient_of(a, jac);
    let rb = gradient_of(b, jac);
    let num = det_rows(ra, h0, h1);
    let den = det_rows(rb, h0, h1);
    let norm = |r: [f64; 3]| (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let scale = norm(rb) * norm(h0) * norm(h1);
    if !(den.abs() > SINGULAR_TOL * scale) {
        return None;
    }
    Some(num / den)
}

fn rows(r: [[f64; 3]; 3]) -> Mat3 {
    Matrix3::from_rows(&[
        Vector3::from(r[0]).transpose(),
        Vector3::from(r[1]).transpose(),
        Vector3::from(r[2]).transpose(),
    ])
}

pub fn check_conditions(eos: &dyn Eos, eps: f64, nu: f64, c: f64) -> Result<ConditionReport> {
    use ThermoVar::*;

    let (d, jac) = derived_with_jacobian(eos, eps, nu, c)?;
    let hs = rows(jac.s_hessian);
    let ev = sym_eigenvalues3(&hs);
    let hessian_eigenvalues = [ev[0], ev[1], ev[2]];
    let concave = ev[2] < 0.0;

    let cfac = nu * nu / d.f;
    let isothermal_1 = partial_at_fixed(&jac, P, Nu, [Theta, C]).map(|v| 1.0 + cfac * v);
    let isothermal_2 = (|| {
        let a = partial_at_fixed(&jac, Pi, C, [Theta, P])?;
        let b = partial_at_fixed(&jac, P, Nu, [Theta, Pi])?;
        let e = partial_at_fixed(&jac, Pi, Nu, [Theta, P])?;
        Some(1.0 + cfac * (-a + b + 2.0 * e))
    })();

    // x = (θ, p, π), y = ∇_x G = (−s, ν, −C); D²G = ∂y/∂U · (∂x/∂U)⁻¹.
    let jx = rows([jac.theta, jac.p, jac.pi]);
    let jy = rows([[-jac.s[0], -jac.s[1], -jac.s[2]], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]]);
    let row_scale = [jac.theta, jac.p, jac.pi]
        .iter()
        .map(|r| (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt())
        .product::<f64>();
    let det_jx = jx.determinant();

    let (chart, condition_1, condition_2, gtilde_minors) =
        if det_jx.abs() > SINGULAR_TOL * row_scale && det_jx.is_finite() {
            let jx_inv = jx.try_inverse().expect("nonsingular by the determinant check");
            let d2g = jy * jx_inv;
            let h: Mat3 = -(d2g + d2g.transpose()) * 0.5;
            let e = Vector3::new(0.0, 1.0, 1.0);
            let gt = h - cfac * e * e.transpose();
            let minors = [
                gt[(0, 0)],
                Matrix2::new(gt[(0, 0)], gt[(0, 1)], gt[(1, 0)], gt[(1, 1)]).determinant(),
                gt.determinant(),
            ];
            let h2 = Matrix2::new(h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]);
            let c1 = h2.try_inverse().map(|inv| 1.0 - cfac * inv[(1, 1)]);
            let c2 = h
                .lu()
                .solve(&e)
                .map(|sol| 1.0 - cfac * e.dot(&sol));
            (ChartStatus::Regular, c1, c2, Some(minors))
        } else {
            (ChartStatus::Singular, None, None, None)
        };

    let condition_1_ok = flag(condition_1);
    let condition_2_ok = flag(condition_2);
    let strict = concave && strict_flag(condition_1) && strict_flag(condition_2);

    Ok(ConditionReport {
        state: [eps, nu, c],
        derived: d,
        hessian_eigenvalues,
        chart,
        condition_1,
        condition_2,
        gtilde_minors,
        isothermal_1,
        isothermal_2,
        concave,
        condition_1_ok,
        condition_2_ok,
        strict,
    })
}
