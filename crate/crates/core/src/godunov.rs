//! Main field, potentials and the symmetric hyperbolic structure.
//!
//! The main field is `ψ = −θ⁻¹ (u₀, u₁, u₂, u₃, G, π)` (indices lowered with
//! `diag(−1, 1, 1, 1)`), the unique solution of `ψᵀ D_U F^α = D_U S^α`. The
//! potentials `X^α = ψ·F^α − S^α` satisfy `F^α = ∂X^α/∂ψ`, and simplify to
//! `X^α = −θ⁻¹ (p + π) u^α`.
//!
//! Two routes to the Hessians `A^α = ∂²X^α/∂ψ²` are provided:
//! [`PotentialHessians`] takes second differences of `X^α` in `ψ`
//! coordinates, re-inverting `ψ → U` at every probe, while [`symmetrizers`]
//! uses the analytic chain rule `A^α = D_U F^α (D_U ψ)⁻¹`.
//!
//! Orientation: for a future-directed covector (`ξ₀ < 0`) the contraction
//! `ξ_α A^α` is positive definite on admissible, causal states.

use nalgebra::{Cholesky, LU};

use crate::error::{Error, Result};
use crate::fluxes::{entropy_flux_with, flux_jacobian_with, flux_with};
use crate::linalg::{norm_inf, sym_eigenvalues6, symmetry_defect, Mat6, Vec6};
use crate::state::PrimState;
use crate::thermo::{derived, derived_with_jacobian, DerivedQuantities, Eos, ThermoJacobian};

const CHART_MAX_ITER: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainField {
    pub psi: [f64; 6],
    pub state: PrimState,
}

pub fn main_field(eos: &dyn Eos, prim: &PrimState) -> Result<MainField> {
    prim.check(eos)?;
    let d = derived(eos, prim.eps, prim.nu, prim.c)?;
    Ok(MainField { psi: psi_with(prim, &d), state: *prim })
}

fn psi_with(prim: &PrimState, d: &DerivedQuantities) -> [f64; 6] {
    let u = prim.four_velocity();
    let k = -1.0 / d.theta;
    // Lowered velocity: u₀ = −u⁰, u_i = u^i.
    [-u[0] * k, u[1] * k, u[2] * k, u[3] * k, d.g * k, d.pi * k]
}

/// Analytic `∂ψ/∂U`.
pub fn main_field_jacobian(eos: &dyn Eos, prim: &PrimState) -> Result<Mat6> {
    let (d, jac) = derived_with_jacobian(eos, prim.eps, prim.nu, prim.c)?;
    Ok(main_field_jacobian_with(prim, &d, &jac))
}

fn main_field_jacobian_with(prim: &PrimState, d: &DerivedQuantities, jac: &ThermoJacobian) -> Mat6 {
    let u = prim.four_velocity();
    let th = d.theta;
    let th2 = th * th;
    let mut m = Mat6::zeros();
    for i in 0..3 {
        m[(0, i)] = u[i + 1] / (u[0] * th);
        m[(i + 1, i)] = -1.0 / th;
    }
    for x in 0..3 {
        let dth = jac.theta[x];
        m[(0, 3 + x)] = -u[0] * dth / th2;
        for k in 1..4 {
            m[(k, 3 + x)] = u[k] * dth / th2;
        }
        m[(4, 3 + x)] = -jac.g[x] / th + d.g * dth / th2;
        m[(5, 3 + x)] = -jac.pi[x] / th + d.pi * dth / th2;
    }
    m
}

/// Solves `ψ(U) = target` by damped Newton iteration from `guess`.
pub fn invert_main_field(eos: &dyn Eos, target: &[f64; 6], guess: &PrimState) -> Result<PrimState> {
    let t = Vec6::from(*target);
    let scale = 1.0 + t.amax();
    let residual = |x: &PrimState| -> Option<(Vec6, Mat6)> {
        x.check(eos).ok()?;
        let (d, jac) = derived_with_jacobian(eos, x.eps, x.nu, x.c).ok()?;
        Some((Vec6::from(psi_with(x, &d)) - t, main_field_jacobian_with(x, &d, &jac)))
    };
    let mut x = *guess;
    let (mut r, mut jac) = residual(&x)
        .ok_or_else(|| Error::ChartInversion(format!("inadmissible starting state {guess:?}")))?;
    let mut rnorm = r.amax();
    for _ in 0..CHART_MAX_ITER {
        if rnorm == 0.0 {
            break;
        }
        let dx = LU::new(jac)
            .solve(&(-r))
            .ok_or(Error::SingularJacobian("main-field chart"))?;
        let base = x.to_vector();
        let mut lambda = 1.0;
        let mut next = None;
        for _ in 0..30 {
            let trial = PrimState::from_array((base + lambda * dx).into());
            if let Some((rt, jt)) = residual(&trial) {
                if rt.amax() < rnorm {
                    next = Some((trial, rt, jt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match next {
            Some((xt, rt, jt)) => {
                x = xt;
                r = rt;
                jac = jt;
                rnorm = r.amax();
            }
            // No further decrease: converged to roundoff or stuck.
            None => break,
        }
    }
    if rnorm <= 1e-12 * scale {
        Ok(x)
    } else {
        Err(Error::ChartInversion(format!(
            "residual {rnorm:.3e} for target {target:?}"
        )))
    }
}

/// `X^α` evaluated two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential {
    /// `ψ·F^α − S^α`.
    pub definition: f64,
    /// `−θ⁻¹ (p + π) u^α`.
    pub closed_form: f64,
}

pub fn potential(eos: &dyn Eos, prim: &PrimState, alpha: usize) -> Result<Potential> {
    prim.check(eos)?;
    let d = derived(eos, prim.eps, prim.nu, prim.c)?;
    Ok(Potential {
        definition: potential_definition(prim, &d, alpha),
        closed_form: -(d.p + d.pi) / d.theta * prim.four_velocity()[alpha],
    })
}

fn potential_definition(prim: &PrimState, d: &DerivedQuantities, alpha: usize) -> f64 {
    let psi = Vec6::from(psi_with(prim, d));
    psi.dot(&flux_with(prim, d, alpha)) - entropy_flux_with(prim, d)[alpha]
}

fn all_potentials(eos: &dyn Eos, prim: &PrimState) -> Result<[f64; 4]> {
    let d = derived(eos, prim.eps, prim.nu, prim.c)?;
    Ok([0, 1, 2, 3].map(|a| potential_definition(prim, &d, a)))
}

fn gradient_step(psi: f64) -> f64 {
    1e-6 * psi.abs().max(1.0)
}

fn hessian_step(psi: f64) -> f64 {
    1e-4 * psi.abs().max(1.0)
}

/// Central differences of every `X^α` along each `ψ_i`, from one shared
/// set of probe states. Row `α`, column `i`.
pub fn potential_gradient_fd(eos: &dyn Eos, prim: &PrimState) -> Result<[[f64; 6]; 4]> {
    let mf = main_field(eos, prim)?;
    let mut out = [[0.0; 6]; 4];
    for i in 0..6 {
        let h = gradient_step(mf.psi[i]);
        let mut plus = mf.psi;
        let mut minus = mf.psi;
        plus[i] += h;
        minus[i] -= h;
        let xp = all_potentials(eos, &invert_main_field(eos, &plus, prim)?)?;
        let xm = all_potentials(eos, &invert_main_field(eos, &minus, prim)?)?;
        for a in 0..4 {
            out[a][i] = (xp[a] - xm[a]) / (2.0 * h);
        }
    }
    Ok(out)
}

/// Worst relative deviation `max_i |∂X^α/∂ψ_i − F^α_i| / ‖F^α‖∞`.
pub fn verify_potential_gradient(eos: &dyn Eos, prim: &PrimState, alpha: usize) -> Result<f64> {
    let grad = potential_gradient_fd(eos, prim)?;
    Ok(gradient_error(&grad[alpha], &crate::fluxes::flux(eos, prim, alpha)?))
}

pub(crate) fn gradient_error(fd: &[f64; 6], f: &Vec6) -> f64 {
    let scale = f.amax().max(f64::MIN_POSITIVE);
    (0..6).map(|i| (fd[i] - f[i]).abs() / scale).fold(0.0, f64::max)
}

/// `∂²X^α/∂ψ_i∂ψ_j` for all four potentials by second differences in `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialHessians {
    pub state: PrimState,
    pub hessians: [Mat6; 4],
}

impl PotentialHessians {
    pub fn compute(eos: &dyn Eos, prim: &PrimState) -> Result<Self> {
        let mf = main_field(eos, prim)?;
        let h: [f64; 6] = mf.psi.map(hessian_step);
        let eval = |offsets: &[(usize, f64)]| -> Result<[f64; 4]> {
            let mut p = mf.psi;
            for &(i, d) in offsets {
                p[i] += d;
            }
            all_potentials(eos, &invert_main_field(eos, &p, prim)?)
        };
        let center = all_potentials(eos, prim)?;
        let mut hessians = [Mat6::zeros(); 4];
        for i in 0..6 {
            let xp = eval(&[(i, h[i])])?;
            let xm = eval(&[(i, -h[i])])?;
            for a in 0..4 {
                hessians[a][(i, i)] = (xp[a] - 2.0 * center[a] + xm[a]) / (h[i] * h[i]);
            }
            for j in (i + 1)..6 {
                let pp = eval(&[(i, h[i]), (j, h[j])])?;
                let pm = eval(&[(i, h[i]), (j, -h[j])])?;
                let mp = eval(&[(i, -h[i]), (j, h[j])])?;
                let mm = eval(&[(i, -h[i]), (j, -h[j])])?;
                for a in 0..4 {
                    let v = (pp[a] - pm[a] - mp[a] + mm[a]) / (4.0 * h[i] * h[j]);
                    hessians[a][(i, j)] = v;
                    hessians[a][(j, i)] = v;
                }
            }
        }
        Ok(Self { state: *prim, hessians })
    }

    pub fn contract(&self, xi: [f64; 4]) -> Result<ContractedHessian> {
        check_timelike(xi)?;
        let m = contract(&self.hessians, xi);
        Ok(ContractedHessian::new(xi, m))
    }
}

fn contract(a: &[Mat6; 4], xi: [f64; 4]) -> Mat6 {
    a[0] * xi[0] + a[1] * xi[1] + a[2] * xi[2] + a[3] * xi[3]
}

fn check_timelike(xi: [f64; 4]) -> Result<()> {
    let norm2 = -xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] + xi[3] * xi[3];
    if norm2 < 0.0 {
        Ok(())
    } else {
        Err(Error::NotTimelike(xi))
    }
}

/// `ξ_α ∂²X^α/∂ψ²` for a timelike covector `ξ` (lower indices).
#[derive(Debug, Clone, PartialEq)]
pub struct ContractedHessian {
    pub xi: [f64; 4],
    pub matrix: Mat6,
    /// Ascending eigenvalues of the symmetrized matrix.
    pub eigenvalues: Vec<f64>,
    pub symmetry_defect: f64,
}

impl ContractedHessian {
    fn new(xi: [f64; 4], matrix: Mat6) -> Self {
        Self {
            xi,
            eigenvalues: sym_eigenvalues6(&matrix),
            symmetry_defect: symmetry_defect(&matrix),
            matrix,
        }
    }

    /// `+1` or `−1` if every eigenvalue has that sign with margin
    /// `margin·‖A‖∞`, otherwise `0`.
    pub fn definite_sign(&self, margin: f64) -> i32 {
        let tol = margin * norm_inf(&self.matrix);
        if self.eigenvalues.iter().all(|&l| l > tol) {
            1
        } else if self.eigenvalues.iter().all(|&l| l < -tol) {
            -1
        } else {
            0
        }
    }

    /// Smallest `|λ| / ‖A‖∞` over the eigenvalues.
    pub fn relative_margin(&self) -> f64 {
        let n = norm_inf(&self.matrix);
        self.eigenvalues.iter().map(|l| l.abs() / n).fold(f64::INFINITY, f64::min)
    }
}

/// Second-difference Hessian contracted with `ξ`.
pub fn contracted_hessian(eos: &dyn Eos, prim: &PrimState, xi: [f64; 4]) -> Result<ContractedHessian> {
    check_timelike(xi)?;
    PotentialHessians::compute(eos, prim)?.contract(xi)
}

/// Analytic `A^α = D_U F^α (D_U ψ)⁻¹`, returned unsymmetrized.
pub fn symmetrizers(eos: &dyn Eos, prim: &PrimState) -> Result<[Mat6; 4]> {
    let (d, jac) = derived_with_jacobian(eos, prim.eps, prim.nu, prim.c)?;
    symmetrizers_with(prim, &d, &jac).map(|(a, _)| a)
}

fn symmetrizers_with(
    prim: &PrimState,
    d: &DerivedQuantities,
    jac: &ThermoJacobian,
) -> Result<([Mat6; 4], LU<f64, nalgebra::Const<6>, nalgebra::Const<6>>)> {
    let dpsi = main_field_jacobian_with(prim, d, jac);
    let lu_t = LU::new(dpsi.transpose());
    let mut out = [Mat6::zeros(); 4];
    for (alpha, a) in out.iter_mut().enumerate() {
        let df = flux_jacobian_with(prim, d, jac, alpha);
        // A = DF · Dψ⁻¹  ⇔  Dψᵀ Aᵀ = DFᵀ
        let at = lu_t
            .solve(&df.transpose())
            .ok_or(Error::SingularJacobian("main field"))?;
        *a = at.transpose();
    }
    Ok((out, LU::new(dpsi)))
}

/// Analytic contracted Hessian `ξ_α A^α`.
pub fn contracted_symmetrizer(eos: &dyn Eos, prim: &PrimState, xi: [f64; 4]) -> Result<ContractedHessian> {
    check_timelike(xi)?;
    Ok(ContractedHessian::new(xi, contract(&symmetrizers(eos, prim)?, xi)))
}

/// Speeds and right eigenvectors (in `U` coordinates) along a direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Characteristics {
    /// Ascending.
    pub speeds: [f64; 6],
    /// Column `k` belongs to `speeds[k]`, unit Euclidean norm.
    pub right_vectors: Mat6,
}

/// Roots of `det(n̂_k A^k − λ A⁰) = 0`, solved by congruence with the
/// Cholesky factor of `−A⁰`.
pub fn characteristics(eos: &dyn Eos, prim: &PrimState, direction: [f64; 3]) -> Result<Characteristics> {
    prim.check(eos)?;
    let (d, jac) = derived_with_jacobian(eos, prim.eps, prim.nu, prim.c)?;
    let (a, dpsi_lu) = symmetrizers_with(prim, &d, &jac)?;
    let sym = |m: &Mat6| (m + m.transpose()) * 0.5;
    let b = -sym(&a[0]);
    let k = sym(&(a[1] * direction[0] + a[2] * direction[1] + a[3] * direction[2]));
    let chol = Cholesky::new(b).ok_or_else(|| {
        Error::PencilDegenerate(format!("−A⁰ is not positive definite at {prim:?}"))
    })?;
    let l = chol.l();
    let l_inv = l
        .try_inverse()
        .ok_or_else(|| Error::PencilDegenerate("singular Cholesky factor".into()))?;
    let c = l_inv * k * l_inv.transpose();
    let c = (c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();

    let mut order: Vec<usize> = (0..6).collect();
    // λ = −μ; ascending λ is descending μ.
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut speeds = [0.0; 6];
    let mut right = Mat6::zeros();
    for (slot, &idx) in order.iter().enumerate() {
        speeds[slot] = -eig.eigenvalues[idx];
        let w = l_inv.transpose() * eig.eigenvectors.column(idx);
        let du = dpsi_lu
            .solve(&w)
            .ok_or(Error::SingularJacobian("main field"))?;
        right.set_column(slot, &du.normalize());
    }
    Ok(Characteristics { speeds, right_vectors: right })
}

pub fn characteristic_speeds(eos: &dyn Eos, prim: &PrimState, direction: [f64; 3]) -> Result<[f64; 6]> {
    characteristics(eos, prim, direction).map(|c| c.speeds)
}

/// Largest `|λ|` along `x¹`.
pub fn max_speed_x(eos: &dyn Eos, prim: &PrimState) -> Result<f64> {
    let s = characteristic_speeds(eos, prim, [1.0, 0.0, 0.0])?;
    Ok(s[0].abs().max(s[5].abs()))
}
