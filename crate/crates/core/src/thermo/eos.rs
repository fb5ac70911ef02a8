use crate::error::{Error, Result};

/// Central-difference step for first derivatives.
pub(crate) fn fd_step(x: f64) -> f64 {
    1e-6_f64.max(1e-6 * x.abs())
}

/// Step for second derivatives built from nested central differences; the
/// square root of the first-derivative relative step.
pub(crate) fn fd_step2(x: f64) -> f64 {
    1e-3 * x.abs().max(1.0)
}

/// Entropy per particle `s(ε, ν, C)` as a function of the energy per
/// particle `ε`, the volume per particle `ν` and the non-equilibrium variable
/// `C` conjugate to the bulk viscous pressure.
///
/// Only [`Eos::entropy`] is required. The derivative methods fall back to
/// central finite differences; implementations with closed forms should
/// override them, since every downstream Jacobian is built from these.
pub trait Eos: Send + Sync {
    fn entropy(&self, eps: f64, nu: f64, c: f64) -> f64;

    /// `(∂_ε s, ∂_ν s, ∂_C s)`.
    fn gradient(&self, eps: f64, nu: f64, c: f64) -> [f64; 3] {
        let x = [eps, nu, c];
        let mut g = [0.0; 3];
        for (i, gi) in g.iter_mut().enumerate() {
            let h = fd_step(x[i]);
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            *gi = (self.entropy(xp[0], xp[1], xp[2]) - self.entropy(xm[0], xm[1], xm[2]))
                / (2.0 * h);
        }
        g
    }

    /// Hessian of `s` in `(ε, ν, C)`.
    fn hessian(&self, eps: f64, nu: f64, c: f64) -> [[f64; 3]; 3] {
        let x = [eps, nu, c];
        let mut h = [[0.0; 3]; 3];
        for j in 0..3 {
            let step = fd_step2(x[j]);
            let mut xp = x;
            let mut xm = x;
            xp[j] += step;
            xm[j] -= step;
            let gp = self.gradient(xp[0], xp[1], xp[2]);
            let gm = self.gradient(xm[0], xm[1], xm[2]);
            for i in 0..3 {
                h[i][j] = (gp[i] - gm[i]) / (2.0 * step);
            }
        }
        symmetrize3(h)
    }

    /// Rejects points outside the admissible domain. The default accepts
    /// `ε > 0`, `ν > 0` and any finite `C`.
    fn check_domain(&self, eps: f64, nu: f64, c: f64) -> Result<()> {
        default_domain(eps, nu, c)
    }

    fn name(&self) -> String {
        "custom".into()
    }
}

pub(crate) fn default_domain(eps: f64, nu: f64, c: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Domain(format!("energy per particle must satisfy ε > 0 (got {eps})")));
    }
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::Domain(format!("volume per particle must satisfy ν > 0 (got {nu})")));
    }
    if !c.is_finite() {
        return Err(Error::Domain(format!("non-equilibrium variable C must be finite (got {c})")));
    }
    Ok(())
}

fn symmetrize3(h: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = h;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let m = 0.5 * (h[i][j] + h[j][i]);
            out[i][j] = m;
            out[j][i] = m;
        }
    }
    out
}

/// Equilibrium entropy `s_eq(ε, ν)`.
///
/// The third-derivative hook is needed because the MIS entropy contains
/// `∂_ε s_eq` explicitly, so its Hessian involves third derivatives of
/// `s_eq`.
pub trait EquilibriumEntropy: Send + Sync {
    fn value(&self, eps: f64, nu: f64) -> f64;

    fn gradient(&self, eps: f64, nu: f64) -> [f64; 2] {
        let he = fd_step(eps);
        let hn = fd_step(nu);
        [
            (self.value(eps + he, nu) - self.value(eps - he, nu)) / (2.0 * he),
            (self.value(eps, nu + hn) - self.value(eps, nu - hn)) / (2.0 * hn),
        ]
    }

    fn hessian(&self, eps: f64, nu: f64) -> [[f64; 2]; 2] {
        let he = fd_step2(eps);
        let hn = fd_step2(nu);
        let (gep, gem) = (self.gradient(eps + he, nu), self.gradient(eps - he, nu));
        let (gnp, gnm) = (self.gradient(eps, nu + hn), self.gradient(eps, nu - hn));
        let ee = (gep[0] - gem[0]) / (2.0 * he);
        let nn = (gnp[1] - gnm[1]) / (2.0 * hn);
        let en = 0.5 * ((gep[1] - gem[1]) / (2.0 * he) + (gnp[0] - gnm[0]) / (2.0 * hn));
        [[ee, en], [en, nn]]
    }

    /// `(∂³_εεε, ∂³_εεν, ∂³_ενν)` of `s_eq`.
    fn third(&self, eps: f64, nu: f64) -> [f64; 3] {
        let he = fd_step2(eps);
        let hn = fd_step2(nu);
        let (hp, hm) = (self.hessian(eps + he, nu), self.hessian(eps - he, nu));
        let (kp, km) = (self.hessian(eps, nu + hn), self.hessian(eps, nu - hn));
        [
            (hp[0][0] - hm[0][0]) / (2.0 * he),
            (kp[0][0] - km[0][0]) / (2.0 * hn),
            (kp[0][1] - km[0][1]) / (2.0 * hn),
        ]
    }

    fn name(&self) -> String {
        "custom".into()
    }
}

/// `s_eq = c_v ln ε + ln ν`: an ideal gas with constant heat capacity per
/// particle `c_v`, so `θ_eq = ε / c_v` and `p_eq = θ_eq / ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealGas {
    pub c_v: f64,
}

impl Default for IdealGas {
    fn default() -> Self {
        Self { c_v: 1.5 }
    }
}

impl EquilibriumEntropy for IdealGas {
    fn value(&self, eps: f64, nu: f64) -> f64 {
        self.c_v * eps.ln() + nu.ln()
    }

    fn gradient(&self, eps: f64, nu: f64) -> [f64; 2] {
        [self.c_v / eps, 1.0 / nu]
    }

    fn hessian(&self, eps: f64, nu: f64) -> [[f64; 2]; 2] {
        [[-self.c_v / (eps * eps), 0.0], [0.0, -1.0 / (nu * nu)]]
    }

    fn third(&self, eps: f64, _nu: f64) -> [f64; 3] {
        [2.0 * self.c_v / (eps * eps * eps), 0.0, 0.0]
    }

    fn name(&self) -> String {
        format!("ideal-gas(c_v={})", self.c_v)
    }
}

/// `s_eq = ε²`. Convex, hence inadmissible; kept as a negative control for
/// the condition audit.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConvexQuadratic;

impl EquilibriumEntropy for ConvexQuadratic {
    fn value(&self, eps: f64, _nu: f64) -> f64 {
        eps * eps
    }

    fn gradient(&self, eps: f64, _nu: f64) -> [f64; 2] {
        [2.0 * eps, 0.0]
    }

    fn hessian(&self, _eps: f64, _nu: f64) -> [[f64; 2]; 2] {
        [[2.0, 0.0], [0.0, 0.0]]
    }

    fn third(&self, _eps: f64, _nu: f64) -> [f64; 3] {
        [0.0; 3]
    }

    fn name(&self) -> String {
        "convex-quadratic".into()
    }
}

/// Equilibrium entropy from a closure; all derivatives by finite differences.
pub struct FnEquilibrium<F>(pub F);

impl<F> EquilibriumEntropy for FnEquilibrium<F>
where
    F: Fn(f64, f64) -> f64 + Send + Sync,
{
    fn value(&self, eps: f64, nu: f64) -> f64 {
        (self.0)(eps, nu)
    }
}

/// Full entropy `s(ε, ν, C)` from a closure; derivatives by finite
/// differences.
pub struct FnEos<F>(pub F);

impl<F> Eos for FnEos<F>
where
    F: Fn(f64, f64, f64) -> f64 + Send + Sync,
{
    fn entropy(&self, eps: f64, nu: f64, c: f64) -> f64 {
        (self.0)(eps, nu, c)
    }
}

/// The standard Müller-Israel-Stewart entropy built from an equilibrium
/// entropy: `s(ε, ν, C) = s_eq(ε, ν) − C² / (2 θ_eq(ε, ν))` with
/// `θ_eq = 1 / ∂_ε s_eq`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MisEos<Q> {
    pub equilibrium: Q,
}

impl<Q: EquilibriumEntropy> MisEos<Q> {
    pub fn new(equilibrium: Q) -> Self {
        Self { equilibrium }
    }
}

/// The default test equation of state: MIS over an ideal gas.
pub fn mis_ideal_gas(c_v: f64) -> MisEos<IdealGas> {
    MisEos::new(IdealGas { c_v })
}

impl<Q: EquilibriumEntropy> Eos for MisEos<Q> {
    fn entropy(&self, eps: f64, nu: f64, c: f64) -> f64 {
        let inv_theta_eq = self.equilibrium.gradient(eps, nu)[0];
        self.equilibrium.value(eps, nu) - 0.5 * c * c * inv_theta_eq
    }

    fn gradient(&self, eps: f64, nu: f64, c: f64) -> [f64; 3] {
        let g = self.equilibrium.gradient(eps, nu);
        let h = self.equilibrium.hessian(eps, nu);
        let half_c2 = 0.5 * c * c;
        [g[0] - half_c2 * h[0][0], g[1] - half_c2 * h[0][1], -c * g[0]]
    }

    fn hessian(&self, eps: f64, nu: f64, c: f64) -> [[f64; 3]; 3] {
        let g = self.equilibrium.gradient(eps, nu);
        let h = self.equilibrium.hessian(eps, nu);
        let t = self.equilibrium.third(eps, nu);
        let half_c2 = 0.5 * c * c;
        let ee = h[0][0] - half_c2 * t[0];
        let en = h[0][1] - half_c2 * t[1];
        let nn = h[1][1] - half_c2 * t[2];
        let ec = -c * h[0][0];
        let nc = -c * h[0][1];
        let cc = -g[0];
        [[ee, en, ec], [en, nn, nc], [ec, nc, cc]]
    }

    fn check_domain(&self, eps: f64, nu: f64, c: f64) -> Result<()> {
        default_domain(eps, nu, c)?;
        let inv_theta_eq = self.equilibrium.gradient(eps, nu)[0];
        if !(inv_theta_eq > 0.0 && inv_theta_eq.is_finite()) {
            return Err(Error::Domain(format!(
                "equilibrium temperature must be positive: ∂_ε s_eq = {inv_theta_eq} at (ε, ν) = ({eps}, {nu})"
            )));
        }
        Ok(())
    }

    fn name(&self) -> String {
        format!("mis[{}]", self.equilibrium.name())
    }
}
