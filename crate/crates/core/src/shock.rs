//! Rankine–Hugoniot analysis for planar discontinuities along `x¹`.
//!
//! Jumps are right minus left, for the profile `U_L` on `x < σt` and `U_R`
//! on `x > σt`. Families are numbered `1..=6` in ascending speed order.

use nalgebra::{SMatrix, SVector, LU};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fluxes::{entropy_flux, flux, flux_jacobian};
use crate::godunov::{characteristic_speeds, characteristics};
use crate::linalg::Vec6;
use crate::state::PrimState;
use crate::thermo::{check_conditions, Eos};

type Vec7 = SVector<f64, 7>;
type Mat7 = SMatrix<f64, 7, 7>;

pub const LAX_BAND: f64 = 1e-10;
const X1: [f64; 3] = [1.0, 0.0, 0.0];
const NEWTON_MAX_ITER: usize = 25;
const MAX_HALVINGS: u32 = 6;

/// `[F¹] − σ[F⁰]`.
pub fn rh_residual(eos: &dyn Eos, left: &PrimState, right: &PrimState, sigma: f64) -> Result<Vec6> {
    let (f0l, f1l) = (flux(eos, left, 0)?, flux(eos, left, 1)?);
    let (f0r, f1r) = (flux(eos, right, 0)?, flux(eos, right, 1)?);
    Ok((f1r - f1l) - (f0r - f0l) * sigma)
}

/// `[S¹] − σ[S⁰]`, the weight of the singular part of `∂_α S^α`.
pub fn entropy_jump(eos: &dyn Eos, left: &PrimState, right: &PrimState, sigma: f64) -> Result<f64> {
    let sl = entropy_flux(eos, left)?;
    let sr = entropy_flux(eos, right)?;
    Ok((sr[1] - sl[1]) - sigma * (sr[0] - sl[0]))
}

pub fn amplitude(left: &PrimState, right: &PrimState) -> f64 {
    (right.to_vector() - left.to_vector()).norm()
}

/// Accepted residual bound for a jump out of `left`.
pub fn rh_tolerance(eos: &dyn Eos, left: &PrimState) -> Result<f64> {
    Ok(1e-10 * (1.0 + flux(eos, left, 0)?.amax()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HugoniotPoint {
    pub left: PrimState,
    pub right: PrimState,
    pub sigma: f64,
    pub family: usize,
    pub amplitude: f64,
    pub entropy_production: f64,
    pub arclength: f64,
    pub residual: f64,
}

impl HugoniotPoint {
    fn new(eos: &dyn Eos, left: PrimState, right: PrimState, sigma: f64, family: usize, s: f64) -> Result<Self> {
        Ok(Self {
            left,
            right,
            sigma,
            family,
            amplitude: amplitude(&left, &right),
            entropy_production: entropy_jump(eos, &left, &right, sigma)?,
            arclength: s,
            residual: rh_residual(eos, &left, &right, sigma)?.amax(),
        })
    }

    /// The same discontinuity seen under `x¹ → −x¹`; the two sides swap.
    pub fn mirrored(&self) -> Self {
        Self {
            left: self.right.mirror_x(),
            right: self.left.mirror_x(),
            sigma: -self.sigma,
            family: 7 - self.family,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stall {
    pub step: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HugoniotLocus {
    pub points: Vec<HugoniotPoint>,
    pub stall: Option<Stall>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationParams {
    pub steps: usize,
    pub step_size: f64,
    /// `+1` follows the right eigenvector, `−1` the opposite branch.
    pub direction: f64,
}

impl Default for ContinuationParams {
    fn default() -> Self {
        Self { steps: 200, step_size: 1e-3, direction: 1.0 }
    }
}

/// Pseudo-arclength continuation of `(U_R, σ)` from `(U_L, λ_k(U_L))`.
pub fn hugoniot_locus(
    eos: &dyn Eos,
    left: &PrimState,
    family: usize,
    params: ContinuationParams,
) -> Result<HugoniotLocus> {
    if !(1..=6).contains(&family) {
        return Err(Error::Domain(format!("family {family} outside 1..=6")));
    }
    let report = check_conditions(eos, left.eps, left.nu, left.c)?;
    if !report.passes() {
        return Err(Error::Domain(format!("left state {left:?} fails the thermodynamic conditions")));
    }
    let ch = characteristics(eos, left, X1)?;
    let k = family - 1;
    let lam = ch.speeds[k];
    let gap = |j: usize| (ch.speeds[j] - lam).abs();
    if (k > 0 && gap(k - 1) < 1e-8) || (k < 5 && gap(k + 1) < 1e-8) {
        return Err(Error::Domain(format!("family {family} is not simple: {:?}", ch.speeds)));
    }
    let r = Vec6::from(ch.right_vectors.column(k));
    // σ' = ½ dλ_k/da along r at the branch point.
    let dl = 1e-6;
    let shifted = PrimState::from_array((left.to_vector() + r * dl).into());
    let lam_shift = characteristic_speeds(eos, &shifted, X1)?[k];
    let dsigma = 0.5 * (lam_shift - lam) / dl;

    let mut tangent = Vec7::zeros();
    tangent.fixed_rows_mut::<6>(0).copy_from(&r);
    tangent[6] = dsigma;
    tangent *= params.direction.signum() / tangent.norm();

    let tol = rh_tolerance(eos, left)?;
    let f0l = flux(eos, left, 0)?;
    let f1l = flux(eos, left, 1)?;
    let system = |y: &Vec7| -> Option<(Vec6, SMatrix<f64, 6, 7>)> {
        let right = PrimState::from_array(y.fixed_rows::<6>(0).into_owned().into());
        right.check(eos).ok()?;
        let sigma = y[6];
        let f0 = flux(eos, &right, 0).ok()?;
        let f1 = flux(eos, &right, 1).ok()?;
        let res = (f1 - f1l) - (f0 - f0l) * sigma;
        let j0 = flux_jacobian(eos, &right, 0).ok()?;
        let j1 = flux_jacobian(eos, &right, 1).ok()?;
        let mut jac = SMatrix::<f64, 6, 7>::zeros();
        jac.fixed_columns_mut::<6>(0).copy_from(&(j1 - j0 * sigma));
        jac.set_column(6, &(-(f0 - f0l)));
        Some((res, jac))
    };

    let mut y = Vec7::zeros();
    y.fixed_rows_mut::<6>(0).copy_from(&left.to_vector());
    y[6] = lam;
    let mut points = vec![HugoniotPoint::new(eos, *left, *left, lam, family, 0.0)?];
    let mut arclength = 0.0;

    for step in 1..=params.steps {
        let mut accepted = None;
        let mut h = params.step_size;
        for _ in 0..=MAX_HALVINGS {
            if let Some(yn) = correct(&system, &y, &tangent, h, tol) {
                accepted = Some((yn, h));
                break;
            }
            h *= 0.5;
        }
        let Some((yn, h)) = accepted else {
            return Ok(HugoniotLocus {
                points,
                stall: Some(Stall {
                    step,
                    reason: format!("corrector failed down to step {:.3e}", params.step_size / 64.0),
                }),
            });
        };
        arclength += h;
        // Next tangent: null vector of the 6×7 Jacobian, oriented along the old one.
        let Some((_, jac)) = system(&yn) else { unreachable!("accepted point is admissible") };
        let mut aug = Mat7::zeros();
        aug.fixed_rows_mut::<6>(0).copy_from(&jac);
        aug.set_row(6, &tangent.transpose());
        let mut rhs = Vec7::zeros();
        rhs[6] = 1.0;
        let Some(t) = LU::new(aug).solve(&rhs) else {
            return Ok(HugoniotLocus {
                points,
                stall: Some(Stall { step, reason: "singular tangent system".into() }),
            });
        };
        tangent = t / t.norm();
        y = yn;
        let right = PrimState::from_array(y.fixed_rows::<6>(0).into_owned().into());
        points.push(HugoniotPoint::new(eos, *left, right, y[6], family, arclength)?);
    }
    Ok(HugoniotLocus { points, stall: None })
}

fn correct<F>(system: &F, y: &Vec7, tangent: &Vec7, h: f64, tol: f64) -> Option<Vec7>
where
    F: Fn(&Vec7) -> Option<(Vec6, SMatrix<f64, 6, 7>)>,
{
    let pred = y + tangent * h;
    let mut x = pred;
    let mut best = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITER {
        let (res, jac) = system(&x)?;
        let rn = res.amax();
        if rn <= tol * 1e-4 || (rn >= best && rn <= tol) {
            return Some(x);
        }
        best = best.min(rn);
        let mut full = Vec7::zeros();
        full.fixed_rows_mut::<6>(0).copy_from(&res);
        full[6] = tangent.dot(&(x - pred));
        let mut aug = Mat7::zeros();
        aug.fixed_rows_mut::<6>(0).copy_from(&jac);
        aug.set_row(6, &tangent.transpose());
        let dx = LU::new(aug).solve(&(-full))?;
        if !dx.iter().all(|v| v.is_finite()) || dx.norm() > 10.0 * h {
            return None;
        }
        x += dx;
    }
    let (res, _) = system(&x)?;
    (res.amax() <= tol).then_some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LaxClass {
    Admissible,
    NotAdmissible,
    Undetermined,
}

impl LaxClass {
    pub fn label(self) -> &'static str {
        match self {
            Self::Admissible => "admissible",
            Self::NotAdmissible => "not_admissible",
            Self::Undetermined => "undetermined",
        }
    }
}

/// `λ_k(U_R) < σ < λ_k(U_L)`, `λ_{k−1}(U_L) < σ`, `σ < λ_{k+1}(U_R)`.
pub fn lax_classify(eos: &dyn Eos, point: &HugoniotPoint) -> Result<LaxClass> {
    let sl = characteristic_speeds(eos, &point.left, X1)?;
    let sr = characteristic_speeds(eos, &point.right, X1)?;
    let k = point.family - 1;
    let s = point.sigma;
    // Each margin must be positive for the inequality to hold.
    let mut margins = vec![s - sr[k], sl[k] - s];
    if k > 0 {
        margins.push(s - sl[k - 1]);
    }
    if k < 5 {
        margins.push(sr[k + 1] - s);
    }
    Ok(if margins.iter().any(|m| m.abs() <= LAX_BAND) {
        LaxClass::Undetermined
    } else if margins.iter().all(|&m| m > 0.0) {
        LaxClass::Admissible
    } else {
        LaxClass::NotAdmissible
    })
}

pub fn shock_entropy_production(eos: &dyn Eos, point: &HugoniotPoint) -> Result<f64> {
    entropy_jump(eos, &point.left, &point.right, point.sigma)
}

/// Least-squares slope of `ln E` against `ln a` over points with
/// `a ∈ [a_min, a_max]` and `E > 0`. `None` with fewer than three points.
pub fn entropy_scaling_slope(points: &[HugoniotPoint], a_min: f64, a_max: f64) -> Option<f64> {
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.amplitude >= a_min && p.amplitude <= a_max && p.entropy_production > 0.0)
        .map(|p| (p.amplitude.ln(), p.entropy_production.ln()))
        .collect();
    if data.len() < 3 {
        return None;
    }
    let n = data.len() as f64;
    let mx = data.iter().map(|d| d.0).sum::<f64>() / n;
    let my = data.iter().map(|d| d.1).sum::<f64>() / n;
    let sxy: f64 = data.iter().map(|d| (d.0 - mx) * (d.1 - my)).sum();
    let sxx: f64 = data.iter().map(|d| (d.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::{derived, mis_ideal_gas};

    fn reference() -> PrimState {
        PrimState::at_rest(4.0, 1.0, 0.0)
    }

    #[test]
    fn no_jump_no_residual() {
        let eos = mis_ideal_gas(1.5);
        let p = PrimState::new([0.2, 0.1, 0.0], 3.0, 0.9, 0.1);
        for sigma in [-0.7, 0.0, 0.4] {
            assert_eq!(rh_residual(&eos, &p, &p, sigma).unwrap(), Vec6::zeros());
        }
    }

    #[test]
    fn transverse_contact_with_balanced_pressure() {
        // Right state: moves in x², different ε, ν chosen so that p + π matches.
        let eos = mis_ideal_gas(1.5);
        let left = reference();
        let pl = derived(&eos, 4.0, 1.0, 0.0).unwrap().total_pressure();
        let eps_r = 5.0;
        let (mut lo, mut hi) = (0.5, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if derived(&eos, eps_r, mid, 0.0).unwrap().total_pressure() > pl {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let right = PrimState::new([0.0, 0.4, 0.0], eps_r, 0.5 * (lo + hi), 0.0);
        let res = rh_residual(&eos, &left, &right, 0.0).unwrap();
        assert!(res.amax() <= 1e-10, "{res:?}");
        assert_eq!(entropy_jump(&eos, &left, &right, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn generic_states_do_not_satisfy_jump_conditions() {
        let eos = mis_ideal_gas(1.5);
        let a = PrimState::new([0.1, 0.0, 0.0], 4.0, 1.0, 0.0);
        let b = PrimState::new([0.0, 0.2, 0.1], 3.0, 0.9, 0.2);
        assert!(rh_residual(&eos, &a, &b, 0.37).unwrap().amax() > 1e-3);
    }

    #[test]
    fn locus_starts_at_branch_point() {
        let eos = mis_ideal_gas(1.5);
        let locus = hugoniot_locus(&eos, &reference(), 6, ContinuationParams { steps: 5, ..Default::default() }).unwrap();
        let p0 = locus.points[0];
        assert_eq!(p0.amplitude, 0.0);
        assert_eq!(p0.entropy_production, 0.0);
        let lam = characteristic_speeds(&eos, &reference(), X1).unwrap()[5];
        assert_eq!(p0.sigma, lam);
        assert_eq!(lax_classify(&eos, &p0).unwrap(), LaxClass::Undetermined);
    }

    #[test]
    fn every_point_satisfies_jump_conditions() {
        let eos = mis_ideal_gas(1.5);
        let locus = hugoniot_locus(&eos, &reference(), 6, ContinuationParams::default()).unwrap();
        assert!(locus.stall.is_none());
        assert_eq!(locus.points.len(), 201);
        let tol = rh_tolerance(&eos, &reference()).unwrap();
        for p in &locus.points {
            assert!(p.residual <= tol);
        }
    }

    #[test]
    fn shock_speed_is_tangent_to_the_mean_characteristic_speed() {
        // σ − λ_k(U_L) = ½(λ_k(U_R) − λ_k(U_L)) + O(a²).
        let eos = mis_ideal_gas(1.5);
        let locus = hugoniot_locus(&eos, &reference(), 6, ContinuationParams { steps: 40, ..Default::default() }).unwrap();
        let lam_l = locus.points[0].sigma;
        let mut k_fit: f64 = 0.0;
        for p in &locus.points[1..] {
            let lam_r = characteristic_speeds(&eos, &p.right, X1).unwrap()[5];
            let dev = (p.sigma - lam_l) - 0.5 * (lam_r - lam_l);
            assert!(dev.abs() <= 5.0 * p.amplitude.powi(2), "a={} dev={dev}", p.amplitude);
            k_fit = k_fit.max((p.sigma - lam_l).abs() / p.amplitude);
        }
        for p in &locus.points[1..] {
            assert!((p.sigma - lam_l).abs() <= k_fit * p.amplitude * (1.0 + 1e-12));
        }
    }

    #[test]
    fn reversed_tangent_gives_the_opposite_branch() {
        let eos = mis_ideal_gas(1.5);
        let params = ContinuationParams { steps: 10, ..Default::default() };
        let fwd = hugoniot_locus(&eos, &reference(), 6, params).unwrap();
        let back = hugoniot_locus(&eos, &reference(), 6, ContinuationParams { direction: -1.0, ..params }).unwrap();
        assert_eq!(fwd.points[0], back.points[0]);
        let lam = fwd.points[0].sigma;
        let d1 = fwd.points[10].sigma - lam;
        let d2 = back.points[10].sigma - lam;
        assert!(d1 * d2 < 0.0, "{d1} {d2}");
        let delta_fwd = fwd.points[1].right.to_vector() - reference().to_vector();
        let delta_back = back.points[1].right.to_vector() - reference().to_vector();
        assert!(delta_fwd.dot(&delta_back) < 0.0);
    }

    #[test]
    fn entropy_sign_follows_lax_admissibility() {
        let eos = mis_ideal_gas(1.5);
        let params = ContinuationParams { steps: 60, ..Default::default() };
        for family in [1, 6] {
            let mut seen = [false; 2];
            for dir in [1.0, -1.0] {
                let locus = hugoniot_locus(&eos, &reference(), family, ContinuationParams { direction: dir, ..params }).unwrap();
                for p in &locus.points[1..] {
                    match lax_classify(&eos, p).unwrap() {
                        LaxClass::Admissible => {
                            assert!(p.entropy_production > 0.0, "{p:?}");
                            seen[0] = true;
                        }
                        LaxClass::NotAdmissible => {
                            assert!(p.entropy_production < 0.0, "{p:?}");
                            seen[1] = true;
                        }
                        LaxClass::Undetermined => {}
                    }
                }
            }
            assert_eq!(seen, [true, true], "family {family}");
        }
    }

    #[test]
    fn frozen_sound_speed_drops_under_compression() {
        // Admissible acoustic shocks at the reference state are therefore
        // rarefying on the downstream side.
        let eos = mis_ideal_gas(1.5);
        let locus = hugoniot_locus(&eos, &reference(), 6, ContinuationParams { steps: 20, ..Default::default() }).unwrap();
        let adm = locus.points[1..].iter().all(|p| lax_classify(&eos, p).unwrap() == LaxClass::Admissible);
        let denser_right = locus.points[1..].iter().all(|p| p.right.nu < p.left.nu);
        assert_eq!(adm, denser_right);
    }

    #[test]
    fn classification_is_mirror_invariant() {
        let eos = mis_ideal_gas(1.5);
        let left = PrimState::new([0.2, 0.0, 0.0], 4.0, 1.0, 0.1);
        for (family, dir) in [(6, 1.0), (6, -1.0), (1, 1.0), (1, -1.0)] {
            let params = ContinuationParams { steps: 30, direction: dir, ..Default::default() };
            let locus = hugoniot_locus(&eos, &left, family, params).unwrap();
            for p in locus.points.iter().step_by(7) {
                let m = p.mirrored();
                assert!(rh_residual(&eos, &m.left, &m.right, m.sigma).unwrap().amax() <= 1e-10);
                assert_eq!(lax_classify(&eos, p).unwrap(), lax_classify(&eos, &m).unwrap());
                let e = shock_entropy_production(&eos, &m).unwrap();
                assert!((e - p.entropy_production).abs() <= 1e-12 + 1e-9 * e.abs());
            }
        }
    }

    #[test]
    fn cubic_entropy_scaling() {
        let eos = mis_ideal_gas(1.5);
        for dir in [1.0, -1.0] {
            let params = ContinuationParams { direction: dir, ..Default::default() };
            let locus = hugoniot_locus(&eos, &reference(), 6, params).unwrap();
            let admissible = lax_classify(&eos, &locus.points[5]).unwrap() == LaxClass::Admissible;
            if admissible {
                let slope = entropy_scaling_slope(&locus.points, 1e-3, 1e-1).unwrap();
                assert!((2.5..=3.5).contains(&slope), "slope {slope}");
            }
        }
    }

    #[test]
    fn repeated_family_rejected() {
        let eos = mis_ideal_gas(1.5);
        assert!(hugoniot_locus(&eos, &reference(), 3, ContinuationParams::default()).is_err());
        assert!(hugoniot_locus(&eos, &reference(), 0, ContinuationParams::default()).is_err());
        let acausal = PrimState::at_rest(1.0, 1.0, 0.0);
        assert!(hugoniot_locus(&eos, &acausal, 6, ContinuationParams::default()).is_err());
    }
}
