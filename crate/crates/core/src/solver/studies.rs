//! Multi-run studies built on [`run`](super::run): relaxation-time sweeps,
//! self-convergence and the smooth-flow entropy balance on solver output.

use crate::error::{Error, Result};
use crate::fluxes::{entropy_flux, ConstantRelaxation, RelaxationCoefficient};
use crate::thermo::{derived, Eos};

use super::{run, Boundary, Grid1D, SimConfig, Solver};

/// `(τ, max|π|)` at the end time for each relaxation time.
pub fn relaxation_sweep(base: &SimConfig, taus: &[f64]) -> Result<Vec<(f64, f64)>> {
    taus.iter()
        .map(|&tau| {
            let cfg = SimConfig { tau, ..base.clone() };
            let tr = run(&cfg)?;
            if let Some(e) = tr.failure {
                return Err(e);
            }
            Ok((tau, tr.grid.max_abs_pi(cfg.eos.build()?.as_ref())?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfConvergence {
    pub cells: [usize; 3],
    /// `‖U_N − ⟨U_2N⟩‖₁` and `‖U_2N − ⟨U_4N⟩‖₁` over conserved variables.
    pub errors: [f64; 2],
    pub order: f64,
}

/// Runs at `N`, `2N`, `4N` cells and compares each level with the pairwise
/// cell average of the next finer one.
pub fn self_convergence(base: &SimConfig) -> Result<SelfConvergence> {
    let n = base.cells;
    let cells = [n, 2 * n, 4 * n];
    let mut grids = Vec::with_capacity(3);
    for &c in &cells {
        let tr = run(&SimConfig { cells: c, ..base.clone() })?;
        if let Some(e) = tr.failure {
            return Err(e);
        }
        grids.push(tr.grid);
    }
    let diff = |coarse: &Grid1D, fine: &Grid1D| -> f64 {
        let mut e = 0.0;
        for (i, c) in coarse.cons.iter().enumerate() {
            let avg = (fine.cons[2 * i].to_vector() + fine.cons[2 * i + 1].to_vector()) * 0.5;
            e += (c.to_vector() - avg).abs().sum() * coarse.dx;
        }
        e
    };
    let errors = [diff(&grids[0], &grids[1]), diff(&grids[1], &grids[2])];
    Ok(SelfConvergence { cells, errors, order: (errors[0] / errors[1]).log2() })
}

/// Pointwise `∂_t S⁰ + ∂_x S¹ − M π²/θ` at the middle of three consecutive
/// solver states, with centred differences (non-uniform in time).
/// Periodic grids use every cell, outflow grids skip the two edge cells.
pub fn grid_entropy_residual(
    eos: &dyn Eos,
    relax: &dyn RelaxationCoefficient,
    prev: &Grid1D,
    cur: &Grid1D,
    next: &Grid1D,
) -> Result<Vec<f64>> {
    let n = cur.len();
    if prev.len() != n || next.len() != n {
        return Err(Error::Domain("grids differ in size".into()));
    }
    let hm = cur.t - prev.t;
    let hp = next.t - cur.t;
    if !(hm > 0.0 && hp > 0.0) {
        return Err(Error::Domain("snapshots must be strictly increasing in time".into()));
    }
    let s = |g: &Grid1D| -> Result<Vec<[f64; 4]>> { g.prim.iter().map(|p| entropy_flux(eos, p)).collect() };
    let (sm, s0, sp) = (s(prev)?, s(cur)?, s(next)?);
    let range: Vec<usize> = match cur.boundary {
        Boundary::Periodic => (0..n).collect(),
        Boundary::Outflow => (1..n - 1).collect(),
    };
    range
        .into_iter()
        .map(|i| {
            let dt_s0 = (hm * hm * sp[i][0] - hp * hp * sm[i][0] + (hp * hp - hm * hm) * s0[i][0])
                / (hm * hp * (hm + hp));
            let (l, r) = ((i + n - 1) % n, (i + 1) % n);
            let dx_s1 = (s0[r][1] - s0[l][1]) / (2.0 * cur.dx);
            let p = &cur.prim[i];
            let d = derived(eos, p.eps, p.nu, p.c)?;
            let production = relax.rate(p, &d) * d.pi * d.pi / d.theta;
            Ok(dt_s0 + dx_s1 - production)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyAuditLevel {
    pub cells: usize,
    pub t: f64,
    pub max_residual: f64,
    /// `Σ |r_i| Δx`.
    pub l1_residual: f64,
    /// `max_i M π²/θ`, for scale.
    pub max_production: f64,
}

/// Marches each resolution with full CFL steps to just before `t_audit`
/// and evaluates [`grid_entropy_residual`] around that time.
pub fn entropy_refinement(base: &SimConfig, cells: &[usize], t_audit: f64) -> Result<Vec<EntropyAuditLevel>> {
    base.validate()?;
    let eos = base.eos.build()?;
    let eos = eos.as_ref();
    let relax = ConstantRelaxation::new(base.tau);
    cells
        .iter()
        .map(|&n| {
            let cfg = SimConfig { cells: n, ..base.clone() };
            let solver = Solver::new(eos, &relax, cfg.cfl).with_scheme(cfg.scheme);
            let mut prev = Grid1D::from_config(eos, &cfg)?;
            let mut cur = solver.step(&prev, solver.cfl_dt(&prev)?)?.0;
            loop {
                let dt = solver.cfl_dt(&cur)?;
                let next = solver.step(&cur, dt)?.0;
                if next.t > t_audit {
                    let r = grid_entropy_residual(eos, &relax, &prev, &cur, &next)?;
                    let mut max_production: f64 = 0.0;
                    for p in &cur.prim {
                        let d = derived(eos, p.eps, p.nu, p.c)?;
                        max_production = max_production.max(relax.rate(p, &d) * d.pi * d.pi / d.theta);
                    }
                    return Ok(EntropyAuditLevel {
                        cells: n,
                        t: cur.t,
                        max_residual: r.iter().fold(0.0, |m, v| m.max(v.abs())),
                        l1_residual: r.iter().map(|v| v.abs()).sum::<f64>() * cur.dx,
                        max_production,
                    });
                }
                prev = cur;
                cur = next;
            }
        })
        .collect()
}
