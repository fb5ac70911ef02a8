//! Finite-volume evolution along `x¹` with a Strang-split relaxation source.
//!
//! One step is: relaxation half step, hyperbolic step with the Rusanov
//! interface flux, relaxation half step. The relaxation sub-step integrates
//! `dC/dτ = −M ν π` with `(u, ε, ν)` frozen and `dτ = dt/u⁰`, changing only
//! the last conserved component, so components 0–4 are conserved exactly up
//! to rounding.

mod config;
mod studies;

pub use config::{AuditToggles, Boundary, InitialCondition, Scheme, SimConfig};
pub use studies::{
    entropy_refinement, grid_entropy_residual, relaxation_sweep, self_convergence, EntropyAuditLevel,
    SelfConvergence,
};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fluxes::{entropy_flux, flux, ConstantRelaxation, RelaxationCoefficient};
use crate::godunov::max_speed_x;
use crate::linalg::Vec6;
use crate::state::{recover_primitive_stats, to_conserved, ConsState, PrimState};
use crate::thermo::{derived, derived_with_jacobian, Eos};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub x_lo: f64,
    pub x_hi: f64,
    pub dx: f64,
    pub cons: Vec<ConsState>,
    pub prim: Vec<PrimState>,
    pub boundary: Boundary,
    pub t: f64,
}

impl Grid1D {
    pub fn new(eos: &dyn Eos, domain: [f64; 2], boundary: Boundary, prim: Vec<PrimState>) -> Result<Self> {
        if prim.len() < 4 {
            return Err(Error::Config(format!("need at least 4 cells, got {}", prim.len())));
        }
        let cons = prim
            .iter()
            .enumerate()
            .map(|(i, p)| to_conserved(eos, p).map_err(|e| cell_error(i, e)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            x_lo: domain[0],
            x_hi: domain[1],
            dx: (domain[1] - domain[0]) / prim.len() as f64,
            cons,
            prim,
            boundary,
            t: 0.0,
        })
    }

    pub fn from_fn(
        eos: &dyn Eos,
        cells: usize,
        domain: [f64; 2],
        boundary: Boundary,
        f: impl Fn(f64) -> PrimState,
    ) -> Result<Self> {
        let dx = (domain[1] - domain[0]) / cells as f64;
        let prim = (0..cells).map(|i| f(domain[0] + (i as f64 + 0.5) * dx)).collect();
        Self::new(eos, domain, boundary, prim)
    }

    pub fn from_config(eos: &dyn Eos, config: &SimConfig) -> Result<Self> {
        Self::from_fn(eos, config.cells, config.domain, config.boundary, |x| {
            config.initial.state_at(x, config.domain)
        })
    }

    pub fn len(&self) -> usize {
        self.cons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cons.is_empty()
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_lo + (i as f64 + 0.5) * self.dx
    }

    /// `Σ c_i Δx`, summed in cell order.
    pub fn totals(&self) -> [f64; 6] {
        let mut t = [0.0; 6];
        for c in &self.cons {
            for k in 0..6 {
                t[k] += c.0[k] * self.dx;
            }
        }
        t
    }

    /// `Σ |c_i| Δx` per component.
    pub fn l1_norms(&self) -> [f64; 6] {
        let mut t = [0.0; 6];
        for c in &self.cons {
            for k in 0..6 {
                t[k] += c.0[k].abs() * self.dx;
            }
        }
        t
    }

    /// `Σ S⁰ Δx`.
    pub fn total_entropy(&self, eos: &dyn Eos) -> Result<f64> {
        let mut total = 0.0;
        for p in &self.prim {
            total += entropy_flux(eos, p)?[0] * self.dx;
        }
        Ok(total)
    }

    pub fn max_abs_pi(&self, eos: &dyn Eos) -> Result<f64> {
        let mut m: f64 = 0.0;
        for p in &self.prim {
            m = m.max(derived(eos, p.eps, p.nu, p.c)?.pi.abs());
        }
        Ok(m)
    }
}

fn cell_error(cell: usize, e: Error) -> Error {
    Error::Cell { cell, source: Box::new(e) }
}

/// Collects per-cell results, reporting the lowest failing cell.
fn collect_cells<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| cell_error(i, e)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub recoveries: usize,
    pub total_iterations: usize,
    pub max_iterations: usize,
}

impl StepStats {
    fn record(&mut self, iterations: usize) {
        self.recoveries += 1;
        self.total_iterations += iterations;
        self.max_iterations = self.max_iterations.max(iterations);
    }

    fn merge(&mut self, other: StepStats) {
        self.recoveries += other.recoveries;
        self.total_iterations += other.total_iterations;
        self.max_iterations = self.max_iterations.max(other.max_iterations);
    }
}

pub struct Solver<'a> {
    pub eos: &'a dyn Eos,
    pub relaxation: &'a dyn RelaxationCoefficient,
    pub cfl: f64,
    pub scheme: Scheme,
}

#[derive(Clone)]
struct CellData {
    flux: Vec6,
    cons: Vec6,
    speed: f64,
}

impl<'a> Solver<'a> {
    pub fn new(eos: &'a dyn Eos, relaxation: &'a dyn RelaxationCoefficient, cfl: f64) -> Self {
        Self { eos, relaxation, cfl, scheme: Scheme::Rusanov }
    }

    pub fn with_scheme(self, scheme: Scheme) -> Self {
        Self { scheme, ..self }
    }

    fn speeds(&self, prim: &[PrimState]) -> Result<Vec<f64>> {
        collect_cells(prim.par_iter().map(|p| max_speed_x(self.eos, p)).collect())
    }

    /// `CFL·Δx / max_i max|λ|`.
    pub fn cfl_dt(&self, grid: &Grid1D) -> Result<f64> {
        let smax = self.speeds(&grid.prim)?.into_iter().fold(0.0, f64::max);
        if smax > 0.0 {
            Ok(self.cfl * grid.dx / smax)
        } else {
            Err(Error::Domain("vanishing characteristic speeds".into()))
        }
    }

    fn cell_data(&self, p: &PrimState) -> Result<CellData> {
        Ok(CellData {
            flux: flux(self.eos, p, 1)?,
            cons: to_conserved(self.eos, p)?.to_vector(),
            speed: max_speed_x(self.eos, p)?,
        })
    }

    fn rusanov(l: &CellData, r: &CellData) -> Vec6 {
        let a = l.speed.max(r.speed);
        (l.flux + r.flux) * 0.5 - (r.cons - l.cons) * (0.5 * a)
    }

    /// Interface fluxes `f[j]` on the left face of cell `j`, `j = 0..=N`.
    fn interface_fluxes(&self, prim: &[PrimState], boundary: Boundary) -> Result<Vec<Vec6>> {
        let n = prim.len();
        let (left, right): (Vec<CellData>, Vec<CellData>) = match self.scheme {
            Scheme::Rusanov => {
                let cells = collect_cells(prim.par_iter().map(|p| self.cell_data(p)).collect())?;
                (cells.clone(), cells)
            }
            Scheme::Muscl => {
                let traces = self.muscl_traces(prim, boundary);
                let results: Vec<Result<(CellData, CellData)>> = traces
                    .par_iter()
                    .map(|(minus, plus)| Ok((self.cell_data(minus)?, self.cell_data(plus)?)))
                    .collect();
                collect_cells(results)?.into_iter().unzip()
            }
        };
        // `left[i]` is the trace at the left face of cell i, `right[i]` at its right face.
        let face = |i_left: usize, i_right: usize| Self::rusanov(&right[i_left], &left[i_right]);
        let mut f = Vec::with_capacity(n + 1);
        match boundary {
            Boundary::Periodic => f.push(face(n - 1, 0)),
            Boundary::Outflow => f.push(left[0].flux),
        }
        f.extend((0..n - 1).into_par_iter().map(|i| face(i, i + 1)).collect::<Vec<_>>());
        match boundary {
            Boundary::Periodic => f.push(f[0]),
            Boundary::Outflow => f.push(right[n - 1].flux),
        }
        Ok(f)
    }

    /// Minmod-limited traces `(U_{i−½}^+, U_{i+½}^−)` per cell, falling back
    /// to the cell value when a trace is inadmissible.
    fn muscl_traces(&self, prim: &[PrimState], boundary: Boundary) -> Vec<(PrimState, PrimState)> {
        let n = prim.len();
        let at = |i: isize| -> Vec6 {
            let j = match boundary {
                Boundary::Periodic => i.rem_euclid(n as isize) as usize,
                Boundary::Outflow => i.clamp(0, n as isize - 1) as usize,
            };
            prim[j].to_vector()
        };
        (0..n)
            .into_par_iter()
            .map(|i| {
                let i = i as isize;
                let (um, u0, up) = (at(i - 1), at(i), at(i + 1));
                let slope = Vec6::from_fn(|k, _| minmod(u0[k] - um[k], up[k] - u0[k]));
                let minus = PrimState::from_array((u0 - slope * 0.5).into());
                let plus = PrimState::from_array((u0 + slope * 0.5).into());
                let fallback = PrimState::from_array(u0.into());
                if minus.check(self.eos).is_ok() && plus.check(self.eos).is_ok() {
                    (minus, plus)
                } else {
                    (fallback, fallback)
                }
            })
            .collect()
    }

    /// `−(f_{i+½} − f_{i−½}) / Δx`.
    fn hyperbolic_rhs(&self, prim: &[PrimState], boundary: Boundary, dx: f64) -> Result<Vec<Vec6>> {
        let f = self.interface_fluxes(prim, boundary)?;
        Ok((0..prim.len()).map(|i| -(f[i + 1] - f[i]) / dx).collect())
    }

    fn recover_all(&self, cons: &[ConsState], guess: &[PrimState]) -> Result<(Vec<PrimState>, StepStats)> {
        let rec = collect_cells(
            cons.par_iter()
                .zip(guess.par_iter())
                .map(|(c, g)| recover_primitive_stats(self.eos, c, g))
                .collect(),
        )?;
        let mut stats = StepStats::default();
        let prim = rec
            .into_iter()
            .map(|r| {
                stats.record(r.iterations);
                r.state
            })
            .collect();
        Ok((prim, stats))
    }

    /// Relaxation over a coordinate-time interval `h` in every cell.
    fn relax(&self, grid: &mut Grid1D, h: f64) -> Result<StepStats> {
        let results: Vec<Result<Option<(ConsState, PrimState, usize)>>> = grid
            .cons
            .par_iter()
            .zip(grid.prim.par_iter())
            .map(|(c, p)| self.relax_cell(c, p, h))
            .collect();
        let mut stats = StepStats::default();
        for (i, r) in collect_cells(results)?.into_iter().enumerate() {
            if let Some((c, p, it)) = r {
                grid.cons[i] = c;
                grid.prim[i] = p;
                stats.record(it);
            }
        }
        Ok(stats)
    }

    fn relax_cell(&self, cons: &ConsState, prim: &PrimState, h: f64) -> Result<Option<(ConsState, PrimState, usize)>> {
        let c1 = relax_c(self.eos, self.relaxation, prim, h)?;
        if c1 == prim.c {
            return Ok(None);
        }
        let mut c = *cons;
        c.0[5] += prim.n() * prim.u0() * (c1 - prim.c);
        let guess = PrimState { c: c1, ..*prim };
        let r = recover_primitive_stats(self.eos, &c, &guess)?;
        Ok(Some((c, r.state, r.iterations)))
    }

    fn hyperbolic(&self, grid: &mut Grid1D, dt: f64) -> Result<StepStats> {
        let lambda = dt;
        match self.scheme {
            Scheme::Rusanov => {
                let rhs = self.hyperbolic_rhs(&grid.prim, grid.boundary, grid.dx)?;
                let cons: Vec<ConsState> =
                    grid.cons.iter().zip(&rhs).map(|(c, r)| ConsState::from(c.to_vector() + r * lambda)).collect();
                let (prim, stats) = self.recover_all(&cons, &grid.prim)?;
                grid.cons = cons;
                grid.prim = prim;
                Ok(stats)
            }
            Scheme::Muscl => {
                let rhs = self.hyperbolic_rhs(&grid.prim, grid.boundary, grid.dx)?;
                let stage: Vec<ConsState> =
                    grid.cons.iter().zip(&rhs).map(|(c, r)| ConsState::from(c.to_vector() + r * lambda)).collect();
                let (stage_prim, mut stats) = self.recover_all(&stage, &grid.prim)?;
                let rhs2 = self.hyperbolic_rhs(&stage_prim, grid.boundary, grid.dx)?;
                let cons: Vec<ConsState> = grid
                    .cons
                    .iter()
                    .zip(&stage)
                    .zip(&rhs2)
                    .map(|((c0, c1), r)| ConsState::from((c0.to_vector() + c1.to_vector() + r * lambda) * 0.5))
                    .collect();
                let (prim, s2) = self.recover_all(&cons, &stage_prim)?;
                stats.merge(s2);
                grid.cons = cons;
                grid.prim = prim;
                Ok(stats)
            }
        }
    }

    /// Advances by `dt`; the input grid is untouched on failure.
    pub fn step(&self, grid: &Grid1D, dt: f64) -> Result<(Grid1D, StepStats)> {
        let mut g = grid.clone();
        let mut stats = self.relax(&mut g, 0.5 * dt)?;
        stats.merge(self.hyperbolic(&mut g, dt)?);
        stats.merge(self.relax(&mut g, 0.5 * dt)?);
        g.t = grid.t + dt;
        Ok((g, stats))
    }
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Implicit midpoint step for `dC/dt = −M ν π(ε, ν, C) / u⁰` with
/// `(u, ε, ν)` frozen.
pub fn relax_c(eos: &dyn Eos, m: &dyn RelaxationCoefficient, prim: &PrimState, h: f64) -> Result<f64> {
    let d0 = derived(eos, prim.eps, prim.nu, prim.c)?;
    if d0.pi == 0.0 || h == 0.0 {
        return Ok(prim.c);
    }
    let k = h * m.rate(prim, &d0) * prim.nu / prim.u0();
    let c0 = prim.c;
    let mut c1 = c0;
    for _ in 0..60 {
        let mid = 0.5 * (c0 + c1);
        let (d, jac) = derived_with_jacobian(eos, prim.eps, prim.nu, mid)?;
        let g = c1 - c0 + k * d.pi;
        let dg = 1.0 + 0.5 * k * jac.pi[2];
        if dg <= 0.0 {
            return Err(Error::Domain(format!("relaxation step lost monotonicity at {prim:?}")));
        }
        let delta = g / dg;
        c1 -= delta;
        if delta.abs() <= 1e-15 * (1.0 + c1.abs()) {
            return Ok(c1);
        }
    }
    Err(Error::Domain(format!("relaxation solve did not converge at {prim:?}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub prim: Vec<PrimState>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuditReport {
    pub steps: usize,
    pub totals_initial: [f64; 6],
    pub totals_final: [f64; 6],
    /// Worst per-step change of `Σ c_k Δx` relative to `Σ |c_k| Δx`.
    pub max_conservation_drift: [f64; 5],
    /// `Σ S⁰ Δx` after every step, starting with the initial value.
    pub entropy: Vec<f64>,
    /// `min_n (H_{n+1} − H_n) / |H_n|`.
    pub min_entropy_increment: f64,
    pub max_abs_pi: Vec<f64>,
    pub recovery: StepStats,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl AuditReport {
    pub fn max_drift(&self) -> f64 {
        self.max_conservation_drift.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid1D,
    pub snapshots: Vec<Snapshot>,
    pub audit: AuditReport,
    /// Set when a step failed; the trajectory ends at the last good state.
    pub failure: Option<Error>,
}

pub fn run(config: &SimConfig) -> Result<Trajectory> {
    config.validate()?;
    let eos = config.eos.build()?;
    let relax = ConstantRelaxation::new(config.tau);
    let grid = Grid1D::from_config(eos.as_ref(), config)?;
    run_grid(eos.as_ref(), &relax, config, grid)
}

pub fn run_grid(
    eos: &dyn Eos,
    relax: &dyn RelaxationCoefficient,
    config: &SimConfig,
    mut grid: Grid1D,
) -> Result<Trajectory> {
    let solver = Solver::new(eos, relax, config.cfl).with_scheme(config.scheme);
    let max_steps = config.max_steps.unwrap_or(usize::MAX);
    let mut audit = AuditReport {
        totals_initial: grid.totals(),
        min_entropy_increment: f64::INFINITY,
        dt_min: f64::INFINITY,
        ..Default::default()
    };
    if config.audits.entropy {
        audit.entropy.push(grid.total_entropy(eos)?);
    }
    audit.max_abs_pi.push(grid.max_abs_pi(eos)?);
    let snap = |g: &Grid1D, step| Snapshot { step, t: g.t, prim: g.prim.clone() };
    let mut snapshots = vec![snap(&grid, 0)];
    let mut failure = None;
    let mut step = 0;
    while step < max_steps && grid.t < config.t_end * (1.0 - 1e-14) {
        let next = solver.cfl_dt(&grid).and_then(|dt| {
            let dt = dt.min(config.t_end - grid.t);
            solver.step(&grid, dt).map(|r| (dt, r))
        });
        let (dt, (g, stats)) = match next {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        step += 1;
        if config.audits.conservation {
            let (before, after, l1) = (grid.totals(), g.totals(), g.l1_norms());
            let scale = l1[..5].iter().copied().fold(0.0, f64::max);
            for k in 0..5 {
                let denom = if l1[k] > 0.0 { l1[k] } else { scale.max(f64::MIN_POSITIVE) };
                let drift = (after[k] - before[k]).abs() / denom;
                audit.max_conservation_drift[k] = audit.max_conservation_drift[k].max(drift);
            }
        }
        if config.audits.entropy {
            let h = g.total_entropy(eos)?;
            let prev = *audit.entropy.last().expect("initial entropy recorded");
            audit.min_entropy_increment = audit.min_entropy_increment.min((h - prev) / prev.abs());
            audit.entropy.push(h);
        }
        audit.max_abs_pi.push(g.max_abs_pi(eos)?);
        audit.recovery.merge(stats);
        audit.dt_min = audit.dt_min.min(dt);
        audit.dt_max = audit.dt_max.max(dt);
        grid = g;
        if config.snapshot_every > 0 && step % config.snapshot_every == 0 {
            snapshots.push(snap(&grid, step));
        }
    }
    if snapshots.last().map(|s| s.step) != Some(step) {
        snapshots.push(snap(&grid, step));
    }
    audit.steps = step;
    audit.totals_final = grid.totals();
    Ok(Trajectory { grid, snapshots, audit, failure })
}
