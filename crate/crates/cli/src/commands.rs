use mis_core::godunov::{characteristic_speeds, contracted_symmetrizer};
use mis_core::sampling::{random_timelike_covector, rng};
use mis_core::shock::{entropy_scaling_slope, hugoniot_locus, lax_classify, ContinuationParams, LaxClass};
use mis_core::solver::{entropy_refinement, run, Boundary, SimConfig, Trajectory};
use mis_core::thermo::{check_conditions, derived, ChartStatus, Eos};
use mis_core::{Error, PrimState};
use toml::Table;

use crate::config::{default_pulse, default_riemann};
use crate::output::{num, opt, Outputs};
use crate::{CliError, Context};

const SPEED_TOL: f64 = 1e-8;
const DRIFT_TOL: f64 = 1e-12;
const ENTROPY_TOL: f64 = 1e-10;
const COVECTORS_PER_STATE: usize = 20;

fn finish(outputs: Outputs, ctx: &Context, command: &str, failures: Option<String>, summary: Table) -> Result<String, CliError> {
    let line = summary
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ");
    outputs.manifest(ctx, command, failures.is_none(), summary)?;
    match failures {
        None => Ok(format!("{command}: ok {line}")),
        Some(msg) => Err(CliError::Failed(format!("{command}: {msg}"))),
    }
}

pub fn check_eos(ctx: &Context) -> Result<String, CliError> {
    let k = ctx.samples.unwrap_or(1000);
    let eos = ctx.config.eos.build()?;
    let states = ctx.config.sampling.at_rest().sample_n(ctx.seed, k);
    let mut rows = Vec::with_capacity(k);
    let (mut failed, mut concavity, mut cond1, mut cond2) = (0, 0, 0, 0);
    for (i, p) in states.iter().enumerate() {
        let r = check_conditions(eos.as_ref(), p.eps, p.nu, p.c)?;
        failed += usize::from(!r.passes());
        concavity += usize::from(!r.concave);
        cond1 += usize::from(!r.condition_1_ok);
        cond2 += usize::from(!r.condition_2_ok);
        let d = &r.derived;
        let mut row = vec![i.to_string(), num(p.eps), num(p.nu), num(p.c), num(d.s), num(d.theta), num(d.p), num(d.pi)];
        row.extend(r.hessian_eigenvalues.iter().map(|&e| num(e)));
        row.push(match r.chart {
            ChartStatus::Regular => "regular".into(),
            ChartStatus::Singular => "singular".into(),
        });
        row.extend([opt(r.condition_1), opt(r.condition_2), opt(r.isothermal_1), opt(r.isothermal_2)]);
        row.extend([r.concave, r.condition_1_ok, r.condition_2_ok, r.passes()].map(|b| b.to_string()));
        rows.push(row);
    }
    let mut out = Outputs::new(&ctx.out, ctx.config.name_or("check-eos"))?;
    out.csv(
        "conditions.csv",
        &[
            "index", "eps", "nu", "c", "s", "theta", "p", "pi", "hessian_eig_0", "hessian_eig_1", "hessian_eig_2",
            "chart", "condition_1", "condition_2", "isothermal_1", "isothermal_2", "concave", "condition_1_ok",
            "condition_2_ok", "passes",
        ],
        &rows,
        &[],
    )?;
    let mut summary = Table::new();
    summary.insert("samples".into(), (k as i64).into());
    summary.insert("failed".into(), (failed as i64).into());
    summary.insert("concavity_failures".into(), (concavity as i64).into());
    summary.insert("condition_1_failures".into(), (cond1 as i64).into());
    summary.insert("condition_2_failures".into(), (cond2 as i64).into());
    let failures = (failed > 0).then(|| {
        format!("{failed} of {k} states fail ({concavity} concavity, {cond1} condition 1, {cond2} condition 2)")
    });
    finish(out, ctx, "check-eos", failures, summary)
}

struct SpeedRow {
    speeds: [f64; 6],
    max_abs: f64,
    margin: f64,
}

/// Speeds along `x¹` and the smallest signed definiteness margin of the
/// contracted symmetrizer over `ξ = (−1, 0⃗)` and random future boosts.
fn speed_row(eos: &dyn Eos, p: &PrimState, next_xi: &mut dyn FnMut() -> [f64; 4]) -> Result<SpeedRow, Error> {
    let speeds = characteristic_speeds(eos, p, [1.0, 0.0, 0.0])?;
    let mut margin = f64::INFINITY;
    let mut xis = vec![[-1.0, 0.0, 0.0, 0.0]];
    xis.extend((0..COVECTORS_PER_STATE).map(|_| next_xi()));
    for xi in xis {
        let h = contracted_symmetrizer(eos, p, xi)?;
        let n = mis_core::linalg::norm_inf(&h.matrix);
        margin = margin.min(h.eigenvalues[0] / n);
    }
    Ok(SpeedRow { speeds, max_abs: speeds[0].abs().max(speeds[5].abs()), margin })
}

pub fn speeds(ctx: &Context) -> Result<String, CliError> {
    let k = ctx.samples.unwrap_or(100);
    let eos = ctx.config.eos.build()?;
    let bx = &ctx.config.sampling;
    let mut states = Vec::new();
    if k > 0 {
        let mid = |r: [f64; 2]| 0.5 * (r[0] + r[1]);
        states.push(("rest", PrimState::at_rest(mid(bx.eps), mid(bx.nu), mid(bx.c))));
        states.extend(bx.sample_n(ctx.seed, k).into_iter().map(|p| ("sample", p)));
    }
    let mut xi_rng = rng(ctx.seed ^ 0x5eed_c0de);
    let mut next_xi = || random_timelike_covector(&mut xi_rng, 1.5);
    let mut rows = Vec::new();
    let (mut worst_speed, mut worst_margin, mut failed) = (0.0_f64, f64::INFINITY, 0);
    for (i, (kind, p)) in states.iter().enumerate() {
        let mut row = vec![i.to_string(), kind.to_string()];
        row.extend([p.eps, p.nu, p.c, p.u[0], p.u[1], p.u[2]].map(num));
        match speed_row(eos.as_ref(), p, &mut next_xi) {
            Ok(s) => {
                let parity = if *kind == "rest" {
                    num((0..3).map(|j| (s.speeds[j] + s.speeds[5 - j]).abs()).fold(0.0, f64::max))
                } else {
                    String::new()
                };
                row.extend(s.speeds.map(num));
                row.extend([num(s.max_abs), parity, num(s.margin)]);
                worst_speed = worst_speed.max(s.max_abs);
                worst_margin = worst_margin.min(s.margin);
                failed += usize::from(s.max_abs > 1.0 + SPEED_TOL || s.margin < SPEED_TOL);
            }
            Err(Error::PencilDegenerate(_)) => {
                row.extend((0..9).map(|_| "nan".to_string()));
                failed += 1;
            }
            Err(e) => return Err(e.into()),
        }
        rows.push(row);
    }
    let mut out = Outputs::new(&ctx.out, ctx.config.name_or("speeds"))?;
    out.csv(
        "speeds.csv",
        &[
            "index", "kind", "eps", "nu", "c", "u1", "u2", "u3", "lambda_1", "lambda_2", "lambda_3", "lambda_4",
            "lambda_5", "lambda_6", "max_abs_lambda", "parity_defect", "min_definiteness_margin",
        ],
        &rows,
        &[],
    )?;
    let mut summary = Table::new();
    summary.insert("rows".into(), (rows.len() as i64).into());
    summary.insert("failed".into(), (failed as i64).into());
    if !rows.is_empty() {
        summary.insert("max_abs_lambda".into(), worst_speed.into());
        summary.insert("min_definiteness_margin".into(), worst_margin.into());
    }
    let failures = (failed > 0).then(|| format!("{failed} states are not causal or not definite"));
    finish(out, ctx, "speeds", failures, summary)
}

pub fn hugoniot(ctx: &Context) -> Result<String, CliError> {
    let eos = ctx.config.eos.build()?;
    let h = &ctx.config.hugoniot;
    let mut out = Outputs::new(&ctx.out, ctx.config.name_or("hugoniot"))?;
    let mut summary = Table::new();
    let mut violations_total = 0;
    let mut loci = Vec::new();
    for &family in &h.families {
        let mut branches = Vec::new();
        for (label, direction) in [("+", 1.0), ("-", -1.0)] {
            let params = ContinuationParams { steps: h.steps, step_size: h.step_size, direction };
            let locus = hugoniot_locus(eos.as_ref(), &h.left, family, params)?;
            let classes = locus
                .points
                .iter()
                .map(|p| lax_classify(eos.as_ref(), p))
                .collect::<Result<Vec<_>, _>>()?;
            branches.push((label, locus, classes));
        }
        loci.push((family, branches));
    }
    for (family, branches) in loci {
        let mut rows = Vec::new();
        let mut footer = Vec::new();
        let (mut admissible, mut violations) = (0, 0);
        let mut slope = None;
        for (label, locus, classes) in &branches {
            let mut branch_admissible = false;
            for (i, (p, class)) in locus.points.iter().zip(classes).enumerate() {
                if *class == LaxClass::Admissible && p.amplitude <= h.weak_amplitude {
                    admissible += 1;
                    branch_admissible = true;
                    violations += usize::from(p.entropy_production <= 0.0);
                }
                let mut row = vec![label.to_string(), i.to_string()];
                row.extend([p.arclength, p.amplitude, p.sigma, p.entropy_production].map(num));
                row.push(class.label().into());
                row.push(num(p.residual));
                row.extend(p.right.to_array().map(num));
                rows.push(row);
            }
            if branch_admissible {
                slope = entropy_scaling_slope(&locus.points, 1e-3, 1e-1_f64.min(h.weak_amplitude));
            }
            if let Some(stall) = &locus.stall {
                footer.push((format!("stall_{label}"), format!("step {} {}", stall.step, stall.reason)));
            }
        }
        footer.insert(0, ("entropy_violations".into(), violations.to_string()));
        footer.insert(0, ("admissible_weak_points".into(), admissible.to_string()));
        footer.insert(0, ("slope".into(), opt(slope)));
        out.csv(
            &format!("family{family}.csv"),
            &[
                "branch", "step", "arclength", "amplitude", "sigma", "entropy_production", "lax", "rh_residual", "u1",
                "u2", "u3", "eps", "nu", "c",
            ],
            &rows,
            &footer,
        )?;
        let mut fam = Table::new();
        fam.insert("admissible_weak_points".into(), (admissible as i64).into());
        fam.insert("entropy_violations".into(), (violations as i64).into());
        if let Some(s) = slope {
            fam.insert("slope".into(), s.into());
        }
        summary.insert(format!("family{family}"), fam.into());
        violations_total += violations;
    }
    let failures =
        (violations_total > 0).then(|| format!("{violations_total} admissible weak points with E ≤ 0"));
    finish(out, ctx, "hugoniot", failures, summary)
}

fn snapshot_rows(eos: &dyn Eos, tr: &Trajectory, step: usize) -> Result<Vec<Vec<String>>, CliError> {
    let snap = tr.snapshots.iter().find(|s| s.step == step).expect("snapshot exists");
    snap.prim
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d = derived(eos, p.eps, p.nu, p.c)?;
            Ok([snap.t, tr.grid.center(i), p.eps, p.nu, p.c, p.u[0], d.pi, d.theta, d.p].map(num).to_vec())
        })
        .collect()
}

fn write_trajectory(out: &mut Outputs, sim: &SimConfig, tr: &Trajectory) -> Result<(), CliError> {
    let eos = sim.eos.build()?;
    for s in &tr.snapshots {
        let rows = snapshot_rows(eos.as_ref(), tr, s.step)?;
        out.csv(&format!("{}.csv", s.step), &["t", "x", "eps", "nu", "c", "u1", "pi", "theta", "p"], &rows, &[])?;
    }
    let rows: Vec<Vec<String>> = (0..=tr.audit.steps)
        .map(|n| {
            let h = tr.audit.entropy.get(n).copied();
            let dh = match (n.checked_sub(1).and_then(|m| tr.audit.entropy.get(m)), h) {
                (Some(prev), Some(h)) => Some((h - prev) / prev.abs()),
                _ => None,
            };
            vec![n.to_string(), opt(h), opt(dh), opt(tr.audit.max_abs_pi.get(n).copied())]
        })
        .collect();
    out.csv("audit.csv", &["step", "total_entropy", "relative_increment", "max_abs_pi"], &rows, &[])
}

fn trajectory_summary(tr: &Trajectory) -> Table {
    let a = &tr.audit;
    let mut s = Table::new();
    s.insert("steps".into(), (a.steps as i64).into());
    s.insert("t_final".into(), tr.grid.t.into());
    s.insert("max_conservation_drift".into(), a.max_drift().into());
    if a.min_entropy_increment.is_finite() {
        s.insert("min_entropy_increment".into(), a.min_entropy_increment.into());
    }
    if let Some(p) = a.max_abs_pi.last() {
        s.insert("max_abs_pi_final".into(), (*p).into());
    }
    s.insert("recovery_max_iterations".into(), (a.recovery.max_iterations as i64).into());
    if a.recovery.recoveries > 0 {
        let mean = a.recovery.total_iterations as f64 / a.recovery.recoveries as f64;
        s.insert("recovery_mean_iterations".into(), mean.into());
    }
    if let Some(e) = &tr.failure {
        s.insert("failure".into(), e.to_string().into());
    }
    s
}

fn entropy_failure(sim: &SimConfig, tr: &Trajectory) -> Option<String> {
    // Boundary fluxes carry entropy through outflow edges.
    (sim.boundary == Boundary::Periodic && tr.audit.min_entropy_increment < -ENTROPY_TOL).then(|| {
        format!("total entropy decreased by {:.3e} (relative) in one step", -tr.audit.min_entropy_increment)
    })
}

pub fn simulate(ctx: &Context, audit: bool) -> Result<String, CliError> {
    let sim = ctx.config.simulation_or(default_riemann());
    let tr = run(&sim)?;
    let mut out = Outputs::new(&ctx.out, ctx.config.name_or("simulate"))?;
    write_trajectory(&mut out, &sim, &tr)?;
    let mut failures = tr.failure.as_ref().map(|e| format!("run stopped early: {e}"));
    if audit && failures.is_none() {
        if sim.boundary == Boundary::Periodic && tr.audit.max_drift() > DRIFT_TOL {
            failures = Some(format!("conservation drift {:.3e} per step", tr.audit.max_drift()));
        } else {
            failures = entropy_failure(&sim, &tr);
        }
    }
    finish(out, ctx, "simulate", failures, trajectory_summary(&tr))
}

pub fn entropy_audit(ctx: &Context, audit: bool) -> Result<String, CliError> {
    let sim = ctx.config.simulation_or(default_pulse());
    let tr = run(&sim)?;
    let levels = if audit {
        let ea = &ctx.config.entropy_audit;
        let cells: Vec<usize> = (0..ea.levels).map(|l| sim.cells << l).collect();
        Some(entropy_refinement(&sim, &cells, ea.t_audit)?)
    } else {
        None
    };
    let mut out = Outputs::new(&ctx.out, ctx.config.name_or("entropy-audit"))?;
    write_trajectory(&mut out, &sim, &tr)?;
    let mut summary = trajectory_summary(&tr);
    let mut failures = tr.failure.as_ref().map(|e| format!("run stopped early: {e}")).or_else(|| entropy_failure(&sim, &tr));
    if let Some(levels) = levels {
        let rows: Vec<Vec<String>> = levels
            .iter()
            .map(|l| {
                vec![l.cells.to_string(), num(l.t), num(l.max_residual), num(l.l1_residual), num(l.max_production)]
            })
            .collect();
        out.csv("entropy_refinement.csv", &["cells", "t", "max_residual", "l1_residual", "max_production"], &rows, &[])?;
        let residuals: Vec<toml::Value> = levels.iter().map(|l| l.max_residual.into()).collect();
        summary.insert("pointwise_max_residuals".into(), residuals.into());
        let decreasing = levels.windows(2).all(|w| w[1].max_residual < w[0].max_residual);
        if !decreasing && failures.is_none() {
            failures = Some("pointwise entropy residual does not decrease under refinement".into());
        }
    }
    finish(out, ctx, "entropy-audit", failures, summary)
}
