use std::fs;
use std::path::{Path, PathBuf};

use idplim_core::limiters::{detect_violations, limit_cell_averages, LimiterOptions};
use idplim_core::projection::{kkt_residual, project_detailed, project_row};
use idplim_core::solvers::tune_gamma;
use idplim_core::{AdmissibleSet, CellAverageField, ConservationTarget, ConservedState, SolverConfig};
use idplim_gasdyn::benchmarks::{jet_simulation, run_benchmark, sedov_simulation, write_json};
use idplim_gasdyn::datasets::{advect_1d_rkdg, lax_base_field, lax_perturbation_dataset, triangle_square, AdvectionConfig, LaxConfig};
use idplim_gasdyn::manufactured::{convergence_study, manufactured_convergence, write_errors_csv, Manufactured};
use idplim_gasdyn::SimConfig;
use serde_json::json;

use crate::error::{CliError, Result};
use crate::{selftest, Command, Report, SimArgs, SolverArgs};

pub fn execute(cmd: &Command, out: &Path, report: &mut Report) -> Result<()> {
    match cmd {
        Command::Project { dim, point, input, epsilon } => project(*dim, point.as_deref(), input.as_deref(), *epsilon, out, report),
        Command::Limit { input, solver } => limit(input, solver, out, report),
        Command::SynthAdvect { mesh, degree, dt, steps, t_end } => synth_advect(*mesh, *degree, *dt, *steps, *t_end, out, report),
        Command::SynthLax { mesh, count, seed, epsilon } => synth_lax(*mesh, *count, *seed, *epsilon, out, report),
        Command::Convergence { meshes, sim, solver } => convergence(meshes, sim, solver, out, report),
        Command::Sedov { sim, solver } => benchmark("sedov", SimConfig::sedov(), sim, solver, out, report),
        Command::Jet { sim, solver } => benchmark("jet", SimConfig::jet(), sim, solver, out, report),
        Command::TuneGamma { inputs, grid, count, seed, solver } => tune(inputs, grid, *count, *seed, solver, report),
        Command::Selftest { seed } => {
            report.defaults = "selftest".into();
            report.parameters = json!({ "seed": seed });
            let checks = selftest::run_all(*seed);
            for c in &checks {
                eprintln!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            report.result = json!({ "checks": checks, "failed": failed });
            if failed > 0 {
                return Err(CliError::SelftestFailed(failed));
            }
            Ok(())
        }
    }
}

fn project(
    dim: Option<usize>,
    point: Option<&[f64]>,
    input: Option<&Path>,
    epsilon: f64,
    out: &Path,
    report: &mut Report,
) -> Result<()> {
    report.defaults = "project".into();
    report.parameters = json!({ "dim": dim, "point": point, "in": input, "epsilon": epsilon });
    let set = AdmissibleSet::with_epsilon(epsilon)?;
    match (point, input) {
        (Some(p), None) => {
            if let Some(d) = dim {
                if p.len() != d + 2 {
                    return Err(CliError::Usage(format!("--dim {d} needs {} components, got {}", d + 2, p.len())));
                }
            }
            let s = ConservedState::from_components(p)?;
            let o = project_detailed(&s, &set)?;
            report.result = json!({
                "input": p,
                "projected": o.state.components(),
                "case": o.case_id.map(|c| format!("{c:?}")),
                "fallback": o.fallback,
                "distance": s.distance_sq(&o.state).sqrt(),
                "kkt_residual": kkt_residual(&s, &o.state, &set),
            });
        }
        (None, Some(path)) => {
            let (mut field, _) = CellAverageField::load(path)?;
            let nc = field.n_components();
            let (mut changed, mut fallbacks, mut worst_kkt) = (0usize, 0usize, 0.0f64);
            for row in field.data_mut().chunks_exact_mut(nc) {
                if set.contains_row(row) {
                    continue;
                }
                let before = ConservedState::from_components(row)?;
                fallbacks += project_row(row, &set)? as usize;
                changed += 1;
                worst_kkt = worst_kkt.max(kkt_residual(&before, &ConservedState::from_components(row)?, &set));
            }
            field.save(&out.join("projected.csv"), Some(epsilon))?;
            report.outputs.push("projected.csv".into());
            report.result = json!({
                "n_cells": field.n_cells(),
                "projected_rows": changed,
                "fallback_events": fallbacks,
                "max_kkt_residual": worst_kkt,
            });
        }
        _ => return Err(CliError::Usage("give exactly one of --point or --in".into())),
    }
    Ok(())
}

fn limit(input: &Path, solver: &SolverArgs, out: &Path, report: &mut Report) -> Result<()> {
    report.defaults = "limiter".into();
    let (field, meta) = CellAverageField::load(input)?;
    let mut opts = LimiterOptions::default();
    if let Some(e) = meta.epsilon {
        opts.epsilon = e;
    }
    solver.apply(&mut opts);
    report.parameters = json!({ "in": input, "limiter": opts });
    let set = AdmissibleSet::with_epsilon(opts.epsilon)?;
    let before = detect_violations(&field, &set).len();
    let target = ConservationTarget::from_field(&field);
    let (limited, rep) = limit_cell_averages(&field, &target, &opts)?;
    limited.save(&out.join("limited.csv"), Some(opts.epsilon))?;
    report.outputs.push("limited.csv".into());
    let max_cons = rep.conservation_residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    report.result = json!({
        "n_cells": field.n_cells(),
        "violations_before": before,
        "violations_after": detect_violations(&limited, &set).len(),
        "max_conservation_residual": max_cons,
        "solve": rep,
    });
    Ok(())
}

fn synth_advect(
    mesh: usize,
    degree: usize,
    dt: f64,
    steps: usize,
    t_end: Option<f64>,
    out: &Path,
    report: &mut Report,
) -> Result<()> {
    report.defaults = "advection".into();
    let n_steps = match t_end {
        Some(t) if t > 0.0 => (t / dt).round() as usize,
        Some(t) => return Err(CliError::Usage(format!("--t-end must be positive, got {t}"))),
        None => steps,
    };
    let cfg = AdvectionConfig { n_cells: mesh, degree, dt, n_steps, ..AdvectionConfig::default() };
    report.parameters = json!(cfg);
    let run = advect_1d_rkdg(&cfg, triangle_square)?;
    if let Some(w) = &run.warning {
        eprintln!("warning: {w}");
    }
    let mut w = csv::Writer::from_path(out.join("advect.csv"))?;
    w.write_record(["step", "time", "cell", "x", "u"])?;
    let (mut lo, mut hi, mut out_of_bounds) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
    for (s, snap) in run.snapshots.iter().enumerate() {
        let time = (s + 1) as f64 * dt;
        let mut bad = false;
        for (i, u) in snap.iter().enumerate() {
            let x = cfg.lo + (i as f64 + 0.5) * run.h;
            w.serialize((s + 1, time, i, x, u))?;
            lo = lo.min(*u);
            hi = hi.max(*u);
            bad |= !(1.0..=2.0).contains(u);
        }
        out_of_bounds += bad as usize;
    }
    w.flush()?;
    report.outputs.push("advect.csv".into());
    report.result = json!({
        "h": run.h,
        "cfl": run.cfl,
        "warning": run.warning,
        "snapshots": run.snapshots.len(),
        "min": lo,
        "max": hi,
        "snapshots_out_of_bounds": out_of_bounds,
    });
    Ok(())
}

fn lax_config(mesh: usize, count: usize, seed: u64, epsilon: f64) -> LaxConfig {
    LaxConfig { n_cells: mesh, n_datasets: count, seed, epsilon, ..LaxConfig::default() }
}

fn synth_lax(mesh: usize, count: usize, seed: u64, epsilon: f64, out: &Path, report: &mut Report) -> Result<()> {
    report.defaults = "lax".into();
    let cfg = lax_config(mesh, count, seed, epsilon);
    report.parameters = json!(cfg);
    let (base, shock_cell) = lax_base_field(&cfg)?;
    let data = lax_perturbation_dataset(&cfg)?;
    let dir = out.join("lax");
    fs::create_dir_all(&dir)?;
    base.save(&dir.join("base.csv"), Some(epsilon))?;
    report.outputs.push("lax/base.csv".into());
    let set = AdmissibleSet::with_epsilon(epsilon)?;
    let mut violations = Vec::with_capacity(data.len());
    for (i, f) in data.iter().enumerate() {
        let name = format!("lax/lax_{i:04}.csv");
        f.save(&out.join(&name), Some(epsilon))?;
        report.outputs.push(name);
        violations.push(f.violating_rows(&set).len());
    }
    report.result = json!({
        "shock_cell": shock_cell,
        "datasets": data.len(),
        "min_violations": violations.iter().min(),
        "max_violations": violations.iter().max(),
    });
    Ok(())
}

fn convergence(meshes: &[usize], sim: &SimArgs, solver: &SolverArgs, out: &Path, report: &mut Report) -> Result<()> {
    report.defaults = "convergence".into();
    let cfg = sim.resolve(SimConfig::convergence(), solver)?;
    if meshes.len() < 2 {
        return Err(CliError::Usage("--meshes needs at least two meshes".into()));
    }
    let m = Manufactured::default();
    report.parameters = json!({ "meshes": meshes, "config": cfg, "manufactured": m });
    // One norm when it was asked for, otherwise the l2 and the l1 limiter.
    let rows = match solver.norm {
        Some(_) => manufactured_convergence(&cfg, meshes, &m)?,
        None => convergence_study(&cfg, meshes, &m)?,
    };
    write_errors_csv(&rows, &out.join("errors.csv"))?;
    report.outputs.push("errors.csv".into());
    report.result = json!({ "rows": rows });
    Ok(())
}

fn benchmark(name: &str, preset: SimConfig, sim: &SimArgs, solver: &SolverArgs, out: &Path, report: &mut Report) -> Result<()> {
    report.defaults = name.into();
    let cfg = sim.resolve(preset, solver)?;
    report.parameters = json!(cfg);
    let s = match name {
        "sedov" => sedov_simulation(&cfg)?,
        _ => jet_simulation(&cfg)?,
    };
    let res = run_benchmark(name, s, &cfg, Some(out));
    for f in ["audit.jsonl", "steps.csv"] {
        if out.join(f).exists() {
            report.outputs.push(f.into());
        }
    }
    let summary = res?;
    report.outputs.extend(summary.snapshots.iter().cloned());
    write_json(&out.join("summary.json"), &summary)?;
    report.outputs.push("summary.json".into());
    report.result = json!({
        "steps": summary.stats.steps,
        "final_time": summary.stats.final_time,
        "limited_stages": summary.stats.limited_stages,
        "limited_steps": summary.stats.limited_steps,
        "total_projections": summary.stats.total_projections,
        "max_relative_drift": summary.stats.max_relative_drift,
        "min_density": summary.stats.min_density,
        "min_internal_energy": summary.stats.min_internal_energy,
        "wall_time_s": summary.stats.wall_time_s,
    });
    Ok(())
}

fn tune(
    inputs: &[PathBuf],
    grid: &[f64],
    count: usize,
    seed: u64,
    solver: &SolverArgs,
    report: &mut Report,
) -> Result<()> {
    report.defaults = "tune".into();
    let mut opts = LimiterOptions { norm: idplim_core::limiters::Norm::L1, ..LimiterOptions::default() };
    solver.apply(&mut opts);
    let samples: Vec<CellAverageField> = if inputs.is_empty() {
        lax_perturbation_dataset(&lax_config(400, count, seed, opts.epsilon))?
    } else {
        inputs.iter().map(|p| CellAverageField::load(p).map(|(f, _)| f)).collect::<idplim_core::Result<_>>()?
    };
    report.parameters = json!({ "in": inputs, "grid": grid, "count": samples.len(), "seed": seed, "limiter": opts });
    let outcome = tune_gamma(&samples, grid, |f, gamma| {
        let o = LimiterOptions { solver_cfg: SolverConfig { gamma_step: gamma, ..opts.solver_cfg }, ..opts };
        let target = ConservationTarget::from_field(f);
        limit_cell_averages(f, &target, &o).map(|(_, r)| r)
    })?;
    report.result = json!(outcome);
    Ok(())
}
