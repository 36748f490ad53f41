use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Result};
use bie_core::discretization::InterfaceGrid;
use bie_core::evaluation::{EvalMethod, EvalOptions, Evaluator, FieldSample};
use bie_core::geometry::RegionTree;
use bie_core::operator::{Formulation, SystemContext};
use bie_core::reference::{exact_inner_density, ConcentricSolution, NonConcentricSolution};
use bie_core::solver::{gmres, solve_adaptive, solve_on_grids, DensitySolution, SolveSettings};
use bie_core::Vec2;
use log::info;

use crate::config::{EvalMode, ProblemConfig, ReferenceSpec};
use crate::persist::SavedSolution;
use crate::report::{
    write_densities, write_field, write_rows, ErrorRow, EvalReport, RefineRow, ReferenceReport, RescaleRow, RunReport,
    SolveReport,
};

/// Whether a command met every tolerance it was asked to check.
pub struct Outcome {
    pub ok: bool,
}

fn timed<R>(report: &mut RunReport, phase: &str, f: impl FnOnce() -> R) -> R {
    let t = Instant::now();
    let r = f();
    *report.timings.entry(phase.to_string()).or_default() += t.elapsed().as_secs_f64();
    r
}

fn solve_config(cfg: &ProblemConfig, report: &mut RunReport) -> Result<DensitySolution<f64>> {
    let tree = timed(report, "build", || cfg.tree())?;
    let settings = cfg.settings.to_solve_settings();
    let data = cfg.boundary_data();
    let sol = timed(report, "solve", || solve_adaptive(&tree, &data, &settings))?;
    info!(
        "solved: {} nodes, {} rounds, resolved {}",
        sol.total_nodes(),
        sol.history.len(),
        sol.is_resolved()
    );
    Ok(sol)
}

fn charges_ok(cfg: &ProblemConfig, sol: &DensitySolution<f64>) -> bool {
    sol.charge_ratio() <= 10.0 * cfg.settings.gmres_tol
}

pub fn solve(cfg: &ProblemConfig, out: &Path) -> Result<Outcome> {
    let mut report = RunReport::new("solve");
    let sol = solve_config(cfg, &mut report)?;
    write_densities(&out.join("densities.csv"), &sol)?;
    SavedSolution::new(cfg, &sol).save(&out.join("solution.json"))?;
    let ok = sol.is_resolved() && charges_ok(cfg, &sol);
    report.solve = Some(SolveReport::new(&sol));
    if let Some(r) = &cfg.reference {
        report.reference = Some(reference_report(r, &sol, &[], cfg)?);
    }
    report.write(&out.join("report.json"))?;
    Ok(Outcome { ok })
}

fn eval_options(cfg: &ProblemConfig) -> EvalOptions {
    EvalOptions {
        close_factor: cfg.settings.close_factor,
        backend: cfg.settings.backend(),
    }
}

fn evaluate(ev: &Evaluator<'_, f64>, points: &[Vec2<f64>], mode: EvalMode) -> Vec<FieldSample<f64>> {
    match mode {
        EvalMode::Auto => ev.eval_close(points),
        EvalMode::Naive => ev.eval_naive(points),
    }
}

pub fn eval(cfg: &ProblemConfig, solution: Option<&Path>, out: &Path) -> Result<Outcome> {
    let mut report = RunReport::new("eval");
    let sol = match solution {
        Some(path) => timed(&mut report, "load", || SavedSolution::load(path)?.restore())?,
        None => solve_config(cfg, &mut report)?,
    };
    let (points, mode) = match &cfg.eval {
        Some(req) => (req.points(), req.mode()),
        None => (Vec::new(), EvalMode::Auto),
    };
    let ev = timed(&mut report, "eval", || Evaluator::new(&sol, eval_options(cfg)))?;
    let samples = timed(&mut report, "eval", || evaluate(&ev, &points, mode));
    write_field(&out.join("field.csv"), &samples)?;
    report.eval = Some(EvalReport::new(&samples));
    if let Some(r) = &cfg.reference {
        report.reference = Some(reference_report(r, &sol, &samples, cfg)?);
    }
    report.write(&out.join("report.json"))?;
    Ok(Outcome { ok: true })
}

/// Closed-form potential for a configured reference.
enum Exact {
    Concentric(ConcentricSolution<f64>),
    NonConcentric(NonConcentricSolution<f64>),
}

impl Exact {
    fn new(spec: &ReferenceSpec) -> Result<(Self, [f64; 2])> {
        Ok(match spec {
            ReferenceSpec::Concentric { m, sigma, alpha, point } => (
                Exact::Concentric(ConcentricSolution::new(*m, *sigma, *alpha)?),
                point.unwrap_or([0.0, 0.0]),
            ),
            // the origin lies on the inner circle here
            ReferenceSpec::NonConcentric { m, sigma, alpha, point } => (
                Exact::NonConcentric(NonConcentricSolution::new(*m, *sigma, *alpha)?),
                point.unwrap_or([-0.5, 0.0]),
            ),
        })
    }

    fn kind(&self) -> &'static str {
        match self {
            Exact::Concentric(_) => "concentric",
            Exact::NonConcentric(_) => "non_concentric",
        }
    }

    fn u(&self, p: Vec2<f64>) -> Result<f64> {
        Ok(match self {
            Exact::Concentric(c) => c.u(p.norm().min(1.0), p.y.atan2(p.x))?,
            Exact::NonConcentric(c) => c.u(p)?,
        })
    }
}

/// Largest node error of the inner-interface density against the closed
/// form of the concentric problem.
fn concentric_density_error(c: &ConcentricSolution<f64>, sol: &DensitySolution<f64>) -> f64 {
    let root = sol.tree.root;
    let mut worst: f64 = 0.0;
    for (i, g) in sol.grids.iter().enumerate() {
        if i == root {
            continue;
        }
        for (p, gamma) in g.points.iter().zip(&sol.gamma[i]) {
            let exact = exact_inner_density(c.m, c.sigma, c.alpha, p.y.atan2(p.x));
            worst = worst.max((gamma - exact).abs());
        }
    }
    worst
}

fn reference_report(
    spec: &ReferenceSpec,
    sol: &DensitySolution<f64>,
    samples: &[FieldSample<f64>],
    cfg: &ProblemConfig,
) -> Result<ReferenceReport> {
    let (exact, point) = Exact::new(spec)?;
    let ev = Evaluator::new(sol, eval_options(cfg))?;
    let p0 = Vec2::new(point[0], point[1]);
    let shift = ev.eval_close(&[p0])[0].u - exact.u(p0)?;
    let mut rows = Vec::new();
    let mut max_error: f64 = 0.0;
    for s in samples.iter().filter(|s| s.method != EvalMethod::Outside) {
        let u_ref = exact.u(s.point)?;
        let error = (s.u - shift - u_ref).abs();
        max_error = max_error.max(error);
        rows.push(ErrorRow {
            x: s.point.x,
            y: s.point.y,
            u: s.u - shift,
            u_ref,
            error,
            method: s.method.as_str(),
        });
    }
    let max_density_error = match &exact {
        Exact::Concentric(c) => Some(concentric_density_error(c, sol)),
        Exact::NonConcentric(_) => None,
    };
    Ok(ReferenceReport {
        kind: exact.kind(),
        point,
        max_density_error,
        max_error,
        rows,
    })
}

fn uniform_grids(tree: &RegionTree<f64>, m: usize, shift: f64) -> Result<Vec<InterfaceGrid<f64>>> {
    Ok(tree
        .curves
        .iter()
        .map(|c| InterfaceGrid::uniform(c, m, shift))
        .collect::<bie_core::Result<Vec<_>>>()?)
}

pub fn refine_study(cfg: &ProblemConfig, out: &Path) -> Result<Outcome> {
    let mut report = RunReport::new("refine-study");
    let spec = cfg.refine_study.clone().unwrap_or_default();
    let tree = timed(&mut report, "build", || cfg.tree())?;
    let settings = cfg.settings.to_solve_settings();
    let data = cfg.boundary_data();
    let exact = cfg.reference.as_ref().map(Exact::new).transpose()?;
    let probe = Vec2::new(spec.probe[0], spec.probe[1]);

    let mut sols = Vec::with_capacity(spec.ladder.len());
    for &m in &spec.ladder {
        let grids = uniform_grids(&tree, m, settings.shift)?;
        let sol = timed(&mut report, "solve", || solve_on_grids(&tree, grids, &data, &settings, None))?;
        let ev = Evaluator::new(&sol, eval_options(cfg))?;
        let u = timed(&mut report, "eval", || ev.eval_close(&[probe])[0].u);
        info!("M = {m}: u(probe) = {u:.12e}");
        sols.push((m, sol, u));
    }
    let rows: Vec<RefineRow> = (0..sols.len())
        .map(|k| {
            let (m, sol, u) = &sols[k];
            let next = sols.get(k + 1);
            let gamma_diff = next.map(|(_, fine, _)| {
                let mut worst: f64 = 0.0;
                for (i, g) in sol.grids.iter().enumerate() {
                    for (q, gamma) in g.q.iter().zip(&sol.gamma[i]) {
                        let f = fine.grids[i].interpolate(&fine.gamma[i], *q);
                        worst = worst.max((gamma - f).abs());
                    }
                }
                worst
            });
            let gamma_error = match &exact {
                Some((Exact::Concentric(c), _)) => Some(concentric_density_error(c, sol)),
                _ => None,
            };
            RefineRow {
                m: *m,
                u_diff: next.map(|(_, _, un)| (u - un).abs()),
                gamma_diff,
                gamma_error,
                iterations: sol.iterations().iter().sum(),
            }
        })
        .collect();
    write_rows(
        &out.join("refine.csv"),
        &rows,
        &["m", "u_diff", "gamma_diff", "gamma_error", "iterations"],
    )?;
    report.refine_study = rows;
    report.write(&out.join("report.json"))?;
    Ok(Outcome { ok: true })
}

/// Conductivity 1 at even nesting depth and `sigma` at odd depth.
pub fn alternating_sigma(tree: &RegionTree<f64>, sigma: f64) -> Vec<f64> {
    tree.depth.iter().map(|d| if d % 2 == 0 { 1.0 } else { sigma }).collect()
}

/// GMRES iterations from a zero start for one formulation.
pub fn count_iterations(
    tree: &RegionTree<f64>,
    grids: Vec<InterfaceGrid<f64>>,
    data: &[bie_core::operator::BoundaryData<f64>],
    settings: &SolveSettings<f64>,
    formulation: Formulation,
) -> Result<(usize, bool)> {
    let ctx = SystemContext::new(tree.clone(), grids, formulation, settings.backend)?;
    let rhs = ctx.assemble_rhs(data, settings.compat_tol)?;
    let out = gmres(&ctx, &rhs, None, &settings.gmres);
    Ok((out.iterations, out.converged))
}

pub fn rescale_study(cfg: &ProblemConfig, out: &Path) -> Result<Outcome> {
    let mut report = RunReport::new("rescale-study");
    let spec = cfg.rescale_study.clone().unwrap_or_default();
    let base = timed(&mut report, "build", || cfg.tree())?;
    let settings = cfg.settings.to_solve_settings();
    let data = cfg.boundary_data();
    let mut rows = Vec::new();
    for &sigma in &spec.sigmas {
        if sigma == 1.0 {
            bail!(bie_core::Error::EqualConductivity { region: 1, sigma });
        }
        let tree = cfg.tree_with_sigma(alternating_sigma(&base, sigma))?;
        for &m in &spec.nodes {
            let (ir, cr) = timed(&mut report, "solve", || {
                count_iterations(&tree, uniform_grids(&tree, m, settings.shift)?, &data, &settings, Formulation::Rescaled)
            })?;
            let (ip, cp) = timed(&mut report, "solve", || {
                count_iterations(&tree, uniform_grids(&tree, m, settings.shift)?, &data, &settings, Formulation::Physical)
            })?;
            info!("sigma {sigma}, M {m}: rescaled {ir}, unrescaled {ip}");
            rows.push(RescaleRow {
                sigma,
                m,
                iterations_rescaled: ir,
                iterations_unrescaled: ip,
                converged_rescaled: cr,
                converged_unrescaled: cp,
            });
        }
    }
    write_rows(
        &out.join("rescale.csv"),
        &rows,
        &[
            "sigma",
            "m",
            "iterations_rescaled",
            "iterations_unrescaled",
            "converged_rescaled",
            "converged_unrescaled",
        ],
    )?;
    let ok = rows.iter().all(|r| r.converged_rescaled && r.converged_unrescaled);
    report.rescale_study = rows;
    report.write(&out.join("report.json"))?;
    Ok(Outcome { ok })
}
