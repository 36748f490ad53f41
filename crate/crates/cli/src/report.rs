//! Run reports (JSON) and numeric tables (CSV).

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use bie_core::evaluation::{EvalMethod, FieldSample};
use bie_core::solver::DensitySolution;
use serde::Serialize;

#[derive(Debug, Default, Serialize)]
pub struct RunReport {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub refine_study: Vec<RefineRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rescale_study: Vec<RescaleRow>,
    /// Wall time per phase in seconds; informational only.
    pub timings: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize)]
pub struct RoundReport {
    pub round: usize,
    pub nodes: Vec<usize>,
    pub panels: Vec<usize>,
    pub iterations: usize,
    pub residual: f64,
    pub resolved: Vec<bool>,
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub rounds: Vec<RoundReport>,
    pub nodes: Vec<usize>,
    pub panels: Vec<usize>,
    pub scheme: Vec<&'static str>,
    /// Largest spectral tail per interface, relative to its largest `|φ|`.
    pub tails: Vec<f64>,
    pub resolved: bool,
    pub residual: f64,
    pub rhs_norm: f64,
    pub charges: Vec<f64>,
    /// `max |C_i| / ‖rhs‖`.
    pub charge_ratio: f64,
}

impl SolveReport {
    pub fn new(sol: &DensitySolution<f64>) -> Self {
        Self {
            rounds: sol
                .history
                .iter()
                .map(|r| RoundReport {
                    round: r.round,
                    nodes: r.nodes.clone(),
                    panels: r.panels.clone(),
                    iterations: r.iterations,
                    residual: r.residual,
                    resolved: r.resolved.clone(),
                })
                .collect(),
            nodes: sol.grids.iter().map(|g| g.len()).collect(),
            panels: sol.grids.iter().map(|g| g.panels().len()).collect(),
            scheme: sol
                .grids
                .iter()
                .map(|g| if g.is_uniform() { "uniform" } else { "paneled" })
                .collect(),
            tails: sol
                .tails
                .iter()
                .zip(&sol.phi)
                .map(|(t, p)| {
                    let scale = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if scale > 0.0 {
                        t.worst() / scale
                    } else {
                        t.worst()
                    }
                })
                .collect(),
            resolved: sol.is_resolved(),
            residual: sol.residual,
            rhs_norm: sol.rhs_norm,
            charges: sol.charges.clone(),
            charge_ratio: sol.charge_ratio(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EvalReport {
    pub points: usize,
    pub naive: usize,
    pub close: usize,
    pub outside: usize,
}

impl EvalReport {
    pub fn new(samples: &[FieldSample<f64>]) -> Self {
        let count = |m| samples.iter().filter(|s| s.method == m).count();
        Self {
            points: samples.len(),
            naive: count(EvalMethod::Naive),
            close: count(EvalMethod::Close),
            outside: count(EvalMethod::Outside),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorRow {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub u_ref: f64,
    pub error: f64,
    pub method: &'static str,
}

#[derive(Debug, Serialize)]
pub struct ReferenceReport {
    pub kind: &'static str,
    /// Point where computed and reference constants are matched.
    pub point: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_density_error: Option<f64>,
    pub max_error: f64,
    pub rows: Vec<ErrorRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefineRow {
    pub m: usize,
    /// `|u_M(x₀) - u_2M(x₀)|`; absent for the last rung.
    pub u_diff: Option<f64>,
    /// Max node `|γ_M - γ_2M|` over all interfaces.
    pub gamma_diff: Option<f64>,
    /// Max node density error against the closed form, when configured.
    pub gamma_error: Option<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RescaleRow {
    pub sigma: f64,
    pub m: usize,
    pub iterations_rescaled: usize,
    pub iterations_unrescaled: usize,
    pub converged_rescaled: bool,
    pub converged_unrescaled: bool,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            ..Self::default()
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

pub fn write_densities(path: &Path, sol: &DensitySolution<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["interface", "node", "q", "x", "y", "phi", "gamma"])?;
    for (i, g) in sol.grids.iter().enumerate() {
        for k in 0..g.len() {
            let p = g.points[k];
            w.serialize((i, k, g.q[k], p.x, p.y, sol.phi[i][k], sol.gamma[i][k]))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_field(path: &Path, samples: &[FieldSample<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["x", "y", "u", "method", "dist"])?;
    for s in samples {
        w.serialize((s.point.x, s.point.y, s.u, s.method.as_str(), s.dist))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows<R: Serialize>(path: &Path, rows: &[R], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
