//! On-disk form of a solved problem.

use std::path::Path;

use anyhow::{bail, Context, Result};
use bie_core::discretization::{InterfaceGrid, PanelSpec};
use bie_core::solver::{density_tails, DensitySolution};
use serde::{Deserialize, Serialize};

use crate::config::ProblemConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridRecord {
    Uniform { nodes: usize, shift: f64 },
    Paneled { panels: Vec<PanelRecord> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelRecord {
    pub a: f64,
    pub b: f64,
    pub order: usize,
}

impl GridRecord {
    pub fn of(grid: &InterfaceGrid<f64>) -> Self {
        match grid.shift() {
            Some(shift) => GridRecord::Uniform {
                nodes: grid.len(),
                shift,
            },
            None => GridRecord::Paneled {
                panels: grid
                    .panels()
                    .iter()
                    .map(|p| PanelRecord {
                        a: p.a,
                        b: p.b,
                        order: p.order,
                    })
                    .collect(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SavedSolution {
    pub config: ProblemConfig,
    pub grids: Vec<GridRecord>,
    pub phi: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub resolved: Vec<bool>,
    pub charges: Vec<f64>,
    pub rhs_norm: f64,
    pub residual: f64,
}

impl SavedSolution {
    pub fn new(config: &ProblemConfig, sol: &DensitySolution<f64>) -> Self {
        Self {
            config: config.clone(),
            grids: sol.grids.iter().map(GridRecord::of).collect(),
            phi: sol.phi.clone(),
            gamma: sol.gamma.clone(),
            alpha: sol.alpha.clone(),
            resolved: sol.resolved.clone(),
            charges: sol.charges.clone(),
            rhs_norm: sol.rhs_norm,
            residual: sol.residual,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let s: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        s.config.validate()?;
        Ok(s)
    }

    /// Rebuilds the in-memory solution; the refinement history is not kept.
    pub fn restore(&self) -> Result<DensitySolution<f64>> {
        let tree = self.config.tree()?;
        if self.grids.len() != tree.len() || self.gamma.len() != tree.len() || self.phi.len() != tree.len() {
            bail!("saved solution does not match its configuration");
        }
        let grids = self
            .grids
            .iter()
            .zip(&tree.curves)
            .map(|(g, c)| match g {
                GridRecord::Uniform { nodes, shift } => InterfaceGrid::uniform(c, *nodes, *shift),
                GridRecord::Paneled { panels } => {
                    let specs: Vec<PanelSpec<f64>> = panels
                        .iter()
                        .map(|p| PanelSpec {
                            a: p.a,
                            b: p.b,
                            order: p.order,
                        })
                        .collect();
                    InterfaceGrid::from_panels(c, &specs)
                }
            })
            .collect::<bie_core::Result<Vec<_>>>()?;
        for (i, g) in grids.iter().enumerate() {
            if g.len() != self.gamma[i].len() || g.len() != self.phi[i].len() {
                bail!("saved densities on interface {i} do not match the grid");
            }
        }
        let tails = density_tails(&grids, &self.phi);
        Ok(DensitySolution {
            tree,
            grids,
            formulation: self.config.settings.to_solve_settings().formulation,
            alpha: self.alpha.clone(),
            phi: self.phi.clone(),
            gamma: self.gamma.clone(),
            tails,
            resolved: self.resolved.clone(),
            charges: self.charges.clone(),
            rhs_norm: self.rhs_norm,
            residual: self.residual,
            history: Vec::new(),
        })
    }
}
