use log::{debug, info};

use super::gmres::{gmres, GmresSettings};
use crate::discretization::{
    fourier_tail, legendre_tail, GridScheme, InterfaceGrid, PanelSpec, SpectralTail,
};
use crate::error::{Error, Result};
use crate::geometry::{Curve, RegionTree};
use crate::operator::{Backend, BoundaryData, Formulation, SystemContext};
use crate::scalar::Real;

/// Grid scheme selection per interface.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SchemeChoice {
    /// Paneled where an interface is close to another, uniform elsewhere.
    #[default]
    Auto,
    Uniform,
    Paneled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveSettings<T> {
    pub gmres: GmresSettings<T>,
    /// Spectral-tail tolerance relative to the largest `|φ|` on an interface.
    pub adapt_tol: T,
    pub max_rounds: usize,
    /// An interface is close if its clearance is below this many node spacings.
    pub close_factor: T,
    pub initial_nodes: usize,
    pub shift: T,
    pub panel_order: usize,
    pub max_panel_order: usize,
    pub panel_order_step: usize,
    /// Refinement stops growing an interface beyond this many nodes.
    pub max_nodes_per_interface: usize,
    /// Relative tolerance on `∫ b_i dl = 0`.
    pub compat_tol: T,
    pub formulation: Formulation,
    pub backend: Backend,
    pub scheme: SchemeChoice,
    pub warm_start: bool,
}

impl<T: Real> Default for SolveSettings<T> {
    fn default() -> Self {
        Self {
            gmres: GmresSettings::default(),
            adapt_tol: T::lit(1e-6),
            max_rounds: 8,
            close_factor: T::lit(5.0),
            initial_nodes: 64,
            shift: T::half(),
            panel_order: 16,
            max_panel_order: 24,
            panel_order_step: 8,
            max_nodes_per_interface: 1 << 15,
            compat_tol: T::lit(1e-6),
            formulation: Formulation::Rescaled,
            backend: Backend::Direct,
            scheme: SchemeChoice::Auto,
            warm_start: true,
        }
    }
}

impl<T: Real> SolveSettings<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSettings(m.to_string()));
        if !(self.gmres.tol > T::zero()) {
            return bad("gmres_tol must be positive");
        }
        if !(self.adapt_tol > T::zero()) {
            return bad("adapt_tol must be positive");
        }
        if !(self.compat_tol > T::zero()) {
            return bad("compat_tol must be positive");
        }
        if self.max_rounds < 1 {
            return bad("max_rounds must be at least 1");
        }
        if self.gmres.max_iters < 1 {
            return bad("gmres_max_iters must be at least 1");
        }
        if self.panel_order < 2 || self.max_panel_order < self.panel_order {
            return bad("panel orders must satisfy 2 <= panel_order <= max_panel_order");
        }
        if !(self.shift >= T::zero() && self.shift <= T::one()) {
            return bad("shift must lie in [0, 1]");
        }
        if let Backend::Fmm { eps } = self.backend {
            if !(eps > 0.0) {
                return bad("fmm eps must be positive");
            }
        }
        Ok(())
    }
}

/// Spectral tails of one interface.
#[derive(Clone, Debug, PartialEq)]
pub enum InterfaceTail<T> {
    Fourier(SpectralTail<T>),
    Panels(Vec<SpectralTail<T>>),
}

impl<T: Real> InterfaceTail<T> {
    pub fn worst(&self) -> T {
        match self {
            InterfaceTail::Fourier(t) => t.max(),
            InterfaceTail::Panels(p) => p.iter().map(|t| t.max()).fold(T::zero(), T::max),
        }
    }
}

/// Summary of one solve-refine round.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord<T> {
    pub round: usize,
    pub nodes: Vec<usize>,
    pub panels: Vec<usize>,
    pub iterations: usize,
    pub residual: T,
    pub resolved: Vec<bool>,
    /// Parameter intervals of the panels refined after this round.
    pub refined_panels: Vec<Vec<(T, T)>>,
}

#[derive(Clone, Debug)]
pub struct DensitySolution<T> {
    pub tree: RegionTree<T>,
    pub grids: Vec<InterfaceGrid<T>>,
    pub formulation: Formulation,
    pub alpha: Vec<T>,
    /// Rescaled densities per interface.
    pub phi: Vec<Vec<T>>,
    /// Physical densities `γ = α φ` per interface.
    pub gamma: Vec<Vec<T>>,
    pub tails: Vec<InterfaceTail<T>>,
    pub resolved: Vec<bool>,
    /// Total charge `C_i` per interface.
    pub charges: Vec<T>,
    pub rhs_norm: T,
    pub residual: T,
    pub history: Vec<RoundRecord<T>>,
}

impl<T: Real> DensitySolution<T> {
    pub fn is_resolved(&self) -> bool {
        self.resolved.iter().all(|&r| r)
    }

    pub fn require_resolved(&self) -> Result<()> {
        if self.is_resolved() {
            Ok(())
        } else {
            Err(Error::MaxRounds {
                rounds: self.history.len(),
            })
        }
    }

    pub fn iterations(&self) -> Vec<usize> {
        self.history.iter().map(|r| r.iterations).collect()
    }

    pub fn total_nodes(&self) -> usize {
        self.grids.iter().map(|g| g.len()).sum()
    }

    /// `max_i |C_i| / ‖rhs‖`, zero for a zero right-hand side.
    pub fn charge_ratio(&self) -> T {
        let c = self.charges.iter().map(|c| c.abs()).fold(T::zero(), T::max);
        if self.rhs_norm == T::zero() {
            c
        } else {
            c / self.rhs_norm
        }
    }
}

/// Spectral tails of `φ` on every interface.
pub fn density_tails<T: Real>(grids: &[InterfaceGrid<T>], phi: &[Vec<T>]) -> Vec<InterfaceTail<T>> {
    grids
        .iter()
        .zip(phi)
        .map(|(g, p)| match &g.scheme {
            GridScheme::Uniform { shift } => InterfaceTail::Fourier(fourier_tail(p, *shift)),
            GridScheme::Paneled { panels } => {
                InterfaceTail::Panels(panels.iter().map(|pn| legendre_tail(&p[pn.range()])).collect())
            }
        })
        .collect()
}

/// Interpolates densities from old grids onto new grids of the same
/// interfaces (trigonometric on uniform grids, per-panel Lagrange otherwise).
pub fn warm_start_interpolate<T: Real>(
    old: &[InterfaceGrid<T>],
    old_phi: &[Vec<T>],
    new: &[InterfaceGrid<T>],
) -> Vec<Vec<T>> {
    old.iter()
        .zip(old_phi)
        .zip(new)
        .map(|((og, p), ng)| {
            if og == ng {
                p.clone()
            } else {
                ng.q.iter().map(|&q| og.interpolate(p, q)).collect()
            }
        })
        .collect()
}

/// Single GMRES solve on fixed grids.
pub fn solve_on_grids<T: Real>(
    tree: &RegionTree<T>,
    grids: Vec<InterfaceGrid<T>>,
    data: &[BoundaryData<T>],
    settings: &SolveSettings<T>,
    phi0: Option<&[Vec<T>]>,
) -> Result<DensitySolution<T>> {
    settings.validate()?;
    let ctx = SystemContext::new(tree.clone(), grids, settings.formulation, settings.backend)?;
    let rhs = ctx.assemble_rhs(data, settings.compat_tol)?;
    let x0 = phi0.map(|p| ctx.unknown_from_phi(&ctx.layout().join(p)));
    let out = gmres(&ctx, &rhs, x0.as_deref(), &settings.gmres);
    if !out.converged {
        return Err(Error::MaxIters {
            iterations: out.iterations,
            residual: out.final_residual().to_f64_lossy(),
        });
    }
    debug!(
        "gmres: {} nodes, {} iterations, residual {:.3e}",
        ctx.dim(),
        out.iterations,
        out.final_residual()
    );
    let layout = ctx.layout().clone();
    let phi_flat = ctx.phi(&out.x);
    let gamma_flat = ctx.gamma(&out.x);
    let charges = ctx.interface_charges(&out.x);
    let alpha = ctx.alpha().to_vec();
    let formulation = ctx.formulation();
    let (tree, grids) = ctx.into_parts();
    let phi: Vec<Vec<T>> = layout.split(&phi_flat).into_iter().map(<[T]>::to_vec).collect();
    let gamma: Vec<Vec<T>> = layout.split(&gamma_flat).into_iter().map(<[T]>::to_vec).collect();
    let tails = density_tails(&grids, &phi);
    let resolved = resolution(&tails, &phi, settings.adapt_tol);
    let rhs_norm = rhs.iter().map(|b| *b * *b).sum::<T>().sqrt();
    let record = RoundRecord {
        round: 0,
        nodes: grids.iter().map(|g| g.len()).collect(),
        panels: grids.iter().map(|g| g.panels().len()).collect(),
        iterations: out.iterations,
        residual: out.final_residual(),
        resolved: resolved.iter().map(|r| r.iter().all(|&b| b)).collect(),
        refined_panels: vec![Vec::new(); grids.len()],
    };
    Ok(DensitySolution {
        tree,
        grids,
        formulation,
        alpha,
        phi,
        gamma,
        tails,
        resolved: record.resolved.clone(),
        charges,
        rhs_norm,
        residual: out.final_residual(),
        history: vec![record],
    })
}

/// Per-interface, per-unit (whole interface or panel) resolution flags.
fn resolution<T: Real>(tails: &[InterfaceTail<T>], phi: &[Vec<T>], tol: T) -> Vec<Vec<bool>> {
    tails
        .iter()
        .zip(phi)
        .map(|(t, p)| {
            let scale = p.iter().map(|v| v.abs()).fold(T::zero(), T::max);
            let lim = tol * scale;
            match t {
                InterfaceTail::Fourier(f) => vec![f.resolved(lim)],
                InterfaceTail::Panels(ps) => ps.iter().map(|f| f.resolved(lim)).collect(),
            }
        })
        .collect()
}

/// Equal parameter-length panels, as few as keep every panel's arclength at
/// or below half the clearance.
fn initial_panels<T: Real>(curve: &Curve<T>, clearance: T, order: usize) -> Vec<PanelSpec<T>> {
    let length = curve.length();
    let cap = clearance * T::half();
    let mut count = 4usize;
    if cap.is_finite() && cap > T::zero() {
        count = count.max((length / cap).ceil().to_usize().unwrap_or(4));
    }
    loop {
        let c = T::from_usize_lossy(count);
        let ok = !cap.is_finite()
            || (0..count).all(|k| {
                let a = T::from_usize_lossy(k) / c;
                let b = T::from_usize_lossy(k + 1) / c;
                curve.arc_length(a, b) <= cap
            });
        if ok || count >= 4096 {
            break;
        }
        count += (count / 8).max(1);
    }
    let c = T::from_usize_lossy(count);
    (0..count)
        .map(|k| PanelSpec {
            a: T::from_usize_lossy(k) / c,
            b: T::from_usize_lossy(k + 1) / c,
            order,
        })
        .collect()
}

/// First-round grids with the scheme chosen per interface.
pub fn initial_grids<T: Real>(tree: &RegionTree<T>, settings: &SolveSettings<T>) -> Result<Vec<InterfaceGrid<T>>> {
    tree.curves
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let uniform = InterfaceGrid::uniform(c, settings.initial_nodes, settings.shift)?;
            let clearance = tree.clearance[i];
            let paneled = match settings.scheme {
                SchemeChoice::Uniform => false,
                SchemeChoice::Paneled => true,
                SchemeChoice::Auto => clearance < settings.close_factor * uniform.max_spacing(),
            };
            if paneled {
                InterfaceGrid::from_panels(c, &initial_panels(c, clearance, settings.panel_order))
            } else {
                Ok(uniform)
            }
        })
        .collect()
}

/// Solve, measure spectral tails, refine the unresolved parts, repeat.
///
/// Returns the last solution when `max_rounds` is reached; check
/// [`DensitySolution::is_resolved`].
pub fn solve_adaptive<T: Real>(
    tree: &RegionTree<T>,
    data: &[BoundaryData<T>],
    settings: &SolveSettings<T>,
) -> Result<DensitySolution<T>> {
    settings.validate()?;
    let mut grids = initial_grids(tree, settings)?;
    let mut history: Vec<RoundRecord<T>> = Vec::new();
    let mut phi0: Option<Vec<Vec<T>>> = None;
    for round in 0..settings.max_rounds {
        let mut sol = solve_on_grids(tree, grids.clone(), data, settings, phi0.as_deref())?;
        let flags = resolution(&sol.tails, &sol.phi, settings.adapt_tol);
        let mut record = sol.history.pop().expect("one round");
        record.round = round;
        info!(
            "round {round}: nodes {:?}, {} iterations, resolved {:?}",
            record.nodes, record.iterations, record.resolved
        );
        let all_resolved = flags.iter().all(|f| f.iter().all(|&b| b));
        let last = round + 1 == settings.max_rounds;
        let (next, refined, changed) = if all_resolved || last {
            (sol.grids.clone(), vec![Vec::new(); grids.len()], false)
        } else {
            refine(tree, &sol.grids, &flags, settings)?
        };
        record.refined_panels = refined;
        history.push(record);
        if all_resolved || last || !changed {
            sol.history = history;
            return Ok(sol);
        }
        phi0 = settings
            .warm_start
            .then(|| warm_start_interpolate(&sol.grids, &sol.phi, &next));
        grids = next;
    }
    unreachable!("max_rounds >= 1 is validated")
}

type Refined<T> = (Vec<InterfaceGrid<T>>, Vec<Vec<(T, T)>>, bool);

fn refine<T: Real>(
    tree: &RegionTree<T>,
    grids: &[InterfaceGrid<T>],
    flags: &[Vec<bool>],
    settings: &SolveSettings<T>,
) -> Result<Refined<T>> {
    let mut out = Vec::with_capacity(grids.len());
    let mut refined = Vec::with_capacity(grids.len());
    let mut changed = false;
    for (i, (g, f)) in grids.iter().zip(flags).enumerate() {
        let curve = &tree.curves[i];
        let mut touched = Vec::new();
        let next = match &g.scheme {
            GridScheme::Uniform { shift } => {
                if !f[0] && 2 * g.len() <= settings.max_nodes_per_interface {
                    changed = true;
                    InterfaceGrid::uniform(curve, 2 * g.len(), *shift)?
                } else {
                    g.clone()
                }
            }
            GridScheme::Paneled { panels } => {
                let mut specs = Vec::new();
                let mut total = g.len();
                for (p, &ok) in panels.iter().zip(f) {
                    let grow = settings.panel_order_step.max(1);
                    if ok {
                        specs.push(p.spec());
                    } else if p.order + grow <= settings.max_panel_order
                        && total + grow <= settings.max_nodes_per_interface
                    {
                        total += grow;
                        touched.push((p.a, p.b));
                        specs.push(PanelSpec {
                            order: p.order + grow,
                            ..p.spec()
                        });
                    } else if total + 4 * settings.panel_order <= settings.max_nodes_per_interface + p.order {
                        total = total + 4 * settings.panel_order - p.order;
                        touched.push((p.a, p.b));
                        let h = (p.b - p.a) / T::lit(4.0);
                        for k in 0..4 {
                            let a = p.a + h * T::from_usize_lossy(k);
                            let b = if k == 3 { p.b } else { a + h };
                            specs.push(PanelSpec {
                                a,
                                b,
                                order: settings.panel_order,
                            });
                        }
                    } else {
                        specs.push(p.spec());
                    }
                }
                if touched.is_empty() {
                    g.clone()
                } else {
                    changed = true;
                    InterfaceGrid::from_panels(curve, &specs)?
                }
            }
        };
        out.push(next);
        refined.push(touched);
    }
    Ok((out, refined, changed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::exact_inner_density;
    use crate::scalar::Vec2;
    use std::f64::consts::TAU;

    fn concentric() -> RegionTree<f64> {
        RegionTree::build(
            vec![
                Curve::circle(Vec2::new(0.0, 0.0), 1.0).unwrap(),
                Curve::circle(Vec2::new(0.0, 0.0), 0.4).unwrap(),
            ],
            vec![1.0, 2.0],
        )
        .unwrap()
    }

    fn data() -> Vec<BoundaryData<f64>> {
        vec![BoundaryData::SineMode { m: 3 }, BoundaryData::Zero]
    }

    #[test]
    fn concentric_adaptive_matches_closed_form() {
        let tree = concentric();
        let s = SolveSettings::default();
        let sol = solve_adaptive(&tree, &data(), &s).unwrap();
        assert!(sol.is_resolved());
        assert!(sol.grids.iter().all(|g| g.is_uniform()));
        let err = sol.grids[1]
            .q
            .iter()
            .zip(&sol.gamma[1])
            .map(|(q, g)| (g - exact_inner_density(3, 2.0, 0.4, TAU * q)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        assert!(sol.charge_ratio() <= 10.0 * s.gmres.tol);
    }

    #[test]
    fn zero_data_zero_density() {
        let tree = concentric();
        let sol = solve_adaptive(&tree, &[BoundaryData::Zero, BoundaryData::Zero], &SolveSettings::default()).unwrap();
        assert!(sol.iterations()[0] <= 1);
        assert!(sol.phi.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn incompatible_data_rejected() {
        let tree = concentric();
        let bad = vec![
            BoundaryData::Fourier {
                cos: vec![1.0],
                sin: vec![],
            },
            BoundaryData::Zero,
        ];
        assert!(matches!(
            solve_adaptive(&tree, &bad, &SolveSettings::default()),
            Err(Error::CompatibilityViolation { interface: 0, .. })
        ));
    }

    #[test]
    fn warm_start_transfers() {
        let tree = concentric();
        let c = &tree.curves[0];
        let old = vec![InterfaceGrid::uniform(c, 16, 0.5).unwrap()];
        let new = vec![InterfaceGrid::uniform(c, 32, 0.5).unwrap()];
        let phi = vec![old[0].q.iter().map(|q| (TAU * q).sin() + 2.0).collect::<Vec<f64>>()];
        let w = warm_start_interpolate(&old, &phi, &new);
        for (q, v) in new[0].q.iter().zip(&w[0]) {
            assert!((v - ((TAU * q).sin() + 2.0)).abs() < 1e-13);
        }
        let pold = vec![InterfaceGrid::equal_panels(c, 4, 8).unwrap()];
        let pnew = vec![InterfaceGrid::equal_panels(c, 8, 16).unwrap()];
        let w = warm_start_interpolate(&pold, &[vec![1.5; 32]], &pnew);
        assert!(w[0].iter().all(|&v| (v - 1.5).abs() < 1e-14));
    }

    #[test]
    fn settings_validation() {
        let s = SolveSettings::<f64> {
            adapt_tol: 0.0,
            ..Default::default()
        };
        assert!(matches!(s.validate(), Err(Error::InvalidSettings(_))));
        let s = SolveSettings::<f64> {
            max_rounds: 0,
            ..Default::default()
        };
        assert!(s.validate().is_err());
    }
}
