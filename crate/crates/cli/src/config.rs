//! Versioned JSON problem description.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use bie_core::geometry::{Curve, CurveKind, FourierSeries, RegionTree};
use bie_core::operator::{Backend, BoundaryData, Formulation};
use bie_core::solver::{GmresSettings, SchemeChoice, SolveSettings};
use bie_core::Vec2;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub version: u32,
    pub curves: Vec<CurveSpec>,
    pub sigma: Vec<f64>,
    /// Injected current per interface index; missing interfaces carry none.
    #[serde(default)]
    pub data: BTreeMap<usize, DataSpec>,
    #[serde(default)]
    pub settings: SettingsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine_study: Option<RefineSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rescale_study: Option<RescaleSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        center: [f64; 2],
        semi_axes: [f64; 2],
        #[serde(default)]
        rotation: f64,
    },
    /// `r(θ) = a + b cos(cθ)` about `center`.
    PolarCosine {
        center: [f64; 2],
        a: f64,
        b: f64,
        c: f64,
    },
    Fourier {
        x_cos: Vec<f64>,
        #[serde(default)]
        x_sin: Vec<f64>,
        y_cos: Vec<f64>,
        #[serde(default)]
        y_sin: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    Zero,
    SineMode { m: u32 },
    WindowedCosine,
    ConformalPullback { m: u32, alpha: f64 },
    Fourier {
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Direct,
    Fmm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulationKind {
    Rescaled,
    Physical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Auto,
    Uniform,
    Paneled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SettingsSpec {
    pub gmres_tol: f64,
    pub gmres_max_iters: usize,
    pub gmres_restart: Option<usize>,
    pub adapt_tol: f64,
    pub max_rounds: usize,
    pub close_factor: f64,
    pub initial_nodes: usize,
    pub shift: f64,
    pub panel_order: usize,
    pub max_panel_order: usize,
    pub panel_order_step: usize,
    pub max_nodes_per_interface: usize,
    pub compat_tol: f64,
    pub formulation: FormulationKind,
    pub scheme: SchemeKind,
    pub warm_start: bool,
    pub backend: BackendKind,
    pub fmm_eps: f64,
}

impl Default for SettingsSpec {
    fn default() -> Self {
        let s = SolveSettings::<f64>::default();
        Self {
            gmres_tol: s.gmres.tol,
            gmres_max_iters: s.gmres.max_iters,
            gmres_restart: s.gmres.restart,
            adapt_tol: s.adapt_tol,
            max_rounds: s.max_rounds,
            close_factor: s.close_factor,
            initial_nodes: s.initial_nodes,
            shift: s.shift,
            panel_order: s.panel_order,
            max_panel_order: s.max_panel_order,
            panel_order_step: s.panel_order_step,
            max_nodes_per_interface: s.max_nodes_per_interface,
            compat_tol: s.compat_tol,
            formulation: FormulationKind::Rescaled,
            scheme: SchemeKind::Auto,
            warm_start: s.warm_start,
            backend: BackendKind::Direct,
            fmm_eps: 1e-9,
        }
    }
}

impl SettingsSpec {
    pub fn backend(&self) -> Backend {
        match self.backend {
            BackendKind::Direct => Backend::Direct,
            BackendKind::Fmm => Backend::Fmm { eps: self.fmm_eps },
        }
    }

    pub fn to_solve_settings(&self) -> SolveSettings<f64> {
        SolveSettings {
            gmres: GmresSettings {
                tol: self.gmres_tol,
                max_iters: self.gmres_max_iters,
                restart: self.gmres_restart,
            },
            adapt_tol: self.adapt_tol,
            max_rounds: self.max_rounds,
            close_factor: self.close_factor,
            initial_nodes: self.initial_nodes,
            shift: self.shift,
            panel_order: self.panel_order,
            max_panel_order: self.max_panel_order,
            panel_order_step: self.panel_order_step,
            max_nodes_per_interface: self.max_nodes_per_interface,
            compat_tol: self.compat_tol,
            formulation: match self.formulation {
                FormulationKind::Rescaled => Formulation::Rescaled,
                FormulationKind::Physical => Formulation::Physical,
            },
            backend: self.backend(),
            scheme: match self.scheme {
                SchemeKind::Auto => SchemeChoice::Auto,
                SchemeKind::Uniform => SchemeChoice::Uniform,
                SchemeKind::Paneled => SchemeChoice::Paneled,
            },
            warm_start: self.warm_start,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Close evaluation near curves, plain quadrature elsewhere.
    #[default]
    Auto,
    Naive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EvalRequest {
    Points {
        points: Vec<[f64; 2]>,
        #[serde(default)]
        mode: EvalMode,
    },
    /// Points `(1 - x̂) (cos θ, sin θ)` for `x̂` between the bounds.
    Ray {
        theta: f64,
        x_hat_min: f64,
        x_hat_max: f64,
        count: usize,
        #[serde(default = "default_spacing")]
        spacing: Spacing,
        /// Also evaluate at `x̂ = 0`.
        #[serde(default)]
        include_boundary: bool,
        #[serde(default)]
        mode: EvalMode,
    },
    Raster {
        x: [f64; 2],
        y: [f64; 2],
        nx: usize,
        ny: usize,
        #[serde(default)]
        mode: EvalMode,
    },
}

fn default_spacing() -> Spacing {
    Spacing::Log
}

impl EvalRequest {
    pub fn mode(&self) -> EvalMode {
        match self {
            EvalRequest::Points { mode, .. } | EvalRequest::Ray { mode, .. } | EvalRequest::Raster { mode, .. } => {
                *mode
            }
        }
    }

    pub fn points(&self) -> Vec<Vec2<f64>> {
        match self {
            EvalRequest::Points { points, .. } => points.iter().map(|p| Vec2::new(p[0], p[1])).collect(),
            EvalRequest::Ray {
                theta,
                x_hat_min,
                x_hat_max,
                count,
                spacing,
                include_boundary,
                ..
            } => {
                let mut xs = Vec::with_capacity(count + 1);
                if *include_boundary {
                    xs.push(0.0);
                }
                for k in 0..*count {
                    let t = if *count > 1 { k as f64 / (*count - 1) as f64 } else { 0.0 };
                    xs.push(match spacing {
                        Spacing::Linear => x_hat_min + t * (x_hat_max - x_hat_min),
                        Spacing::Log => (x_hat_min.ln() + t * (x_hat_max.ln() - x_hat_min.ln())).exp(),
                    });
                }
                let (s, c) = theta.sin_cos();
                xs.iter().map(|x| Vec2::new((1.0 - x) * c, (1.0 - x) * s)).collect()
            }
            EvalRequest::Raster { x, y, nx, ny, .. } => {
                let lin = |r: &[f64; 2], n: usize, k: usize| {
                    if n > 1 {
                        r[0] + (r[1] - r[0]) * k as f64 / (n - 1) as f64
                    } else {
                        0.5 * (r[0] + r[1])
                    }
                };
                let mut pts = Vec::with_capacity(nx * ny);
                for j in 0..*ny {
                    for i in 0..*nx {
                        pts.push(Vec2::new(lin(x, *nx, i), lin(y, *ny, j)));
                    }
                }
                pts
            }
        }
    }
}

/// Closed-form solution to compare against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceSpec {
    /// Unit circle around a concentric circle of radius `alpha`.
    Concentric {
        m: u32,
        sigma: f64,
        alpha: f64,
        #[serde(default)]
        point: Option<[f64; 2]>,
    },
    /// Möbius image of the concentric solution.
    NonConcentric {
        m: u32,
        sigma: f64,
        alpha: f64,
        #[serde(default)]
        point: Option<[f64; 2]>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineSpec {
    pub ladder: Vec<usize>,
    /// Where the potential difference is measured.
    pub probe: [f64; 2],
}

impl Default for RefineSpec {
    fn default() -> Self {
        Self {
            ladder: (4..=9).map(|k| 1usize << k).collect(),
            probe: [1.0, 0.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RescaleSpec {
    /// Conductivity of every odd-depth region; even depths get 1.
    pub sigmas: Vec<f64>,
    pub nodes: Vec<usize>,
}

impl Default for RescaleSpec {
    fn default() -> Self {
        Self {
            sigmas: vec![1.001, 1.01, 1.1, 2.0, 10.0],
            nodes: vec![32, 256],
        }
    }
}

impl CurveSpec {
    pub fn to_curve(&self) -> bie_core::Result<Curve<f64>> {
        let v = |c: &[f64; 2]| Vec2::new(c[0], c[1]);
        match self {
            CurveSpec::Circle { center, radius } => Curve::circle(v(center), *radius),
            CurveSpec::Ellipse {
                center,
                semi_axes,
                rotation,
            } => Curve::ellipse(v(center), (semi_axes[0], semi_axes[1]), *rotation),
            CurveSpec::PolarCosine { center, a, b, c } => Curve::polar_cosine(v(center), *a, *b, *c),
            CurveSpec::Fourier {
                x_cos,
                x_sin,
                y_cos,
                y_sin,
            } => Curve::new(CurveKind::Fourier {
                x: FourierSeries::new(x_cos.clone(), x_sin.clone()),
                y: FourierSeries::new(y_cos.clone(), y_sin.clone()),
            }),
        }
    }
}

impl DataSpec {
    pub fn to_data(&self) -> BoundaryData<f64> {
        match self {
            DataSpec::Zero => BoundaryData::Zero,
            DataSpec::SineMode { m } => BoundaryData::SineMode { m: *m },
            DataSpec::WindowedCosine => BoundaryData::WindowedCosine,
            DataSpec::ConformalPullback { m, alpha } => BoundaryData::ConformalPullback { m: *m, alpha: *alpha },
            DataSpec::Fourier { cos, sin } => BoundaryData::Fourier {
                cos: cos.clone(),
                sin: sin.clone(),
            },
        }
    }
}

impl ProblemConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Parses and validates; serde reports line and column on schema errors.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCHEMA_VERSION {
            bail!("unsupported config version {} (expected {SCHEMA_VERSION})", self.version);
        }
        if self.curves.is_empty() {
            bail!("config lists no curves");
        }
        if self.sigma.len() != self.curves.len() {
            bail!(
                "config lists {} curves but {} conductivities",
                self.curves.len(),
                self.sigma.len()
            );
        }
        if let Some(&k) = self.data.keys().find(|&&k| k >= self.curves.len()) {
            bail!("boundary data given for interface {k}, but there are only {} curves", self.curves.len());
        }
        Ok(())
    }

    pub fn tree(&self) -> Result<RegionTree<f64>> {
        self.tree_with_sigma(self.sigma.clone())
    }

    pub fn tree_with_sigma(&self, sigma: Vec<f64>) -> Result<RegionTree<f64>> {
        let curves = self
            .curves
            .iter()
            .enumerate()
            .map(|(i, c)| c.to_curve().with_context(|| format!("curve {i}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(RegionTree::build(curves, sigma)?)
    }

    /// Boundary data for every interface, zero where unspecified.
    pub fn boundary_data(&self) -> Vec<BoundaryData<f64>> {
        (0..self.curves.len())
            .map(|i| self.data.get(&i).map_or(BoundaryData::Zero, DataSpec::to_data))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONCENTRIC: &str = r#"{
        "version": 1,
        "curves": [
            {"kind": "circle", "center": [0, 0], "radius": 1},
            {"kind": "circle", "center": [0, 0], "radius": 0.4}
        ],
        "sigma": [1, 2],
        "data": {"0": {"kind": "sine_mode", "m": 3}},
        "eval": {"kind": "ray", "theta": 1.5707963267948966, "x_hat_min": 1e-6, "x_hat_max": 0.1, "count": 5}
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ProblemConfig::parse(CONCENTRIC).unwrap();
        assert_eq!(cfg.boundary_data()[1], BoundaryData::Zero);
        assert_eq!(cfg.settings, SettingsSpec::default());
        let again = ProblemConfig::parse(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
        let tree = cfg.tree().unwrap();
        assert_eq!(tree.root, 0);
        let pts = cfg.eval.unwrap().points();
        assert_eq!(pts.len(), 5);
        assert!((pts[0].y - (1.0 - 1e-6)).abs() < 1e-12);
        assert!((pts[4].y - 0.9).abs() < 1e-12);
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        let bad = CONCENTRIC.replace("\"radius\": 0.4", "\"radius\": 0.4, \"colour\": 1");
        let err = ProblemConfig::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("colour") && err.contains("line"), "{err}");
        let v2 = CONCENTRIC.replace("\"version\": 1", "\"version\": 2");
        assert!(ProblemConfig::parse(&v2).is_err());
        let extra = CONCENTRIC.replace("\"0\": {", "\"5\": {");
        assert!(ProblemConfig::parse(&extra).is_err());
    }

    #[test]
    fn raster_points() {
        let r = EvalRequest::Raster {
            x: [-1.0, 1.0],
            y: [0.0, 1.0],
            nx: 3,
            ny: 2,
            mode: EvalMode::Auto,
        };
        let p = r.points();
        assert_eq!(p.len(), 6);
        assert_eq!(p[5], Vec2::new(1.0, 1.0));
    }
}
