use super::interp::{trig_interpolate, BarycentricLagrange};
use super::quadrature::{gauss_legendre_on, uniform_nodes};
use crate::error::{Error, Result};
use crate::geometry::Curve;
use crate::scalar::{Real, Vec2};

/// Parameter interval `[a, b)` carrying an `order`-point Gauss-Legendre rule.
///
/// `b` may exceed 1 for the panel that wraps through `q = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PanelSpec<T> {
    pub a: T,
    pub b: T,
    pub order: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Panel<T> {
    pub a: T,
    pub b: T,
    pub order: usize,
    /// Index of the panel's first node in the grid.
    pub start: usize,
    interp: BarycentricLagrange<T>,
}

impl<T: Real> Panel<T> {
    pub fn spec(&self) -> PanelSpec<T> {
        PanelSpec {
            a: self.a,
            b: self.b,
            order: self.order,
        }
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.order
    }

    pub fn interpolant(&self) -> &BarycentricLagrange<T> {
        &self.interp
    }

    /// Whether parameter `q` (mod 1) falls in `[a, b)`.
    pub fn contains(&self, q: T) -> bool {
        let q = q - q.floor();
        (q >= self.a && q < self.b) || (q + T::one() >= self.a && q + T::one() < self.b)
    }

    /// `q` shifted by an integer into `[a, a + 1)`.
    pub fn local(&self, q: T) -> T {
        let mut t = q - q.floor();
        if t < self.a {
            t += T::one();
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GridScheme<T> {
    Uniform { shift: T },
    Paneled { panels: Vec<Panel<T>> },
}

/// Quadrature nodes on one interface with cached geometry.
///
/// Weights include the speed, so `Σ w_m f(x_m)` approximates `∫ f dl`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceGrid<T> {
    pub scheme: GridScheme<T>,
    pub q: Vec<T>,
    pub points: Vec<Vec2<T>>,
    pub normals: Vec<Vec2<T>>,
    pub speeds: Vec<T>,
    pub curvatures: Vec<T>,
    pub weights: Vec<T>,
}

pub const MIN_NODES: usize = 4;

impl<T: Real> InterfaceGrid<T> {
    /// Trapezoid rule on `q_m = (m + shift) / M`.
    pub fn uniform(curve: &Curve<T>, m: usize, shift: T) -> Result<Self> {
        if m < MIN_NODES {
            return Err(Error::TooFewNodes {
                min: MIN_NODES,
                got: m,
            });
        }
        let q = uniform_nodes(m, shift);
        let w = vec![T::one() / T::from_usize_lossy(m); m];
        Self::from_nodes(curve, GridScheme::Uniform { shift }, q, w)
    }

    /// Equal-order panels between sorted breakpoints in `[0, 1)`.
    pub fn paneled(curve: &Curve<T>, breakpoints: &[T], order: usize) -> Result<Self> {
        if breakpoints.is_empty()
            || breakpoints.windows(2).any(|w| w[1] < w[0])
            || breakpoints.iter().any(|&b| b < T::zero() || b >= T::one())
        {
            return Err(Error::BadBreakpoints);
        }
        let n = breakpoints.len();
        let specs: Vec<PanelSpec<T>> = (0..n)
            .map(|k| PanelSpec {
                a: breakpoints[k],
                b: if k + 1 < n {
                    breakpoints[k + 1]
                } else {
                    breakpoints[0] + T::one()
                },
                order,
            })
            .collect();
        Self::from_panels(curve, &specs)
    }

    /// `count` equal parameter-length panels starting at `q = 0`.
    pub fn equal_panels(curve: &Curve<T>, count: usize, order: usize) -> Result<Self> {
        let c = T::from_usize_lossy(count.max(1));
        let bps: Vec<T> = (0..count.max(1)).map(|k| T::from_usize_lossy(k) / c).collect();
        Self::paneled(curve, &bps, order)
    }

    pub fn from_panels(curve: &Curve<T>, specs: &[PanelSpec<T>]) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::BadBreakpoints);
        }
        let tol = T::lit(64.0) * T::epsilon();
        for (k, s) in specs.iter().enumerate() {
            if !(s.b > s.a) {
                return Err(Error::EmptyPanel {
                    a: s.a.to_f64_lossy(),
                    b: s.b.to_f64_lossy(),
                });
            }
            if s.order < 1 {
                return Err(Error::TooFewNodes { min: 1, got: 0 });
            }
            let next = &specs[(k + 1) % specs.len()];
            let expected = if k + 1 == specs.len() { next.a + T::one() } else { next.a };
            if (s.b - expected).abs() > tol {
                return Err(Error::BadBreakpoints);
            }
        }
        let mut q = Vec::new();
        let mut w = Vec::new();
        let mut panels = Vec::with_capacity(specs.len());
        for s in specs {
            let (nodes, weights) = gauss_legendre_on(s.order, s.a, s.b);
            panels.push(Panel {
                a: s.a,
                b: s.b,
                order: s.order,
                start: q.len(),
                interp: BarycentricLagrange::new(nodes.clone()),
            });
            q.extend(nodes);
            w.extend(weights);
        }
        Self::from_nodes(curve, GridScheme::Paneled { panels }, q, w)
    }

    fn from_nodes(curve: &Curve<T>, scheme: GridScheme<T>, q: Vec<T>, dq: Vec<T>) -> Result<Self> {
        let n = q.len();
        let mut points = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        let mut speeds = Vec::with_capacity(n);
        let mut curvatures = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (&qi, &wi) in q.iter().zip(&dq) {
            let f = curve.frame(qi)?;
            points.push(f.point);
            normals.push(f.normal);
            speeds.push(f.speed);
            curvatures.push(f.curvature);
            weights.push(wi * f.speed);
        }
        Ok(Self {
            scheme,
            q,
            points,
            normals,
            speeds,
            curvatures,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.scheme, GridScheme::Uniform { .. })
    }

    pub fn panels(&self) -> &[Panel<T>] {
        match &self.scheme {
            GridScheme::Paneled { panels } => panels,
            GridScheme::Uniform { .. } => &[],
        }
    }

    pub fn shift(&self) -> Option<T> {
        match self.scheme {
            GridScheme::Uniform { shift } => Some(shift),
            GridScheme::Paneled { .. } => None,
        }
    }

    /// Approximate curve length `Σ w_m`.
    pub fn total_weight(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// Weighted sum `Σ w_m f_m`.
    pub fn integrate(&self, f: &[T]) -> T {
        self.weights.iter().zip(f).map(|(w, f)| *w * *f).sum()
    }

    pub fn panel_index(&self, q: T) -> Option<usize> {
        self.panels().iter().position(|p| p.contains(q))
    }

    /// Evaluates the density interpolant (trigonometric or per-panel
    /// Lagrange) of node values at parameter `q`.
    pub fn interpolate(&self, values: &[T], q: T) -> T {
        match &self.scheme {
            GridScheme::Uniform { shift } => trig_interpolate(values, *shift, q - q.floor()),
            GridScheme::Paneled { panels } => {
                let k = panels.iter().position(|p| p.contains(q)).unwrap_or(0);
                let p = &panels[k];
                p.interp.eval(&values[p.range()], p.local(q))
            }
        }
    }

    /// Local node spacing: the larger chord to the neighbouring nodes.
    pub fn node_spacing(&self) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let prev = self.points[(i + n - 1) % n];
                let next = self.points[(i + 1) % n];
                self.points[i].dist(prev).max(self.points[i].dist(next))
            })
            .collect()
    }

    pub fn max_spacing(&self) -> T {
        self.node_spacing().into_iter().fold(T::zero(), T::max)
    }
}
