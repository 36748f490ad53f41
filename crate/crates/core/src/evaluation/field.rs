use rayon::prelude::*;

use super::chain::{build_segment_chains, point_segment_distance, SegmentChain};
use super::index::PointGrid;
use super::segment::segment_potential;
use crate::error::Result;
use crate::geometry::winding_number;
use crate::operator::kernel::coincidence_floor;
use crate::operator::{layer_potential_sum, Backend, SumKernel};
use crate::scalar::{Real, Vec2};
use crate::solver::DensitySolution;

/// Samples used for the outer-boundary containment test.
const OUTER_SAMPLES: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EvalMethod {
    Naive,
    /// Some curve portions were replaced by line-segment potentials.
    Close,
    /// Outside the outer boundary; the value is still the layer potential.
    Outside,
}

impl EvalMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalMethod::Naive => "naive",
            EvalMethod::Close => "close",
            EvalMethod::Outside => "outside",
        }
    }
}

impl std::fmt::Display for EvalMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample<T> {
    pub point: Vec2<T>,
    pub u: T,
    pub method: EvalMethod,
    /// Distance to the nearest discretized curve.
    pub dist: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    /// Nodes closer than `close_factor` times their spacing are replaced.
    pub close_factor: f64,
    pub backend: Backend,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            close_factor: 5.0,
            backend: Backend::Direct,
        }
    }
}

/// Unit of curve replaced by line segments: a single node on a uniform grid
/// or a whole panel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Unit {
    interface: u32,
    index: u32,
}

/// Field evaluator for a solved problem. Construction builds the segment
/// chains and spatial index once; evaluation is parallel over points.
pub struct Evaluator<'a, T> {
    solution: &'a DensitySolution<T>,
    opts: EvalOptions,
    offsets: Vec<usize>,
    sources: Vec<Vec2<T>>,
    charges: Vec<T>,
    spacing: Vec<T>,
    unit_of: Vec<Unit>,
    chains: Vec<Vec<SegmentChain<T>>>,
    index: PointGrid<T>,
    reach: T,
    outer: Vec<Vec2<T>>,
    outer_tol: T,
}

impl<'a, T: Real> Evaluator<'a, T> {
    pub fn new(solution: &'a DensitySolution<T>, opts: EvalOptions) -> Result<Self> {
        let tree = &solution.tree;
        let grids = &solution.grids;
        let chains = grids
            .par_iter()
            .enumerate()
            .map(|(i, g)| build_segment_chains(&tree.curves[i], g, &solution.gamma[i]))
            .collect::<Result<Vec<_>>>()?;

        let mut offsets = vec![0];
        let mut sources = Vec::new();
        let mut charges = Vec::new();
        let mut spacing = Vec::new();
        let mut unit_of = Vec::new();
        for (i, g) in grids.iter().enumerate() {
            sources.extend_from_slice(&g.points);
            charges.extend(g.weights.iter().zip(&solution.gamma[i]).map(|(w, y)| *w * *y));
            spacing.extend(g.node_spacing());
            if g.is_uniform() {
                unit_of.extend((0..g.len()).map(|k| Unit {
                    interface: i as u32,
                    index: k as u32,
                }));
            } else {
                for (p, panel) in g.panels().iter().enumerate() {
                    unit_of.extend(panel.range().map(|_| Unit {
                        interface: i as u32,
                        index: p as u32,
                    }));
                }
            }
            offsets.push(sources.len());
        }
        let cf = T::lit(opts.close_factor);
        let reach = cf * spacing.iter().copied().fold(T::zero(), T::max);
        let index = PointGrid::new(sources.clone(), 4);

        let outer_curve = &tree.curves[tree.root];
        let outer = outer_curve.sample(OUTER_SAMPLES);
        let edge = outer_curve.length() / T::from_usize_lossy(OUTER_SAMPLES);
        let kappa = grids[tree.root]
            .curvatures
            .iter()
            .fold(T::zero(), |m, k| m.max(k.abs()));
        // a point on the curve lies at most one sagitta outside the polygon
        let outer_tol = T::lit(4.0) * edge * edge * kappa.max(T::one()) + T::lit(1e3) * T::epsilon();

        Ok(Self {
            solution,
            opts,
            offsets,
            sources,
            charges,
            spacing,
            unit_of,
            chains,
            index,
            reach,
            outer,
            outer_tol,
        })
    }

    pub fn solution(&self) -> &DensitySolution<T> {
        self.solution
    }

    pub fn chains(&self, interface: usize) -> &[SegmentChain<T>] {
        &self.chains[interface]
    }

    fn naive_sum(&self, points: &[Vec2<T>]) -> Vec<T> {
        if points.is_empty() {
            return Vec::new();
        }
        layer_potential_sum(&self.sources, &self.charges, points, SumKernel::Potential, self.opts.backend)
    }

    /// Quadrature nodes within the close-evaluation reach of `x`.
    fn close_nodes(&self, x: Vec2<T>) -> Vec<usize> {
        let cf = T::lit(self.opts.close_factor);
        let mut out = Vec::new();
        self.index.within(x, self.reach, |j| {
            if x.dist(self.sources[j]) < cf * self.spacing[j] {
                out.push(j);
            }
        });
        out.sort_unstable();
        out
    }

    /// Containment in the outer boundary, counting points on the curve as
    /// inside. The sampled polygon cuts corners by at most `outer_tol`.
    fn inside(&self, x: Vec2<T>, dist: T) -> bool {
        if winding_number(&self.outer, x) != 0 {
            return true;
        }
        if dist > self.reach {
            return false;
        }
        let n = self.outer.len();
        (0..n).any(|k| point_segment_distance(x, self.outer[k], self.outer[(k + 1) % n]) <= self.outer_tol)
    }

    /// Distance to the discretized curves near `x`: the segments adjacent to
    /// the nearest node and to any node in `near`.
    fn distance(&self, x: Vec2<T>, near: &[usize]) -> T {
        let mut best = T::infinity();
        let nearest = self.index.nearest(x).map(|(j, _)| j);
        for j in near.iter().copied().chain(nearest) {
            best = best.min(self.adjacent_distance(x, j));
        }
        best
    }

    fn adjacent_distance(&self, x: Vec2<T>, flat: usize) -> T {
        let unit = self.unit_of[flat];
        let i = unit.interface as usize;
        let local = flat - self.offsets[i];
        let grid = &self.solution.grids[i];
        let chains = &self.chains[i];
        let (chain, k) = if grid.is_uniform() {
            (&chains[0], local)
        } else {
            let panel = &grid.panels()[unit.index as usize];
            (&chains[unit.index as usize], local - panel.start + 1)
        };
        let n = chain.points.len();
        let prev = if chain.closed { (k + n - 1) % n } else { k - 1 };
        let next = (k + 1) % n;
        let p = chain.points[k];
        point_segment_distance(x, chain.points[prev], p).min(point_segment_distance(x, p, chain.points[next]))
    }

    /// Naive contribution of node `flat` at `x`, mirroring the direct sum.
    fn node_term(&self, x: Vec2<T>, flat: usize) -> T {
        let floor = coincidence_floor::<T>();
        let r2 = (x - self.sources[flat]).norm_sq();
        if r2 >= floor * floor {
            self.charges[flat] * r2.ln() * T::half() / T::two_pi()
        } else {
            T::zero()
        }
    }

    fn seg(a: Vec2<T>, b: Vec2<T>, ga: T, gb: T, x: Vec2<T>) -> T {
        // chain segments are validated non-degenerate at construction
        segment_potential(a, b, ga, gb, x).unwrap_or_else(|_| T::zero())
    }

    /// Correction replacing the naive terms of `units` by segment potentials.
    fn correction(&self, x: Vec2<T>, units: &[Unit]) -> T {
        let mut acc = T::zero();
        for u in units {
            let i = u.interface as usize;
            let grid = &self.solution.grids[i];
            let chains = &self.chains[i];
            if grid.is_uniform() {
                let k = u.index as usize;
                let chain = &chains[0];
                let n = chain.points.len();
                let prev = (k + n - 1) % n;
                let next = (k + 1) % n;
                let (p, g) = (chain.points[k], chain.densities[k]);
                let mid_prev = chain.points[prev].lerp(p, T::half());
                let g_prev = (chain.densities[prev] + g) * T::half();
                let mid_next = p.lerp(chain.points[next], T::half());
                let g_next = (chain.densities[next] + g) * T::half();
                acc += Self::seg(mid_prev, p, g_prev, g, x) + Self::seg(p, mid_next, g, g_next, x);
                acc -= self.node_term(x, self.offsets[i] + k);
            } else {
                let chain = &chains[u.index as usize];
                for s in 0..chain.segments() {
                    let (a, b, ga, gb) = chain.segment(s);
                    acc += Self::seg(a, b, ga, gb, x);
                }
                let panel = &grid.panels()[u.index as usize];
                for k in panel.range() {
                    acc -= self.node_term(x, self.offsets[i] + k);
                }
            }
        }
        acc
    }

    /// Plain quadrature at every point.
    pub fn eval_naive(&self, points: &[Vec2<T>]) -> Vec<FieldSample<T>> {
        let u = self.naive_sum(points);
        points
            .par_iter()
            .zip(u.par_iter())
            .map(|(&x, &u)| {
                let near = self.close_nodes(x);
                let dist = self.distance(x, &near);
                let method = if self.inside(x, dist) {
                    EvalMethod::Naive
                } else {
                    EvalMethod::Outside
                };
                FieldSample {
                    point: x,
                    u,
                    method,
                    dist,
                }
            })
            .collect()
    }

    /// Quadrature with every node inside the close reach replaced by its
    /// share of the segment chain (a whole panel on paneled interfaces).
    pub fn eval_close(&self, points: &[Vec2<T>]) -> Vec<FieldSample<T>> {
        let u = self.naive_sum(points);
        points
            .par_iter()
            .zip(u.par_iter())
            .map(|(&x, &u)| {
                let near = self.close_nodes(x);
                let dist = self.distance(x, &near);
                let mut units: Vec<Unit> = near.iter().map(|&j| self.unit_of[j]).collect();
                units.dedup();
                let (u, method) = if units.is_empty() {
                    (u, EvalMethod::Naive)
                } else {
                    (u + self.correction(x, &units), EvalMethod::Close)
                };
                let method = if self.inside(x, dist) {
                    method
                } else {
                    EvalMethod::Outside
                };
                FieldSample {
                    point: x,
                    u,
                    method,
                    dist,
                }
            })
            .collect()
    }
}

/// One-shot naive evaluation.
pub fn eval_naive<T: Real>(solution: &DensitySolution<T>, points: &[Vec2<T>], backend: Backend) -> Result<Vec<FieldSample<T>>> {
    let ev = Evaluator::new(
        solution,
        EvalOptions {
            backend,
            ..EvalOptions::default()
        },
    )?;
    Ok(ev.eval_naive(points))
}

/// One-shot evaluation with close-evaluation dispatch.
pub fn eval_close<T: Real>(solution: &DensitySolution<T>, points: &[Vec2<T>], opts: EvalOptions) -> Result<Vec<FieldSample<T>>> {
    Ok(Evaluator::new(solution, opts)?.eval_close(points))
}
