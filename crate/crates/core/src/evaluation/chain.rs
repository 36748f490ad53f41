use crate::discretization::{gauss_legendre_on, InterfaceGrid};
use crate::error::{Error, Result};
use crate::geometry::Curve;
use crate::scalar::{Real, Vec2};
use rayon::prelude::*;

/// Gauss-Legendre order used for sub-arc charges.
const CHARGE_ORDER: usize = 12;

/// Relative inconsistency above which an even closed chain is rejected.
const RANK_TOL: f64 = 1e-2;

/// Polyline of straight segments carrying piecewise linear charge.
///
/// Segment `k` joins `points[k]` to `points[k + 1]` (wrapping for closed
/// chains) with density running linearly from `densities[k]` to
/// `densities[k + 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentChain<T> {
    pub points: Vec<Vec2<T>>,
    pub densities: Vec<T>,
    /// Target charge of each curved sub-arc.
    pub charges: Vec<T>,
    pub closed: bool,
    /// Relative residual of the charge-matching system.
    pub residual: T,
}

impl<T: Real> SegmentChain<T> {
    /// Chain with endpoint densities fitted to the given sub-arc charges.
    ///
    /// Closed chains need `charges.len() == points.len()`, open ones one
    /// fewer.
    pub fn from_charges(points: Vec<Vec2<T>>, charges: Vec<T>, closed: bool) -> Result<Self> {
        let n = points.len();
        let expected = if closed { n } else { n.saturating_sub(1) };
        if n < 2 || charges.len() != expected {
            return Err(Error::IndexMismatch {
                expected,
                got: charges.len(),
            });
        }
        let mut rhs = Vec::with_capacity(expected);
        for (k, q) in charges.iter().enumerate() {
            let len = points[k].dist(points[(k + 1) % n]);
            if len < crate::operator::kernel::coincidence_floor::<T>() {
                return Err(Error::DegenerateSegment);
            }
            rhs.push(T::lit(2.0) * *q / len);
        }
        let (densities, residual) = if closed {
            solve_closed(&rhs)
        } else {
            (solve_open(&rhs), T::zero())
        };
        if residual > T::lit(RANK_TOL) {
            return Err(Error::RankFailure {
                residual: residual.to_f64_lossy(),
            });
        }
        Ok(Self {
            points,
            densities,
            charges,
            closed,
            residual,
        })
    }

    pub fn segments(&self) -> usize {
        if self.closed {
            self.points.len()
        } else {
            self.points.len() - 1
        }
    }

    /// End points and end densities of segment `k`.
    pub fn segment(&self, k: usize) -> (Vec2<T>, Vec2<T>, T, T) {
        let j = (k + 1) % self.points.len();
        (self.points[k], self.points[j], self.densities[k], self.densities[j])
    }

    /// Charge carried by segment `k`: mean end density times chord length.
    pub fn segment_charge(&self, k: usize) -> T {
        let (a, b, ga, gb) = self.segment(k);
        (ga + gb) * T::half() * a.dist(b)
    }

    /// Distance from `x` to the polyline.
    pub fn distance(&self, x: Vec2<T>) -> T {
        (0..self.segments())
            .map(|k| {
                let (a, b, _, _) = self.segment(k);
                point_segment_distance(x, a, b)
            })
            .fold(T::infinity(), T::min)
    }
}

pub fn point_segment_distance<T: Real>(x: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> T {
    let v = b - a;
    let l2 = v.norm_sq();
    if l2 == T::zero() {
        return x.dist(a);
    }
    let t = ((x - a).dot(v) / l2).max(T::zero()).min(T::one());
    x.dist(a.lerp(b, t))
}

/// Min-norm solution of `g_k + g_{k+1} = a_k` (cyclic).
///
/// An odd count has a unique solution. An even count is singular with null
/// vector `(1, -1, 1, ...)`; the alternating part of `a` is projected out
/// and reported as the relative residual.
fn solve_closed<T: Real>(a: &[T]) -> (Vec<T>, T) {
    let n = a.len();
    let sign = |k: usize| if k.is_multiple_of(2) { T::one() } else { -T::one() };
    let alt: T = a.iter().enumerate().map(|(k, v)| sign(k) * *v).sum();
    let mut g = vec![T::zero(); n];
    if n % 2 == 1 {
        g[0] = alt * T::half();
        for k in 0..n - 1 {
            g[k + 1] = a[k] - g[k];
        }
        return (g, T::zero());
    }
    let scale: T = a.iter().map(|v| v.abs()).sum();
    let residual = if scale > T::zero() { alt.abs() / scale } else { T::zero() };
    let corr = alt / T::from_usize_lossy(n);
    for k in 0..n - 1 {
        g[k + 1] = (a[k] - sign(k) * corr) - g[k];
    }
    let null: T = g.iter().enumerate().map(|(k, v)| sign(k) * *v).sum::<T>() / T::from_usize_lossy(n);
    for (k, v) in g.iter_mut().enumerate() {
        *v -= sign(k) * null;
    }
    (g, residual)
}

/// Min-norm solution of the underdetermined open system
/// `g_k + g_{k+1} = a_k`, `k < n - 1`, via `g = Bᵀ (B Bᵀ)⁻¹ a` with the
/// tridiagonal `B Bᵀ = tridiag(1, 2, 1)`.
fn solve_open<T: Real>(a: &[T]) -> Vec<T> {
    let m = a.len();
    // Thomas algorithm
    let mut c = vec![T::zero(); m];
    let mut d = vec![T::zero(); m];
    for i in 0..m {
        let (sub, prev_c, prev_d) = if i == 0 {
            (T::zero(), T::zero(), T::zero())
        } else {
            (T::one(), c[i - 1], d[i - 1])
        };
        let den = T::lit(2.0) - sub * prev_c;
        c[i] = T::one() / den;
        d[i] = (a[i] - sub * prev_d) / den;
    }
    let mut y = vec![T::zero(); m];
    for i in (0..m).rev() {
        y[i] = if i + 1 < m { d[i] - c[i] * y[i + 1] } else { d[i] };
    }
    let mut g = vec![T::zero(); m + 1];
    for (k, yk) in y.iter().enumerate() {
        g[k] += *yk;
        g[k + 1] += *yk;
    }
    g
}

/// `∫ γ dl` over the parameter interval `[q0, q1]` from the grid interpolant.
fn sub_arc_charge<T: Real>(curve: &Curve<T>, grid: &InterfaceGrid<T>, gamma: &[T], q0: T, q1: T) -> T {
    let (t, w) = gauss_legendre_on(CHARGE_ORDER, q0, q1);
    t.iter()
        .zip(&w)
        .map(|(q, w)| *w * grid.interpolate(gamma, *q) * curve.speed(*q))
        .sum()
}

/// Cardinal function of the trigonometric interpolant on `m` equispaced
/// nodes, matching the barycentric form used by the grids.
fn cardinal<T: Real>(m: usize, t: T) -> T {
    let pi = T::PI();
    let s = (pi * t).sin();
    if s.abs() < T::epsilon() * T::lit(4.0) {
        return T::one();
    }
    let mm = T::from_usize_lossy(m);
    let top = (mm * pi * t).sin();
    if m % 2 == 1 {
        top / (mm * s)
    } else {
        top * (pi * t).cos() / (mm * s)
    }
}

/// Closed chain through all nodes of a uniform grid.
///
/// The Gauss-Legendre points sit at the same offsets in every node
/// interval, so the interpolant there is a circulant product with the
/// cardinal function.
pub fn uniform_chain<T: Real>(curve: &Curve<T>, grid: &InterfaceGrid<T>, gamma: &[T]) -> Result<SegmentChain<T>> {
    let n = grid.len();
    let h = T::from_usize_lossy(n).recip();
    let (tau, w) = gauss_legendre_on(CHARGE_ORDER, T::zero(), h);
    let kernels: Vec<Vec<T>> = tau
        .iter()
        .map(|t| (0..n).map(|d| cardinal(n, *t + T::from_usize_lossy(d) * h)).collect())
        .collect();
    let charges = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut q = T::zero();
            for ((t, w), ker) in tau.iter().zip(&w).zip(&kernels) {
                let mut g = T::zero();
                for (i, gi) in gamma.iter().enumerate() {
                    g += *gi * ker[(k + n - i) % n];
                }
                q += *w * g * curve.speed(grid.q[k] + *t);
            }
            q
        })
        .collect();
    SegmentChain::from_charges(grid.points.clone(), charges, true)
}

/// Open chain over one panel: the panel's end points and its nodes.
pub fn panel_chain<T: Real>(
    curve: &Curve<T>,
    grid: &InterfaceGrid<T>,
    gamma: &[T],
    panel: usize,
) -> Result<SegmentChain<T>> {
    let p = &grid.panels()[panel];
    let mut q = Vec::with_capacity(p.order + 2);
    q.push(p.a);
    q.extend(grid.q[p.range()].iter().map(|v| p.local(*v)));
    q.push(p.b);
    let points = q.iter().map(|v| curve.point(*v)).collect();
    let charges = q
        .windows(2)
        .map(|w| sub_arc_charge(curve, grid, gamma, w[0], w[1]))
        .collect();
    SegmentChain::from_charges(points, charges, false)
}

/// Chains covering a whole interface: one closed chain for uniform grids,
/// one open chain per panel otherwise.
pub fn build_segment_chains<T: Real>(
    curve: &Curve<T>,
    grid: &InterfaceGrid<T>,
    gamma: &[T],
) -> Result<Vec<SegmentChain<T>>> {
    if grid.is_uniform() {
        Ok(vec![uniform_chain(curve, grid, gamma)?])
    } else {
        (0..grid.panels().len())
            .map(|k| panel_chain(curve, grid, gamma, k))
            .collect()
    }
}
