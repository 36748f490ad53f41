//! Smooth closed interfaces and the nesting tree of conductivity regions.
//!
//! Every curve is parameterized over `q ∈ [0, 1)` and oriented counterclockwise
//! after construction, so the outward normal is the tangent rotated by -90°
//! and a circle of radius `R` has curvature `+1/R`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::{Real, Vec2};

/// Truncated Fourier series `c[0] + Σ_{k≥1} c[k] cos(2πkq) + s[k] sin(2πkq)`.
///
/// `sin[0]` is ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries<T> {
    pub cos: Vec<T>,
    pub sin: Vec<T>,
}

impl<T: Real> FourierSeries<T> {
    pub fn new(cos: Vec<T>, sin: Vec<T>) -> Self {
        Self { cos, sin }
    }

    fn degree(&self) -> usize {
        self.cos.len().max(self.sin.len()).saturating_sub(1)
    }

    /// Value and first two q-derivatives.
    fn eval(&self, q: T) -> (T, T, T) {
        let w = T::two_pi();
        let mut f = self.cos.first().copied().unwrap_or_else(T::zero);
        let mut d1 = T::zero();
        let mut d2 = T::zero();
        for k in 1..=self.degree() {
            let a = self.cos.get(k).copied().unwrap_or_else(T::zero);
            let b = self.sin.get(k).copied().unwrap_or_else(T::zero);
            let kw = w * T::from_usize_lossy(k);
            let (s, c) = (kw * q).sin_cos();
            f += a * c + b * s;
            d1 += kw * (b * c - a * s);
            d2 -= kw * kw * (a * c + b * s);
        }
        (f, d1, d2)
    }
}

/// Analytic description of a closed curve.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveKind<T> {
    Circle {
        center: Vec2<T>,
        radius: T,
    },
    Ellipse {
        center: Vec2<T>,
        semi_axes: (T, T),
        rotation: T,
    },
    /// Polar curve `r(θ) = a + b cos(c θ)` about `center`; `c` must be a positive integer.
    PolarCosine {
        center: Vec2<T>,
        a: T,
        b: T,
        c: T,
    },
    Fourier {
        x: FourierSeries<T>,
        y: FourierSeries<T>,
    },
}

/// Differential geometry at one parameter value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveFrame<T> {
    pub point: Vec2<T>,
    pub tangent: Vec2<T>,
    pub normal: Vec2<T>,
    pub speed: T,
    pub curvature: T,
}

/// A validated smooth simple closed curve.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve<T> {
    kind: CurveKind<T>,
    /// +1 when the raw parameterization is counterclockwise, -1 otherwise.
    orientation: T,
}

/// Sampling controls for curve and tree validation.
#[derive(Clone, Copy, Debug)]
pub struct GeometryOptions<T> {
    pub samples: usize,
    pub clearance_floor: T,
    pub speed_floor: T,
}

impl<T: Real> Default for GeometryOptions<T> {
    fn default() -> Self {
        Self {
            samples: 4096,
            clearance_floor: T::lit(1e-6),
            speed_floor: T::lit(1e-10),
        }
    }
}

fn wrap01<T: Real>(q: T) -> T {
    let f = q - q.floor();
    if f >= T::one() {
        T::zero()
    } else {
        f
    }
}

impl<T: Real> Curve<T> {
    pub fn new(kind: CurveKind<T>) -> Result<Self> {
        Self::with_options(kind, &GeometryOptions::default())
    }

    pub fn circle(center: Vec2<T>, radius: T) -> Result<Self> {
        Self::new(CurveKind::Circle { center, radius })
    }

    pub fn ellipse(center: Vec2<T>, semi_axes: (T, T), rotation: T) -> Result<Self> {
        Self::new(CurveKind::Ellipse {
            center,
            semi_axes,
            rotation,
        })
    }

    pub fn polar_cosine(center: Vec2<T>, a: T, b: T, c: T) -> Result<Self> {
        Self::new(CurveKind::PolarCosine { center, a, b, c })
    }

    pub fn with_options(kind: CurveKind<T>, opts: &GeometryOptions<T>) -> Result<Self> {
        check_parameters(&kind)?;
        let mut curve = Self {
            kind,
            orientation: T::one(),
        };
        let n = opts.samples.max(64);
        let mut poly = Vec::with_capacity(n);
        for i in 0..n {
            let q = T::from_usize_lossy(i) / T::from_usize_lossy(n);
            let (p, d1, _) = curve.derivs(q);
            let speed = d1.norm();
            if !(speed > opts.speed_floor) {
                return Err(Error::DegenerateSpeed {
                    q: q.to_f64_lossy(),
                    speed: speed.to_f64_lossy(),
                });
            }
            poly.push(p);
        }
        if polyline_self_intersects(&poly) {
            return Err(Error::SelfIntersecting { curve: 0 });
        }
        if signed_area(&poly) < T::zero() {
            curve.orientation = -T::one();
        }
        Ok(curve)
    }

    pub fn kind(&self) -> &CurveKind<T> {
        &self.kind
    }

    /// Reference center used for polar angles of boundary data.
    pub fn center(&self) -> Vec2<T> {
        match &self.kind {
            CurveKind::Circle { center, .. }
            | CurveKind::Ellipse { center, .. }
            | CurveKind::PolarCosine { center, .. } => *center,
            CurveKind::Fourier { x, y } => Vec2::new(
                x.cos.first().copied().unwrap_or_else(T::zero),
                y.cos.first().copied().unwrap_or_else(T::zero),
            ),
        }
    }

    /// Position and first two derivatives of the raw parameterization.
    fn derivs(&self, q: T) -> (Vec2<T>, Vec2<T>, Vec2<T>) {
        let w = T::two_pi();
        match &self.kind {
            CurveKind::Circle { center, radius } => {
                let (s, c) = (w * q).sin_cos();
                let u = Vec2::new(c, s);
                (
                    *center + u * *radius,
                    u.perp() * (*radius * w),
                    -u * (*radius * w * w),
                )
            }
            CurveKind::Ellipse {
                center,
                semi_axes: (a, b),
                rotation,
            } => {
                let (s, c) = (w * q).sin_cos();
                let p = Vec2::new(*a * c, *b * s);
                let d1 = Vec2::new(-*a * s, *b * c) * w;
                let d2 = -p * (w * w);
                (
                    *center + p.rotate(*rotation),
                    d1.rotate(*rotation),
                    d2.rotate(*rotation),
                )
            }
            CurveKind::PolarCosine { center, a, b, c } => {
                let th = w * q;
                let (s, co) = th.sin_cos();
                let (sc, cc) = (*c * th).sin_cos();
                let r = *a + *b * cc;
                let r1 = -*b * *c * sc;
                let r2 = -*b * *c * *c * cc;
                let u = Vec2::new(co, s);
                let v = u.perp();
                let p = *center + u * r;
                let d1 = (u * r1 + v * r) * w;
                let d2 = (u * (r2 - r) + v * (r1 + r1)) * (w * w);
                (p, d1, d2)
            }
            CurveKind::Fourier { x, y } => {
                let (x0, x1, x2) = x.eval(q);
                let (y0, y1, y2) = y.eval(q);
                (Vec2::new(x0, y0), Vec2::new(x1, y1), Vec2::new(x2, y2))
            }
        }
    }

    /// Position on the curve; periodic in `q` with period 1.
    pub fn point(&self, q: T) -> Vec2<T> {
        let q = if self.orientation < T::zero() {
            T::one() - wrap01(q)
        } else {
            wrap01(q)
        };
        self.derivs(q).0
    }

    /// Unit tangent, outward normal, speed `|x'(q)|` and signed curvature.
    pub fn frame(&self, q: T) -> Result<CurveFrame<T>> {
        let qq = wrap01(q);
        let (p, mut d1, d2) = if self.orientation < T::zero() {
            self.derivs(T::one() - qq)
        } else {
            self.derivs(qq)
        };
        d1 = d1 * self.orientation;
        let speed = d1.norm();
        if !(speed > T::lit(1e-12)) {
            return Err(Error::DegenerateSpeed {
                q: q.to_f64_lossy(),
                speed: speed.to_f64_lossy(),
            });
        }
        let tangent = d1 * speed.recip();
        let normal = Vec2::new(tangent.y, -tangent.x);
        let curvature = d1.cross(d2) / (speed * speed * speed);
        Ok(CurveFrame {
            point: p,
            tangent,
            normal,
            speed,
            curvature,
        })
    }

    pub fn speed(&self, q: T) -> T {
        let qq = wrap01(q);
        let q = if self.orientation < T::zero() {
            T::one() - qq
        } else {
            qq
        };
        self.derivs(q).1.norm()
    }

    /// `n` uniformly spaced samples starting at `q = 0`.
    pub fn sample(&self, n: usize) -> Vec<Vec2<T>> {
        let nn = T::from_usize_lossy(n);
        (0..n)
            .map(|i| self.point(T::from_usize_lossy(i) / nn))
            .collect()
    }

    /// Arclength by composite Gauss-Legendre on `panels` equal pieces.
    pub fn length(&self) -> T {
        self.arc_length(T::zero(), T::one())
    }

    pub fn arc_length(&self, a: T, b: T) -> T {
        let (nodes, weights) = crate::discretization::gauss_legendre::<T>(20);
        let panels = 64;
        let h = (b - a) / T::from_usize_lossy(panels);
        let mut total = T::zero();
        for p in 0..panels {
            let lo = a + h * T::from_usize_lossy(p);
            for (t, w) in nodes.iter().zip(&weights) {
                let q = lo + h * (*t + T::one()) * T::half();
                total += *w * self.speed(q) * h * T::half();
            }
        }
        total
    }

    /// Winding number of the curve around `p`.
    pub fn winding_number(&self, p: Vec2<T>, samples: usize) -> i32 {
        winding_number(&self.sample(samples), p)
    }
}

fn check_parameters<T: Real>(kind: &CurveKind<T>) -> Result<()> {
    let bad = |s: &str| Err(Error::InvalidCurve(s.to_string()));
    match kind {
        CurveKind::Circle { radius, .. } => {
            if !(*radius > T::zero()) {
                return bad("circle radius must be positive");
            }
        }
        CurveKind::Ellipse {
            semi_axes: (a, b), ..
        } => {
            if !(*a > T::zero() && *b > T::zero()) {
                return bad("ellipse semi-axes must be positive");
            }
        }
        CurveKind::PolarCosine { a, b, c, .. } => {
            if !(*c >= T::one() && (*c - c.round()).abs() < T::lit(1e-12)) {
                return bad("polar-cosine frequency must be a positive integer");
            }
            if !(*a - b.abs() > T::zero()) {
                return bad("polar-cosine radius a + b cos(cθ) must stay positive");
            }
        }
        CurveKind::Fourier { x, y } => {
            if x.cos.is_empty() || y.cos.is_empty() {
                return bad("fourier curve needs constant terms");
            }
        }
    }
    Ok(())
}

/// Shoelace area; positive for counterclockwise polygons.
pub fn signed_area<T: Real>(poly: &[Vec2<T>]) -> T {
    let n = poly.len();
    let mut a = T::zero();
    for i in 0..n {
        a += poly[i].cross(poly[(i + 1) % n]);
    }
    a * T::half()
}

/// Winding number of a closed polygon around `p`.
pub fn winding_number<T: Real>(poly: &[Vec2<T>], p: Vec2<T>) -> i32 {
    let n = poly.len();
    let mut wn = 0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let side = (b - a).cross(p - a);
        if a.y <= p.y {
            if b.y > p.y && side > T::zero() {
                wn += 1;
            }
        } else if b.y <= p.y && side < T::zero() {
            wn -= 1;
        }
    }
    wn
}

fn orient<T: Real>(a: Vec2<T>, b: Vec2<T>, c: Vec2<T>) -> T {
    (b - a).cross(c - a)
}

fn segments_cross<T: Real>(p1: Vec2<T>, p2: Vec2<T>, p3: Vec2<T>, p4: Vec2<T>) -> bool {
    let d1 = orient(p3, p4, p1);
    let d2 = orient(p3, p4, p2);
    let d3 = orient(p1, p2, p3);
    let d4 = orient(p1, p2, p4);
    ((d1 > T::zero() && d2 < T::zero()) || (d1 < T::zero() && d2 > T::zero()))
        && ((d3 > T::zero() && d4 < T::zero()) || (d3 < T::zero() && d4 > T::zero()))
}

/// Detects crossings between non-adjacent edges of a closed polygon using a
/// uniform bucket grid.
pub fn polyline_self_intersects<T: Real>(poly: &[Vec2<T>]) -> bool {
    let n = poly.len();
    if n < 4 {
        return false;
    }
    let mut cell = T::zero();
    for i in 0..n {
        cell = cell.max(poly[i].dist(poly[(i + 1) % n]));
    }
    if !(cell > T::zero()) {
        return true;
    }
    let cell = cell * T::lit(2.0);
    let key = |v: T| (v / cell).floor().to_i64().unwrap_or(0);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let (x0, x1) = (key(a.x.min(b.x)), key(a.x.max(b.x)));
        let (y0, y1) = (key(a.y.min(b.y)), key(a.y.max(b.y)));
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                buckets.entry((cx, cy)).or_default().push(i);
            }
        }
    }
    for segs in buckets.values() {
        for (ii, &i) in segs.iter().enumerate() {
            for &j in &segs[ii + 1..] {
                let adjacent = j == (i + 1) % n || i == (j + 1) % n || i == j;
                if adjacent {
                    continue;
                }
                if segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]) {
                    return true;
                }
            }
        }
    }
    false
}

fn bbox<T: Real>(pts: &[Vec2<T>]) -> (Vec2<T>, Vec2<T>) {
    let mut lo = pts[0];
    let mut hi = pts[0];
    for p in pts {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (lo, hi)
}

fn bbox_distance<T: Real>(a: (Vec2<T>, Vec2<T>), b: (Vec2<T>, Vec2<T>)) -> T {
    let dx = (b.0.x - a.1.x).max(a.0.x - b.1.x).max(T::zero());
    let dy = (b.0.y - a.1.y).max(a.0.y - b.1.y).max(T::zero());
    dx.hypot(dy)
}

/// Distance between two curves: coarse all-pairs sampling followed by a
/// zooming local search around the best candidate pairs.
pub fn curve_distance<T: Real>(a: &Curve<T>, b: &Curve<T>) -> T {
    const COARSE: usize = 256;
    let pa = a.sample(COARSE);
    let pb = b.sample(COARSE);
    let seg = |p: &[Vec2<T>]| {
        (0..p.len())
            .map(|i| p[i].dist(p[(i + 1) % p.len()]))
            .fold(T::zero(), T::max)
    };
    let slack = seg(&pa) + seg(&pb);
    let mut pairs: Vec<(T, usize, usize)> = Vec::new();
    let mut dmin = T::infinity();
    for (i, x) in pa.iter().enumerate() {
        for (j, y) in pb.iter().enumerate() {
            let d = x.dist(*y);
            if d < dmin {
                dmin = d;
            }
            pairs.push((d, i, j));
        }
    }
    pairs.retain(|p| p.0 <= dmin + slack);
    pairs.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    pairs.truncate(48);
    let h = T::one() / T::from_usize_lossy(COARSE);
    let mut best = dmin;
    for &(_, i, j) in &pairs {
        let mut qa = T::from_usize_lossy(i) * h;
        let mut qb = T::from_usize_lossy(j) * h;
        let mut win = h;
        let mut cur = a.point(qa).dist(b.point(qb));
        for _ in 0..40 {
            let mut improved = (qa, qb, cur);
            for s in -4i32..=4 {
                for t in -4i32..=4 {
                    let ta = qa + win * T::lit(s as f64 / 4.0);
                    let tb = qb + win * T::lit(t as f64 / 4.0);
                    let d = a.point(ta).dist(b.point(tb));
                    if d < improved.2 {
                        improved = (ta, tb, d);
                    }
                }
            }
            qa = improved.0;
            qb = improved.1;
            cur = improved.2;
            win = win * T::lit(0.5);
        }
        best = best.min(cur);
    }
    best
}

/// For each curve, the distance to the nearest other curve (`+∞` if alone).
pub fn min_clearance<T: Real>(curves: &[Curve<T>]) -> Vec<T> {
    let n = curves.len();
    let mut best = vec![T::infinity(); n];
    if n < 2 {
        return best;
    }
    let boxes: Vec<_> = curves.iter().map(|c| bbox(&c.sample(256))).collect();
    let mut order: Vec<(T, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            order.push((bbox_distance(boxes[i], boxes[j]), i, j));
        }
    }
    order.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    for (bd, i, j) in order {
        if bd >= best[i].max(best[j]) {
            continue;
        }
        let d = curve_distance(&curves[i], &curves[j]);
        best[i] = best[i].min(d);
        best[j] = best[j].min(d);
    }
    best
}

/// Nesting structure of the conductivity regions.
///
/// Indices are 0-based and follow the input curve order; `root` is the curve
/// bounding the whole domain (region 1 in the usual numbering).
#[derive(Clone, Debug)]
pub struct RegionTree<T> {
    pub curves: Vec<Curve<T>>,
    pub sigma: Vec<T>,
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub descendants: Vec<Vec<usize>>,
    pub depth: Vec<usize>,
    pub clearance: Vec<T>,
}

impl<T: Real> RegionTree<T> {
    pub fn build(curves: Vec<Curve<T>>, sigma: Vec<T>) -> Result<Self> {
        Self::build_with(curves, sigma, &GeometryOptions::default())
    }

    pub fn build_with(
        curves: Vec<Curve<T>>,
        sigma: Vec<T>,
        opts: &GeometryOptions<T>,
    ) -> Result<Self> {
        let n = curves.len();
        if n == 0 {
            return Err(Error::NotNested);
        }
        if sigma.len() != n {
            return Err(Error::SigmaCount {
                expected: n,
                got: sigma.len(),
            });
        }
        for (i, s) in sigma.iter().enumerate() {
            if !(*s > T::zero()) {
                return Err(Error::BadSigma {
                    region: i,
                    sigma: s.to_f64_lossy(),
                });
            }
        }
        let clearance = min_clearance(&curves);
        for i in 0..n {
            if clearance[i] < opts.clearance_floor {
                let other = (0..n)
                    .filter(|&j| j != i)
                    .min_by(|&a, &b| {
                        let da = curve_distance(&curves[i], &curves[a]);
                        let db = curve_distance(&curves[i], &curves[b]);
                        da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
                    })
                    .unwrap_or(i);
                return Err(Error::IntersectingCurves {
                    a: i.min(other),
                    b: i.max(other),
                    clearance: clearance[i].to_f64_lossy(),
                });
            }
        }
        let polys: Vec<Vec<Vec2<T>>> = curves.iter().map(|c| c.sample(opts.samples)).collect();
        // contains[j][i]: curve i lies inside curve j
        let mut contains = vec![vec![false; n]; n];
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    contains[j][i] = winding_number(&polys[j], curves[i].point(T::zero())) != 0;
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if contains[i][j] && contains[j][i] {
                    return Err(Error::NotNested);
                }
            }
        }
        let roots: Vec<usize> = (0..n)
            .filter(|&j| (0..n).all(|i| i == j || contains[j][i]))
            .collect();
        if roots.len() != 1 {
            return Err(Error::NotNested);
        }
        let root = roots[0];
        let ancestors: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| contains[j][i]).collect())
            .collect();
        let depth: Vec<usize> = ancestors.iter().map(Vec::len).collect();
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        for i in 0..n {
            if i == root {
                continue;
            }
            // innermost container has the most ancestors of its own
            let p = ancestors[i]
                .iter()
                .copied()
                .max_by_key(|&j| depth[j])
                .ok_or(Error::NotNested)?;
            parent[i] = Some(p);
            children[p].push(i);
        }
        let descendants = (0..n)
            .map(|j| (0..n).filter(|&i| contains[j][i]).collect())
            .collect();
        Ok(Self {
            curves,
            sigma,
            root,
            parent,
            children,
            descendants,
            depth,
            clearance,
        })
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Conductivity just outside interface `i` (`σ_{p_i}`); the root has none.
    pub fn outer_sigma(&self, i: usize) -> Option<T> {
        self.parent[i].map(|p| self.sigma[p])
    }

    /// Region whose conductivity applies at `p`, or `None` outside the domain.
    pub fn region_of(&self, p: Vec2<T>, samples: usize) -> Option<usize> {
        let mut found: Option<usize> = None;
        for (i, c) in self.curves.iter().enumerate() {
            if c.winding_number(p, samples) != 0 && found.is_none_or(|f| self.depth[i] > self.depth[f]) {
                found = Some(i);
            }
        }
        found
    }
}
