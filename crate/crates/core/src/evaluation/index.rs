use crate::scalar::{Real, Vec2};

/// Uniform bucket grid over a fixed point set.
#[derive(Clone, Debug)]
pub(crate) struct PointGrid<T> {
    points: Vec<Vec2<T>>,
    lo: Vec2<T>,
    cell: T,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl<T: Real> PointGrid<T> {
    /// Roughly `per_cell` points per occupied bucket.
    pub fn new(points: Vec<Vec2<T>>, per_cell: usize) -> Self {
        let mut lo = Vec2::new(T::infinity(), T::infinity());
        let mut hi = Vec2::new(T::neg_infinity(), T::neg_infinity());
        for p in &points {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if points.is_empty() {
            lo = Vec2::zero();
            hi = Vec2::zero();
        }
        let w = (hi.x - lo.x).max(hi.y - lo.y).max(T::epsilon());
        let target = (points.len() / per_cell.max(1)).max(1);
        let side = T::from_usize_lossy(target).sqrt().ceil().max(T::one());
        let cell = w / side;
        let cells = |d: T| ((d / cell).floor().to_usize().unwrap_or(0) + 1).min(4096);
        let nx = cells(hi.x - lo.x);
        let ny = cells(hi.y - lo.y);
        let mut grid = Self {
            points,
            lo,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
        };
        for i in 0..grid.points.len() {
            let (cx, cy) = grid.cell_of(grid.points[i]);
            grid.buckets[cy * nx + cx].push(i as u32);
        }
        grid
    }

    fn coord(&self, v: T, n: usize) -> usize {
        let c = (v / self.cell).floor();
        if c <= T::zero() {
            0
        } else {
            c.to_usize().unwrap_or(n - 1).min(n - 1)
        }
    }

    fn cell_of(&self, p: Vec2<T>) -> (usize, usize) {
        (self.coord(p.x - self.lo.x, self.nx), self.coord(p.y - self.lo.y, self.ny))
    }

    /// Calls `f` for every point within distance `r` of `p` (plus possibly
    /// some slightly farther ones).
    pub fn within(&self, p: Vec2<T>, r: T, mut f: impl FnMut(usize)) {
        if self.points.is_empty() {
            return;
        }
        let (x0, y0) = self.cell_of(Vec2::new(p.x - r, p.y - r));
        let (x1, y1) = self.cell_of(Vec2::new(p.x + r, p.y + r));
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                for &i in &self.buckets[cy * self.nx + cx] {
                    f(i as usize);
                }
            }
        }
    }

    /// Index and distance of the nearest point.
    pub fn nearest(&self, p: Vec2<T>) -> Option<(usize, T)> {
        if self.points.is_empty() {
            return None;
        }
        let (cx, cy) = self.cell_of(p);
        let mut best: Option<(usize, T)> = None;
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            let (x0, x1) = (cx.saturating_sub(ring), (cx + ring).min(self.nx - 1));
            let (y0, y1) = (cy.saturating_sub(ring), (cy + ring).min(self.ny - 1));
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let on_ring = x.abs_diff(cx) == ring || y.abs_diff(cy) == ring;
                    if !on_ring {
                        continue;
                    }
                    for &i in &self.buckets[y * self.nx + x] {
                        let d = p.dist(self.points[i as usize]);
                        if best.is_none_or(|(_, b)| d < b) {
                            best = Some((i as usize, d));
                        }
                    }
                }
            }
            // cells beyond this ring are at least `ring` cells from the
            // projection of `p` onto the grid box
            if let Some((_, b)) = best {
                if b <= T::from_usize_lossy(ring) * self.cell {
                    break;
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec2<f64>> = (0..500)
            .map(|_| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.2..0.3)))
            .collect();
        let grid = PointGrid::new(pts.clone(), 4);
        for _ in 0..200 {
            let p = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let (i, d) = grid.nearest(p).unwrap();
            let brute = pts.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min);
            assert_eq!(d, brute, "{i}");
            let r = 0.15;
            let mut found = Vec::new();
            grid.within(p, r, |i| found.push(i));
            for (j, q) in pts.iter().enumerate() {
                if p.dist(*q) < r {
                    assert!(found.contains(&j));
                }
            }
        }
    }
}
