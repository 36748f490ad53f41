//! Fast multipole summation of `Σ q_j log|z - z_j|` and its gradient.
//!
//! A uniform quadtree over the bounding square of sources and targets, stored
//! sparsely per level. Expansions are complex Laurent/Taylor series in
//! coordinates scaled by the box side, so coefficients stay `O(1)` at every
//! depth. All loops visit boxes in sorted key order, so results do not depend
//! on the thread count.

use std::collections::HashMap;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

/// Convergence ratio of a multipole-to-local translation between boxes
/// separated by one box.
const SEPARATION_RATIO: f64 = 0.55;
const MIN_LEVEL: u32 = 2;
const MAX_LEVEL: u32 = 12;
const MIN_ORDER: usize = 6;
const MAX_ORDER: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FmmOptions {
    /// Requested absolute accuracy.
    pub eps: f64,
    /// Maximum sources per leaf before the tree is deepened.
    pub leaf_size: usize,
}

impl Default for FmmOptions {
    fn default() -> Self {
        Self {
            eps: 1e-9,
            leaf_size: 64,
        }
    }
}

/// Potentials and gradients at the targets. Source-target pairs closer than
/// `floor` are skipped.
pub struct FmmResult {
    pub potential: Vec<f64>,
    pub gradient: Vec<[f64; 2]>,
}

type Key = (u32, u32);

struct Frame {
    origin: [f64; 2],
    size: f64,
}

impl Frame {
    fn new(points: impl Iterator<Item = [f64; 2]>) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let size = if span > 0.0 { span * (1.0 + 1e-10) } else { 1.0 };
        Self { origin: lo, size }
    }

    fn local(&self, p: [f64; 2]) -> C64 {
        C64::new((p[0] - self.origin[0]) / self.size, (p[1] - self.origin[1]) / self.size)
    }
}

fn key_at(z: C64, level: u32) -> Key {
    let n = 1u32 << level;
    let f = n as f64;
    let ix = ((z.re * f).floor().max(0.0) as u32).min(n - 1);
    let iy = ((z.im * f).floor().max(0.0) as u32).min(n - 1);
    (ix, iy)
}

fn center(key: Key, level: u32) -> C64 {
    let side = 1.0 / (1u32 << level) as f64;
    C64::new((key.0 as f64 + 0.5) * side, (key.1 as f64 + 0.5) * side)
}

fn adjacent(a: Key, b: Key) -> bool {
    a.0.abs_diff(b.0) <= 1 && a.1.abs_diff(b.1) <= 1
}

fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        c[i][0] = 1.0;
        for k in 1..=i {
            c[i][k] = c[i - 1][k - 1] + if k < i { c[i - 1][k] } else { 0.0 };
        }
    }
    c
}

fn sorted_keys<V>(m: &HashMap<Key, V>) -> Vec<Key> {
    let mut k: Vec<Key> = m.keys().copied().collect();
    k.sort_unstable();
    k
}

/// Expansion order needed for accuracy `eps` given total absolute charge.
pub fn expansion_order(eps: f64, total_charge: f64) -> usize {
    let rel = (eps / total_charge.max(1e-300)).clamp(1e-300, 0.5);
    let p = (rel.ln() / SEPARATION_RATIO.ln()).ceil() as usize + 2;
    p.clamp(MIN_ORDER, MAX_ORDER)
}

/// Sums over sources for every target.
pub fn fmm_sum(
    sources: &[[f64; 2]],
    charges: &[f64],
    targets: &[[f64; 2]],
    floor: f64,
    opts: &FmmOptions,
) -> FmmResult {
    let nt = targets.len();
    if sources.is_empty() || nt == 0 {
        return FmmResult {
            potential: vec![0.0; nt],
            gradient: vec![[0.0; 2]; nt],
        };
    }
    let frame = Frame::new(sources.iter().chain(targets.iter()).copied());
    let zs: Vec<C64> = sources.iter().map(|&p| frame.local(p)).collect();
    let zt: Vec<C64> = targets.iter().map(|&p| frame.local(p)).collect();

    // deepen until leaves hold at most `leaf_size` sources
    let mut level = MIN_LEVEL;
    while level < MAX_LEVEL {
        let mut counts: HashMap<Key, usize> = HashMap::new();
        for &z in &zs {
            *counts.entry(key_at(z, level)).or_insert(0) += 1;
        }
        if counts.values().all(|&c| c <= opts.leaf_size) {
            break;
        }
        level += 1;
    }

    let total: f64 = charges.iter().map(|q| q.abs()).sum();
    // gradients lose roughly a factor of the inverse leaf side
    let p = expansion_order(opts.eps, total * (1u64 << level) as f64);
    let binom = binomials(2 * p + 1);

    let mut leaf_sources: HashMap<Key, Vec<usize>> = HashMap::new();
    for (j, &z) in zs.iter().enumerate() {
        leaf_sources.entry(key_at(z, level)).or_default().push(j);
    }

    // upward pass
    let mut multipoles: Vec<HashMap<Key, Vec<C64>>> = vec![HashMap::new(); level as usize + 1];
    {
        let side = 1.0 / (1u32 << level) as f64;
        let keys = sorted_keys(&leaf_sources);
        let leaf: Vec<(Key, Vec<C64>)> = keys
            .par_iter()
            .map(|&k| {
                let c = center(k, level);
                let mut a = vec![C64::new(0.0, 0.0); p + 1];
                for &j in &leaf_sources[&k] {
                    let q = charges[j];
                    a[0] += q;
                    let w = (zs[j] - c) / side;
                    let mut wk = C64::new(1.0, 0.0);
                    for (kk, ak) in a.iter_mut().enumerate().skip(1) {
                        wk *= w;
                        *ak -= wk * (q / kk as f64);
                    }
                }
                (k, a)
            })
            .collect();
        multipoles[level as usize] = leaf.into_iter().collect();
    }
    for l in (MIN_LEVEL..level).rev() {
        let child = &multipoles[l as usize + 1];
        let mut parents: HashMap<Key, Vec<C64>> = HashMap::new();
        for ck in sorted_keys(child) {
            let pk = (ck.0 / 2, ck.1 / 2);
            let side = 1.0 / (1u32 << l) as f64;
            let zeta = (center(ck, l + 1) - center(pk, l)) / side;
            let a = &child[&ck];
            let b = parents
                .entry(pk)
                .or_insert_with(|| vec![C64::new(0.0, 0.0); p + 1]);
            b[0] += a[0];
            let mut zl = C64::new(1.0, 0.0);
            let zpow: Vec<C64> = (0..=p)
                .map(|_| {
                    let v = zl;
                    zl *= zeta;
                    v
                })
                .collect();
            for lidx in 1..=p {
                let mut s = -a[0] * zpow[lidx] / lidx as f64;
                let mut half = 1.0;
                for k in 1..=lidx {
                    half *= 0.5;
                    s += a[k] * half * zpow[lidx - k] * binom[lidx - 1][k - 1];
                }
                b[lidx] += s;
            }
        }
        multipoles[l as usize] = parents;
    }

    // downward pass over boxes that contain targets
    let mut target_boxes: Vec<Vec<Key>> = vec![Vec::new(); level as usize + 1];
    for l in MIN_LEVEL..=level {
        let mut k: Vec<Key> = zt.iter().map(|&z| key_at(z, l)).collect();
        k.sort_unstable();
        k.dedup();
        target_boxes[l as usize] = k;
    }
    let mut locals: HashMap<Key, Vec<C64>> = HashMap::new();
    for l in MIN_LEVEL..=level {
        let mp = &multipoles[l as usize];
        let parent_locals = &locals;
        let next: Vec<(Key, Vec<C64>)> = target_boxes[l as usize]
            .par_iter()
            .map(|&tk| {
                let mut b = vec![C64::new(0.0, 0.0); p + 1];
                let tc = center(tk, l);
                if l > MIN_LEVEL {
                    let pk = (tk.0 / 2, tk.1 / 2);
                    if let Some(a) = parent_locals.get(&pk) {
                        let side = 1.0 / (1u32 << (l - 1)) as f64;
                        let t = (tc - center(pk, l - 1)) / side;
                        l2l(a, t, &binom, &mut b);
                    }
                }
                let pk = (tk.0 / 2, tk.1 / 2);
                let lo = |v: u32| v.saturating_sub(1);
                let np = 1u32 << (l - 1);
                for px in lo(pk.0)..=(pk.0 + 1).min(np - 1) {
                    for py in lo(pk.1)..=(pk.1 + 1).min(np - 1) {
                        for cx in 0..2 {
                            for cy in 0..2 {
                                let sk = (2 * px + cx, 2 * py + cy);
                                if adjacent(sk, tk) {
                                    continue;
                                }
                                if let Some(a) = mp.get(&sk) {
                                    let side = 1.0 / (1u32 << l) as f64;
                                    let zeta = (center(sk, l) - tc) / side;
                                    m2l(a, zeta, side, &binom, &mut b);
                                }
                            }
                        }
                    }
                }
                (tk, b)
            })
            .collect();
        locals = next.into_iter().collect();
    }

    // evaluation: local expansion plus direct near field
    let side = 1.0 / (1u32 << level) as f64;
    let log_size = frame.size.ln();
    let total_charge: f64 = charges.iter().sum();
    let results: Vec<(f64, [f64; 2])> = (0..nt)
        .into_par_iter()
        .map(|i| {
            let tk = key_at(zt[i], level);
            let b = &locals[&tk];
            let w = (zt[i] - center(tk, level)) / side;
            let mut f = C64::new(0.0, 0.0);
            let mut df = C64::new(0.0, 0.0);
            for l in (0..=p).rev() {
                f = f * w + b[l];
                if l > 0 {
                    df = df * w + b[l] * l as f64;
                }
            }
            df /= side * frame.size;
            let mut near_charge = 0.0;
            let mut pot = 0.0;
            let mut gx = 0.0;
            let mut gy = 0.0;
            let x = targets[i];
            let n = 1u32 << level;
            for ix in tk.0.saturating_sub(1)..=(tk.0 + 1).min(n - 1) {
                for iy in tk.1.saturating_sub(1)..=(tk.1 + 1).min(n - 1) {
                    if let Some(list) = leaf_sources.get(&(ix, iy)) {
                        for &j in list {
                            let q = charges[j];
                            near_charge += q;
                            let dx = x[0] - sources[j][0];
                            let dy = x[1] - sources[j][1];
                            let r2 = dx * dx + dy * dy;
                            if r2 <= floor * floor {
                                continue;
                            }
                            pot += q * 0.5 * r2.ln();
                            gx += q * dx / r2;
                            gy += q * dy / r2;
                        }
                    }
                }
            }
            let far = f.re + log_size * (total_charge - near_charge);
            (pot + far, [gx + df.re, gy - df.im])
        })
        .collect();
    FmmResult {
        potential: results.iter().map(|r| r.0).collect(),
        gradient: results.iter().map(|r| r.1).collect(),
    }
}

/// Multipole (scaled by box side) to local translation; `zeta` is the source
/// center minus the target center in units of the common box `side`.
fn m2l(a: &[C64], zeta: C64, side: f64, binom: &[Vec<f64>], b: &mut [C64]) {
    let p = a.len() - 1;
    let inv = zeta.inv();
    let mut ipow = vec![C64::new(1.0, 0.0); 2 * p + 2];
    for k in 1..ipow.len() {
        ipow[k] = ipow[k - 1] * inv;
    }
    // a_k (-1)^k ζ^{-k}
    let ak: Vec<C64> = (0..=p)
        .map(|k| {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            a[k] * ipow[k] * s
        })
        .collect();
    b[0] += a[0] * ((-zeta).ln() + side.ln()) + ak[1..].iter().sum::<C64>();
    for l in 1..=p {
        let mut s = C64::new(0.0, 0.0);
        for k in 1..=p {
            s += ak[k] * binom[l + k - 1][k - 1];
        }
        b[l] += (s - a[0] / l as f64) * ipow[l];
    }
}

/// Local translation from a parent to a child box; `t` is the child center
/// minus the parent center in units of the parent side.
fn l2l(a: &[C64], t: C64, binom: &[Vec<f64>], b: &mut [C64]) {
    let p = a.len() - 1;
    let mut tpow = vec![C64::new(1.0, 0.0); p + 1];
    for k in 1..=p {
        tpow[k] = tpow[k - 1] * t;
    }
    let mut half = 1.0;
    for l in 0..=p {
        let mut s = C64::new(0.0, 0.0);
        for k in l..=p {
            s += a[k] * tpow[k - l] * binom[k][l];
        }
        b[l] += s * half;
        half *= 0.5;
    }
}
