use bie_core::discretization::{lagrange_interpolate, trig_interpolate, InterfaceGrid};
use bie_core::evaluation::segment_potential;
use bie_core::geometry::{Curve, RegionTree};
use bie_core::operator::{Backend, Formulation, SystemContext};
use bie_core::Vec2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn six_regions() -> RegionTree<f64> {
    let c = |x, y, r| Curve::circle(Vec2::new(x, y), r).unwrap();
    let e = |x, y, a, b, t| Curve::ellipse(Vec2::new(x, y), (a, b), t).unwrap();
    RegionTree::build(
        vec![
            c(0.0, 0.0, 1.0),
            e(-0.55, -0.45, 0.25, 0.15, 0.5),
            e(0.2, 0.15, 0.6, 0.5, 0.3),
            e(0.25, 0.35, 0.3, 0.18, 0.0),
            c(0.25, -0.1, 0.1),
            c(0.3, 0.35, 0.08),
        ],
        vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
    )
    .unwrap()
}

fn grids(tree: &RegionTree<f64>, m: usize) -> Vec<InterfaceGrid<f64>> {
    tree.curves.iter().map(|c| InterfaceGrid::uniform(c, m, 0.5).unwrap()).collect()
}

/// Nyström matrix written out from the integral equations, one entry at a time.
fn assemble(tree: &RegionTree<f64>, grids: &[InterfaceGrid<f64>], f: Formulation) -> Vec<Vec<f64>> {
    let nodes: Vec<(usize, usize)> = grids
        .iter()
        .enumerate()
        .flat_map(|(i, g)| (0..g.len()).map(move |k| (i, k)))
        .collect();
    let parent_sigma = |i: usize| tree.parent[i].map(|p| tree.sigma[p]);
    let alpha = |i: usize| parent_sigma(i).map_or(1.0, |sp| 1.0 - sp / tree.sigma[i]);
    let n = nodes.len();
    let mut a = vec![vec![0.0; n]; n];
    for (r, &(i, k)) in nodes.iter().enumerate() {
        let x = grids[i].points[k];
        let nx = grids[i].normals[k];
        let (diag, scale) = match (parent_sigma(i), f) {
            (None, Formulation::Rescaled) => (-0.5, 1.0),
            (None, Formulation::Physical) => (-0.5 * tree.sigma[i], tree.sigma[i]),
            (Some(sp), Formulation::Rescaled) => {
                let si = tree.sigma[i];
                (0.5 * alpha(i) * (sp + si) / (sp - si), 1.0)
            }
            (Some(sp), Formulation::Physical) => (0.5 * (sp + tree.sigma[i]), sp - tree.sigma[i]),
        };
        for (c, &(j, l)) in nodes.iter().enumerate() {
            let y = grids[j].points[l];
            let kxy = if r == c {
                grids[i].curvatures[k] / (2.0 * TAU)
            } else {
                let d = x - y;
                d.dot(nx) / (TAU * d.dot(d))
            };
            let modified = if j == tree.root && i == tree.root { kxy - 1.0 } else { kxy };
            let col = if f == Formulation::Rescaled { alpha(j) } else { 1.0 };
            a[r][c] = scale * col * modified * grids[j].weights[l];
            if r == c {
                a[r][c] += diag;
            }
        }
    }
    a
}

#[test]
fn matrix_free_apply_matches_dense_assembly() {
    let tree = six_regions();
    let g = grids(&tree, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for f in [Formulation::Rescaled, Formulation::Physical] {
        let a = assemble(&tree, &g, f);
        let ctx = SystemContext::new(tree.clone(), g.clone(), f, Backend::Direct).unwrap();
        let phi: Vec<f64> = (0..ctx.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = ctx.apply(&phi).unwrap();
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (row, yr) in a.iter().zip(&y) {
            let dense: f64 = row.iter().zip(&phi).map(|(a, p)| a * p).sum();
            err = err.max((dense - yr).abs());
            scale = scale.max(dense.abs());
        }
        assert!(err <= 1e-12 * scale, "{f:?}: {err:e} vs {scale:e}");
    }
}

fn concentric() -> RegionTree<f64> {
    RegionTree::build(
        vec![
            Curve::circle(Vec2::new(0.0, 0.0), 1.0).unwrap(),
            Curve::circle(Vec2::new(0.1, 0.0), 0.4).unwrap(),
        ],
        vec![1.0, 3.0],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn apply_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let tree = concentric();
        let ctx = SystemContext::new(tree.clone(), grids(&tree, 24), Formulation::Rescaled, Backend::Direct).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..ctx.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..ctx.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let (au, av, aw) = (ctx.apply(&u).unwrap(), ctx.apply(&v).unwrap(), ctx.apply(&w).unwrap());
        for k in 0..ctx.dim() {
            prop_assert!((aw[k] - a * au[k] - b * av[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn segment_potential_is_rigid_motion_invariant(
        x1 in (-1.0f64..1.0, -1.0f64..1.0),
        len in 0.05f64..1.0,
        dir in 0.0f64..TAU,
        g in (-1.0f64..1.0, -1.0f64..1.0),
        x in (-1.5f64..1.5, -1.5f64..1.5),
        rot in 0.0f64..TAU,
        shift in (-2.0f64..2.0, -2.0f64..2.0),
    ) {
        let p1 = Vec2::new(x1.0, x1.1);
        let p2 = p1 + Vec2::new(len * dir.cos(), len * dir.sin());
        let t = Vec2::new(x.0, x.1);
        let (s, c) = rot.sin_cos();
        let m = |p: Vec2<f64>| Vec2::new(c * p.x - s * p.y + shift.0, s * p.x + c * p.y + shift.1);
        let a = segment_potential(p1, p2, g.0, g.1, t).unwrap();
        let b = segment_potential(m(p1), m(p2), g.0, g.1, m(t)).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
        // reversing the segment with its densities changes nothing
        let r = segment_potential(p2, p1, g.1, g.0, t).unwrap();
        prop_assert!((a - r).abs() < 1e-13);
    }

    #[test]
    fn trig_interpolant_reproduces_samples(vals in prop::collection::vec(-1.0f64..1.0, 3..40), shift in 0.0f64..1.0) {
        let m = vals.len();
        for (k, v) in vals.iter().enumerate() {
            let q = (k as f64 + shift) / m as f64;
            prop_assert!((trig_interpolate(&vals, shift, q) - v).abs() < 1e-13);
        }
    }

    #[test]
    fn lagrange_reproduces_samples(vals in prop::collection::vec(-1.0f64..1.0, 2..24)) {
        let m = vals.len();
        let nodes: Vec<f64> = (0..m).map(|j| -(std::f64::consts::PI * (j as f64 + 0.5) / m as f64).cos()).collect();
        for (x, v) in nodes.iter().zip(&vals) {
            prop_assert!((lagrange_interpolate(&nodes, &vals, *x) - v).abs() < 1e-13);
        }
    }

    #[test]
    fn region_tree_ignores_input_order(perm_seed in any::<u64>()) {
        let base = six_regions();
        let mut order: Vec<usize> = (0..base.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let tree = RegionTree::build(
            order.iter().map(|&i| base.curves[i].clone()).collect(),
            order.iter().map(|&i| base.sigma[i]).collect(),
        ).unwrap();
        prop_assert_eq!(order[tree.root], base.root);
        for (new_i, &old_i) in order.iter().enumerate() {
            prop_assert_eq!(tree.depth[new_i], base.depth[old_i]);
            prop_assert_eq!(tree.parent[new_i].map(|p| order[p]), base.parent[old_i]);
        }
    }
}
