//! Quick numerical checks that need no configuration.

use bie_core::discretization::InterfaceGrid;
use bie_core::evaluation::segment_potential;
use bie_core::geometry::Curve;
use bie_core::operator::{kernel_k, kernel_k_diag, layer_potential_sum, Backend, SumKernel};
use bie_core::reference::{exact_inner_density, ConcentricSolution};
use bie_core::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tol: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tol
    }
}

/// `Σ_x K(x, y) w_x` over an ellipse for a target inside, on and outside.
fn kernel_identity() -> anyhow::Result<f64> {
    let curve = Curve::ellipse(Vec2::new(0.1, -0.2), (1.0, 0.6), 0.4)?;
    let g = InterfaceGrid::uniform(&curve, 256, 0.5)?;
    let sum = |y: Vec2<f64>, skip: Option<usize>| -> anyhow::Result<f64> {
        let mut s = 0.0;
        for k in 0..g.len() {
            s += g.weights[k]
                * if Some(k) == skip {
                    kernel_k_diag(g.curvatures[k])
                } else {
                    kernel_k(g.points[k], g.normals[k], y)?
                };
        }
        Ok(s)
    };
    let inside = sum(Vec2::new(0.2, 0.0), None)?;
    let on = sum(g.points[17], Some(17))?;
    let outside = sum(Vec2::new(2.0, 1.0), None)?;
    Ok((inside - 1.0).abs().max((on - 0.5).abs()).max(outside.abs()))
}

/// Inner density of the concentric problem from a plain dense solve.
fn concentric_density() -> anyhow::Result<f64> {
    use bie_core::geometry::RegionTree;
    use bie_core::operator::BoundaryData;
    use bie_core::solver::{solve_on_grids, SolveSettings};
    let tree = RegionTree::build(
        vec![
            Curve::circle(Vec2::new(0.0f64, 0.0), 1.0)?,
            Curve::circle(Vec2::new(0.0, 0.0), 0.4)?,
        ],
        vec![1.0, 2.0],
    )?;
    let grids = tree
        .curves
        .iter()
        .map(|c| InterfaceGrid::uniform(c, 64, 0.5))
        .collect::<bie_core::Result<Vec<_>>>()?;
    let mut s = SolveSettings::default();
    s.gmres.tol = 1e-12;
    let sol = solve_on_grids(&tree, grids, &[BoundaryData::SineMode { m: 3 }, BoundaryData::Zero], &s, None)?;
    let c = ConcentricSolution::new(3, 2.0, 0.4)?;
    let mut worst: f64 = 0.0;
    for (p, g) in sol.grids[1].points.iter().zip(&sol.gamma[1]) {
        worst = worst.max((g - exact_inner_density(c.m, c.sigma, c.alpha, p.y.atan2(p.x))).abs());
    }
    Ok(worst)
}

fn segment_example() -> anyhow::Result<f64> {
    let v = segment_potential(Vec2::new(-0.5f64, 0.0), Vec2::new(0.5, 0.0), 1.0, 1.0, Vec2::new(0.0, 1.0))?;
    Ok((v - 6.186e-3).abs())
}

/// Relative difference between FMM and direct sums on random charges.
fn fmm_vs_direct(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2000;
    let src: Vec<Vec2<f64>> = (0..n)
        .map(|_| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let direct = layer_potential_sum(&src, &q, &src, SumKernel::Potential, Backend::Direct);
    let fmm = layer_potential_sum(&src, &q, &src, SumKernel::Potential, Backend::Fmm { eps: 1e-9 });
    let scale = direct.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = direct.iter().zip(&fmm).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    diff / scale
}

pub fn run(seed: u64) -> anyhow::Result<Vec<Check>> {
    Ok(vec![
        Check {
            name: "kernel identity",
            value: kernel_identity()?,
            tol: 1e-10,
        },
        Check {
            name: "concentric density",
            value: concentric_density()?,
            tol: 1e-8,
        },
        Check {
            name: "segment example",
            value: segment_example()?,
            tol: 1e-6,
        },
        Check {
            name: "fmm vs direct",
            value: fmm_vs_direct(seed),
            tol: 1e-8,
        },
    ])
}
