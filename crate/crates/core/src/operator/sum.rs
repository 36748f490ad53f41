use rayon::prelude::*;

use super::fmm::{fmm_sum, FmmOptions};
use super::kernel::coincidence_floor;
use crate::scalar::{Real, Vec2};

/// Summation backend for N-body log-kernel interactions.
#[derive(Clone, Copy, Debug, PartialEq)]
#[derive(Default)]
pub enum Backend {
    #[default]
    Direct,
    /// Fast multipole method with requested absolute accuracy.
    Fmm { eps: f64 },
}


/// Kernel applied by [`layer_potential_sum`].
#[derive(Clone, Copy, Debug)]
pub enum SumKernel<'a, T> {
    /// `G(x, y) = (1/2π) log|x - y|`.
    Potential,
    /// `K(x, y)` with the given unit normals at the targets.
    NormalDerivative(&'a [Vec2<T>]),
}

/// `Σ_j c_j 𝒦(x_i, y_j)` for every target `x_i`. Source-target pairs that
/// coincide are skipped; their contribution is the caller's business.
pub fn layer_potential_sum<T: Real>(
    sources: &[Vec2<T>],
    charges: &[T],
    targets: &[Vec2<T>],
    kernel: SumKernel<'_, T>,
    backend: Backend,
) -> Vec<T> {
    assert_eq!(sources.len(), charges.len());
    if let SumKernel::NormalDerivative(n) = kernel {
        assert_eq!(n.len(), targets.len());
    }
    match backend {
        Backend::Direct => direct_sum(sources, charges, targets, kernel),
        Backend::Fmm { eps } => {
            let src: Vec<[f64; 2]> = sources.iter().map(|p| to_arr(*p)).collect();
            let tgt: Vec<[f64; 2]> = targets.iter().map(|p| to_arr(*p)).collect();
            let q: Vec<f64> = charges.iter().map(|c| c.to_f64_lossy()).collect();
            // the sums are for log|·|; the kernels carry an extra 1/2π
            let opts = FmmOptions {
                eps: eps * std::f64::consts::TAU,
                ..FmmOptions::default()
            };
            let r = fmm_sum(&src, &q, &tgt, coincidence_floor::<T>().to_f64_lossy(), &opts);
            let s = T::two_pi().recip();
            match kernel {
                SumKernel::Potential => r.potential.iter().map(|&u| T::lit(u) * s).collect(),
                SumKernel::NormalDerivative(n) => r
                    .gradient
                    .iter()
                    .zip(n)
                    .map(|(g, n)| (T::lit(g[0]) * n.x + T::lit(g[1]) * n.y) * s)
                    .collect(),
            }
        }
    }
}

fn to_arr<T: Real>(p: Vec2<T>) -> [f64; 2] {
    [p.x.to_f64_lossy(), p.y.to_f64_lossy()]
}

fn direct_sum<T: Real>(
    sources: &[Vec2<T>],
    charges: &[T],
    targets: &[Vec2<T>],
    kernel: SumKernel<'_, T>,
) -> Vec<T> {
    let floor2 = coincidence_floor::<T>() * coincidence_floor::<T>();
    let inv = T::two_pi().recip();
    (0..targets.len())
        .into_par_iter()
        .map(|i| {
            let x = targets[i];
            let mut acc = T::zero();
            match kernel {
                SumKernel::Potential => {
                    for (y, &c) in sources.iter().zip(charges) {
                        let r2 = (x - *y).norm_sq();
                        if r2 >= floor2 {
                            acc += c * r2.ln();
                        }
                    }
                    acc * T::half() * inv
                }
                SumKernel::NormalDerivative(normals) => {
                    let n = normals[i];
                    for (y, &c) in sources.iter().zip(charges) {
                        let d = x - *y;
                        let r2 = d.norm_sq();
                        if r2 >= floor2 {
                            acc += c * d.dot(n) / r2;
                        }
                    }
                    acc * inv
                }
            }
        })
        .collect()
}
