use rayon::prelude::*;

use super::kernel::{kernel_k, kernel_k_diag};
use super::rhs::{check_compatibility, BoundaryData};
use super::sum::{layer_potential_sum, Backend, SumKernel};
use crate::discretization::InterfaceGrid;
use crate::error::{Error, Result};
use crate::geometry::RegionTree;
use crate::scalar::{Real, Vec2};
use crate::solver::LinearMap;

/// Unknown used in the discrete system.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Formulation {
    /// `φ_i = γ_i / α_i`, which keeps the system well conditioned when
    /// neighboring conductivities are close.
    #[default]
    Rescaled,
    /// The physical jump `γ_i` directly.
    Physical,
}

/// Map between (interface, node) pairs and flat indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityLayout {
    offsets: Vec<usize>,
}

impl DensityLayout {
    pub fn new(sizes: impl IntoIterator<Item = usize>) -> Self {
        let mut offsets = vec![0];
        for s in sizes {
            offsets.push(offsets.last().copied().unwrap_or(0) + s);
        }
        Self { offsets }
    }

    pub fn from_grids<T: Real>(grids: &[InterfaceGrid<T>]) -> Self {
        Self::new(grids.iter().map(|g| g.len()))
    }

    pub fn len(&self) -> usize {
        self.offsets.last().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn interfaces(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn flat(&self, i: usize, m: usize) -> usize {
        self.offsets[i] + m
    }

    pub fn locate(&self, k: usize) -> (usize, usize) {
        let i = self.offsets.partition_point(|&o| o <= k) - 1;
        (i, k - self.offsets[i])
    }

    pub fn split<'a, T>(&self, v: &'a [T]) -> Vec<&'a [T]> {
        (0..self.interfaces()).map(|i| &v[self.range(i)]).collect()
    }

    pub fn join<T: Clone>(&self, parts: &[Vec<T>]) -> Vec<T> {
        parts.iter().flat_map(|p| p.iter().cloned()).collect()
    }
}

/// The discretized integral operator over all interface nodes.
///
/// Every row is `diag_i u_i + row_i (Σ_j col_j ∫K u_j)` with the root rows
/// additionally reduced by `row_root · col_root ∫u_root`, the rank-one
/// correction that pins the total charge on the outer boundary to zero.
#[derive(Clone, Debug)]
pub struct SystemContext<T> {
    tree: RegionTree<T>,
    grids: Vec<InterfaceGrid<T>>,
    layout: DensityLayout,
    formulation: Formulation,
    backend: Backend,
    alpha: Vec<T>,
    beta: Vec<T>,
    col: Vec<T>,
    row: Vec<T>,
    diag: Vec<T>,
    rhs_scale: Vec<T>,
    owner: Vec<usize>,
    points: Vec<Vec2<T>>,
    normals: Vec<Vec2<T>>,
    weights: Vec<T>,
    self_k: Vec<T>,
}

impl<T: Real> SystemContext<T> {
    pub fn new(
        tree: RegionTree<T>,
        grids: Vec<InterfaceGrid<T>>,
        formulation: Formulation,
        backend: Backend,
    ) -> Result<Self> {
        let n = tree.len();
        if grids.len() != n {
            return Err(Error::IndexMismatch {
                expected: n,
                got: grids.len(),
            });
        }
        let half = T::half();
        let mut alpha = vec![T::one(); n];
        let mut beta = vec![-half; n];
        let mut col = vec![T::one(); n];
        let mut row = vec![T::one(); n];
        let mut diag = vec![-half; n];
        let mut rhs_scale = vec![T::one(); n];
        for i in 0..n {
            let si = tree.sigma[i];
            match tree.outer_sigma(i) {
                None => {
                    rhs_scale[i] = si.recip();
                    if formulation == Formulation::Physical {
                        row[i] = si;
                        diag[i] = -half * si;
                        rhs_scale[i] = T::one();
                    }
                }
                Some(sp) => {
                    if sp == si {
                        return Err(Error::EqualConductivity {
                            region: i,
                            sigma: si.to_f64_lossy(),
                        });
                    }
                    alpha[i] = T::one() - sp / si;
                    beta[i] = half * alpha[i] * (sp + si) / (sp - si);
                    match formulation {
                        Formulation::Rescaled => {
                            col[i] = alpha[i];
                            diag[i] = beta[i];
                            rhs_scale[i] = (sp - si).recip();
                        }
                        Formulation::Physical => {
                            row[i] = sp - si;
                            diag[i] = half * (sp + si);
                        }
                    }
                }
            }
        }
        let layout = DensityLayout::from_grids(&grids);
        let mut owner = Vec::with_capacity(layout.len());
        let mut points = Vec::with_capacity(layout.len());
        let mut normals = Vec::with_capacity(layout.len());
        let mut weights = Vec::with_capacity(layout.len());
        let mut self_k = Vec::with_capacity(layout.len());
        for (i, g) in grids.iter().enumerate() {
            owner.extend(std::iter::repeat_n(i, g.len()));
            points.extend_from_slice(&g.points);
            normals.extend_from_slice(&g.normals);
            weights.extend_from_slice(&g.weights);
            self_k.extend(g.curvatures.iter().map(|&k| kernel_k_diag(k)));
        }
        Ok(Self {
            tree,
            grids,
            layout,
            formulation,
            backend,
            alpha,
            beta,
            col,
            row,
            diag,
            rhs_scale,
            owner,
            points,
            normals,
            weights,
            self_k,
        })
    }

    pub fn tree(&self) -> &RegionTree<T> {
        &self.tree
    }

    pub fn grids(&self) -> &[InterfaceGrid<T>] {
        &self.grids
    }

    pub fn into_parts(self) -> (RegionTree<T>, Vec<InterfaceGrid<T>>) {
        (self.tree, self.grids)
    }

    pub fn layout(&self) -> &DensityLayout {
        &self.layout
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// `α_i = 1 - σ_{p_i}/σ_i`, and 1 on the root.
    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    /// Diagonal factor of the rescaled system, `-½` on the root.
    pub fn beta(&self) -> &[T] {
        &self.beta
    }

    /// Largest relative gap between the two algebraic forms of `β_i`.
    pub fn beta_consistency(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.tree.len() {
            if let Some(sp) = self.tree.outer_sigma(i) {
                let si = self.tree.sigma[i];
                let alt = -T::half() * (sp + si) / si;
                worst = worst.max((alt - self.beta[i]).abs() / alt.abs());
            }
        }
        worst
    }

    pub fn dim(&self) -> usize {
        self.layout.len()
    }

    /// Physical densities `γ` from the unknown vector.
    pub fn gamma(&self, u: &[T]) -> Vec<T> {
        u.iter()
            .zip(&self.owner)
            .map(|(&u, &i)| self.col[i] * u)
            .collect()
    }

    /// Rescaled densities `φ = γ / α` from the unknown vector.
    pub fn phi(&self, u: &[T]) -> Vec<T> {
        match self.formulation {
            Formulation::Rescaled => u.to_vec(),
            Formulation::Physical => u
                .iter()
                .zip(&self.owner)
                .map(|(&u, &i)| u / self.alpha[i])
                .collect(),
        }
    }

    /// Unknown vector holding the given rescaled densities.
    pub fn unknown_from_phi(&self, phi: &[T]) -> Vec<T> {
        match self.formulation {
            Formulation::Rescaled => phi.to_vec(),
            Formulation::Physical => phi
                .iter()
                .zip(&self.owner)
                .map(|(&p, &i)| p * self.alpha[i])
                .collect(),
        }
    }

    /// Total charge `C_i = ∫ γ_i dl` on every interface.
    pub fn interface_charges(&self, u: &[T]) -> Vec<T> {
        let gamma = self.gamma(u);
        (0..self.tree.len())
            .map(|i| self.grids[i].integrate(&gamma[self.layout.range(i)]))
            .collect()
    }

    /// Node-sampled right-hand side, after checking `∫ b_i dl = 0` to
    /// `compat_tol` relative to `∫|b_i| dl`.
    pub fn assemble_rhs(&self, data: &[BoundaryData<T>], compat_tol: T) -> Result<Vec<T>> {
        if data.len() != self.tree.len() {
            return Err(Error::IndexMismatch {
                expected: self.tree.len(),
                got: data.len(),
            });
        }
        let mut out = Vec::with_capacity(self.dim());
        for (i, b) in data.iter().enumerate() {
            let v = b.sample(&self.tree.curves[i], &self.grids[i]);
            check_compatibility(i, &self.grids[i], &v, compat_tol)?;
            out.extend(v.into_iter().map(|b| b * self.rhs_scale[i]));
        }
        Ok(out)
    }

    pub fn apply(&self, u: &[T]) -> Result<Vec<T>> {
        if u.len() != self.dim() {
            return Err(Error::IndexMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        Ok(self.apply_unchecked(u))
    }

    fn apply_unchecked(&self, u: &[T]) -> Vec<T> {
        let charges: Vec<T> = (0..u.len())
            .map(|k| self.col[self.owner[k]] * self.weights[k] * u[k])
            .collect();
        let field = layer_potential_sum(
            &self.points,
            &charges,
            &self.points,
            SumKernel::NormalDerivative(&self.normals),
            self.backend,
        );
        let root = self.tree.root;
        let root_charge: T = charges[self.layout.range(root)].iter().copied().sum();
        (0..u.len())
            .into_par_iter()
            .map(|k| {
                let i = self.owner[k];
                let mut v = field[k] + self.self_k[k] * charges[k];
                if i == root {
                    v -= root_charge;
                }
                self.diag[i] * u[k] + self.row[i] * v
            })
            .collect()
    }

    /// Dense matrix of the same operator, entry by entry. Quadratic memory;
    /// meant for verification only.
    pub fn dense_matrix(&self) -> Result<Vec<Vec<T>>> {
        let n = self.dim();
        let root = self.tree.root;
        let mut a = vec![vec![T::zero(); n]; n];
        for (t, row) in a.iter_mut().enumerate() {
            let i = self.owner[t];
            for (s, entry) in row.iter_mut().enumerate() {
                let j = self.owner[s];
                let k = if s == t {
                    self.self_k[t]
                } else {
                    kernel_k(self.points[t], self.normals[t], self.points[s])?
                };
                let delta = if i == root && j == root { T::one() } else { T::zero() };
                *entry = self.row[i] * (k - delta) * self.col[j] * self.weights[s];
            }
            row[t] += self.diag[i];
        }
        Ok(a)
    }
}

impl<T: Real> LinearMap<T> for SystemContext<T> {
    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn apply(&self, x: &[T]) -> Vec<T> {
        self.apply_unchecked(x)
    }
}
