//! Boundary integral solver for the 2D conductivity equation with piecewise
//! constant conductivity.

// `!(a > b)` checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discretization;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod operator;
pub mod reference;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::{Real, Vec2};

pub type Curve64 = geometry::Curve<f64>;
pub type Curve32 = geometry::Curve<f32>;
pub type RegionTree64 = geometry::RegionTree<f64>;
pub type RegionTree32 = geometry::RegionTree<f32>;
pub type InterfaceGrid64 = discretization::InterfaceGrid<f64>;
pub type InterfaceGrid32 = discretization::InterfaceGrid<f32>;
pub type SolveSettings64 = solver::SolveSettings<f64>;
pub type SolveSettings32 = solver::SolveSettings<f32>;
pub type DensitySolution64 = solver::DensitySolution<f64>;
pub type DensitySolution32 = solver::DensitySolution<f32>;
pub type FieldSample64 = evaluation::FieldSample<f64>;
pub type FieldSample32 = evaluation::FieldSample<f32>;
