//! The discretized boundary integral operator as a matrix-free linear map,
//! with direct and fast multipole summation backends.

pub mod fmm;
pub mod kernel;
pub mod rhs;
pub mod sum;
pub mod system;

pub use kernel::{kernel_g, kernel_k, kernel_k_diag};
pub use rhs::{check_compatibility, BoundaryData};
pub use sum::{layer_potential_sum, Backend, SumKernel};
pub use system::{DensityLayout, Formulation, SystemContext};
