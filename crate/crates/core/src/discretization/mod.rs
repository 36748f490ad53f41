//! Grids, quadrature rules, interpolation and spectral-tail diagnostics for
//! densities on interfaces.

pub mod grid;
pub mod interp;
pub mod quadrature;
pub mod spectral;

pub use grid::{GridScheme, InterfaceGrid, Panel, PanelSpec};
pub use interp::{lagrange_interpolate, trig_interpolate, BarycentricLagrange};
pub use quadrature::{gauss_legendre, gauss_legendre_on, legendre_values, uniform_nodes};
pub use spectral::{
    fourier_coefficient, fourier_coefficients, fourier_tail, legendre_coefficients,
    legendre_tail, SpectralTail,
};
