//! GMRES and the adaptive solve-refine loop.

pub mod adaptive;
pub mod gmres;

pub use adaptive::{
    density_tails, initial_grids, solve_adaptive, solve_on_grids, warm_start_interpolate,
    DensitySolution, InterfaceTail, RoundRecord, SchemeChoice, SolveSettings,
};
pub use gmres::{gmres, GmresOutcome, GmresSettings, LinearMap};
