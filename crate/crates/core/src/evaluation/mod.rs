//! Potential evaluation anywhere in the domain: plain quadrature away from
//! the interfaces and piecewise linear line-segment charges close to them.

pub mod chain;
mod field;
mod index;
pub mod segment;

pub use chain::{build_segment_chains, panel_chain, uniform_chain, SegmentChain};
pub use field::{eval_close, eval_naive, EvalMethod, EvalOptions, Evaluator, FieldSample};
pub use segment::segment_potential;
