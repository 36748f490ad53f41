use thiserror::Error;

/// Errors raised across geometry, discretization, operator assembly and solves.
///
/// Values are carried as `f64` so the enum stays independent of the scalar type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("curve parameters are invalid: {0}")]
    InvalidCurve(String),
    #[error("curve speed {speed:e} at q={q} is below tolerance")]
    DegenerateSpeed { q: f64, speed: f64 },
    #[error("curve {curve} intersects itself")]
    SelfIntersecting { curve: usize },
    #[error("curves {a} and {b} intersect or come closer than {clearance:e}")]
    IntersectingCurves { a: usize, b: usize, clearance: f64 },
    #[error("curves are not nested under a single outer boundary")]
    NotNested,
    #[error("conductivity of region {region} must be positive, got {sigma}")]
    BadSigma { region: usize, sigma: f64 },
    #[error("conductivity count {got} does not match curve count {expected}")]
    SigmaCount { expected: usize, got: usize },
    #[error("interface {region} has the same conductivity as its parent ({sigma}); remove the curve")]
    EqualConductivity { region: usize, sigma: f64 },
    #[error("grid needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("panel [{a}, {b}) has zero parameter length")]
    EmptyPanel { a: f64, b: f64 },
    #[error("panel breakpoints must be sorted and lie in [0, 1)")]
    BadBreakpoints,
    #[error("points coincide (|x - y| = {dist:e}); use the diagonal rule")]
    CoincidentPoints { dist: f64 },
    #[error("density vector has length {got}, expected {expected}")]
    IndexMismatch { expected: usize, got: usize },
    #[error("boundary data on interface {interface} violates compatibility: integral {integral:e}, norm {norm:e}")]
    CompatibilityViolation { interface: usize, integral: f64, norm: f64 },
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("endpoint density system is inconsistent (relative residual {residual:e})")]
    RankFailure { residual: f64 },
    #[error("radius {r} lies outside the unit disk")]
    OutOfDomain { r: f64 },
    #[error("parameter {value} out of range: {what}")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("GMRES reached {iterations} iterations with relative residual {residual:e}")]
    MaxIters { iterations: usize, residual: f64 },
    #[error("adaptive refinement did not resolve all interfaces after {rounds} rounds")]
    MaxRounds { rounds: usize },
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
}

impl Error {
    /// Variant name, for messages and exit reporting.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidCurve(..) => "InvalidCurve",
            Error::DegenerateSpeed { .. } => "DegenerateSpeed",
            Error::SelfIntersecting { .. } => "SelfIntersecting",
            Error::IntersectingCurves { .. } => "IntersectingCurves",
            Error::NotNested => "NotNested",
            Error::BadSigma { .. } => "BadSigma",
            Error::SigmaCount { .. } => "SigmaCount",
            Error::EqualConductivity { .. } => "EqualConductivity",
            Error::TooFewNodes { .. } => "TooFewNodes",
            Error::EmptyPanel { .. } => "EmptyPanel",
            Error::BadBreakpoints => "BadBreakpoints",
            Error::CoincidentPoints { .. } => "CoincidentPoints",
            Error::IndexMismatch { .. } => "IndexMismatch",
            Error::CompatibilityViolation { .. } => "CompatibilityViolation",
            Error::DegenerateSegment => "DegenerateSegment",
            Error::RankFailure { .. } => "RankFailure",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::MaxIters { .. } => "MaxIters",
            Error::MaxRounds { .. } => "MaxRounds",
            Error::InvalidSettings(..) => "InvalidSettings",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
