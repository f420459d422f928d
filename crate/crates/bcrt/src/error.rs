use thiserror::Error;

/// Errors surfaced by excursion construction, tree queries, transport and
/// the Monte Carlo drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("excursion must have at least two grid cells, got n = {0}")]
    GridTooSmall(usize),
    #[error("excursion endpoints must be exactly zero")]
    NonzeroEndpoint,
    #[error("excursion values must be non-negative")]
    NegativeValue,
    #[error("cell minimum exceeds an adjacent vertex value at cell {0}")]
    CellMinAboveVertex(usize),
    #[error("lifetime must be positive, got {0}")]
    NonpositiveLifetime(f64),
    #[error("operation requires a lifetime-1 excursion, got lifetime {0}")]
    NotNormalized(f64),
    #[error("grid mismatch: left has n = {left}, right has n = {right}")]
    GridMismatch { left: usize, right: usize },
    #[error("reroot point must be strictly interior")]
    RerootAtEndpoint,
    #[error("scale factor must be positive, got {0}")]
    NonpositiveScale(f64),
    #[error("grid index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("geodesic offset {offset} outside [0, {length}]")]
    OffsetOutOfRange { offset: f64, length: f64 },
    #[error("operation requires distinct centers")]
    CoincidentCenters,
    #[error("ball of radius {radius} at the given center is empty")]
    EmptyBall { radius: f64 },
    #[error("ball radius must be positive, got {0}")]
    NonpositiveRadius(f64),
    #[error("balls do not overlap: delta + eps = {sum} <= separation {ell}")]
    EmptyOverlap { sum: f64, ell: f64 },
    #[error("degenerate overlap: radii must not exceed the separation {ell}")]
    DegenerateOverlap { ell: f64 },
    #[error("measure atom at index {index} is off the tree grid (max {max})")]
    AtomOffGrid { index: usize, max: usize },
    #[error("measure masses sum to {0}, expected 1 within 1e-12")]
    MassNotNormalized(f64),
    #[error("measure mass must be positive, got {0}")]
    NonpositiveMass(f64),
    #[error("measure must have at least one atom")]
    EmptyMeasure,
    #[error("oracle instance too large: {size} atom pairs exceeds cap {cap}")]
    OracleTooLarge { size: usize, cap: usize },
    #[error("radius delta = {delta} must be smaller than the center separation {ell}")]
    RadiusNotBelowSeparation { delta: f64, ell: f64 },
    #[error("scale pair requires 0 < delta < ell, got delta = {delta}, ell = {ell}")]
    InvalidScalePair { delta: f64, ell: f64 },
    #[error("no sampled pair landed in the separation bin [{lo}, {hi}] after {trials} trials")]
    ZeroAcceptedPairs { lo: f64, hi: f64, trials: u64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
