use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("permeabilities must be positive (kappa1={kappa1}, kappa2={kappa2})")]
    NonPositivePermeability { kappa1: f64, kappa2: f64 },
    #[error("strip geometry needs 0 < h2 < pi/2, got h2={0}")]
    StripDepthOutOfRange(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid needs at least 8 nodes, got {0}")]
    GridTooSmall(usize),
    #[error("preset {0} is a flat-at-infinity datum; the torus needs the periodization flag")]
    PresetDomainMismatch(String),
    #[error("value table nodes are not strictly increasing")]
    TableNotMonotone,
    #[error("value table nodes are not uniformly spaced")]
    TableNotUniform,
    #[error("datum does not decay at the grid ends (|f|={0:e})")]
    DecayViolated(f64),
    #[error("strip datum must satisfy |f| < pi/2 (sup |f| = {0})")]
    StripAmplitude(f64),
    #[error("interface touched the permeability jump (min gap {0:e})")]
    GapCollapse(f64),
    #[error("kernel evaluated on its singular set")]
    SingularArgument,
    #[error("point outside the strip |y| < pi/2")]
    OutOfStrip,
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("adaptive quadrature did not reach tolerance on [{a}, {b}]")]
    ToleranceNotMet { a: f64, b: f64 },
    #[error("decay order must exceed 1, got {0}")]
    InvalidDecay(f64),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("h2={0} outside (0, pi/2)")]
    DepthOutOfRange(f64),
    #[error("|K|={k} violates the solvability threshold delta={delta}")]
    SolvabilityViolated { k: f64, delta: f64 },
    #[error("stage {stage} left the admissible set: {reason}")]
    StageConstraintViolated { stage: usize, reason: String },
    #[error("curve constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("i1 must be negative, got {0}")]
    NonNegativeI1(f64),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {value}")]
    TypeMismatch { key: String, value: String },
    #[error("missing required key `{0}`")]
    MissingRequired(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
