use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("detuning {detuning} lies inside an energy band of the bath")]
    DetuningInBand { detuning: f64 },
    #[error("the middle bandgap requires a dimerized bath (delta != 0)")]
    DegenerateBath,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("chain size {0} must be even")]
    OddSize(usize),
    #[error("cutoff n_max = {n_max} leaves tail e^(-n_max/xi) = {tail:.3e} above 1e-6")]
    CutoffTooSmall { n_max: usize, tail: f64 },
    #[error("sector dimension {dim} exceeds the cap {cap}")]
    DimensionOverflow { dim: u64, cap: u64 },
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("operator is complex (twisted) but a real solve was requested")]
    ComplexHamiltonian,
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("state does not belong to the sector ({0})")]
    SectorMismatch(String),
    #[error("operator window out of range: {0}")]
    WindowOutOfRange(String),
    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumbers(String),
    #[error("quadrature did not reach tolerance {tol:.1e} (estimate {estimate:.3e})")]
    QuadratureFailure { tol: f64, estimate: f64 },
    #[error("boundary condition not supported here: {0}")]
    BoundaryUnsupported(String),
    #[error("gap between multiplet and the rest collapsed to {gap:.3e} at phi = {phi:.6}")]
    GapCollapse { gap: f64, phi: f64 },
    #[error("lowest {d} levels do not form a separated cluster at phi = {phi:.6} (splitting/gap = {ratio:.3e})")]
    DegeneracyMismatch { d: usize, phi: f64, ratio: f64 },
    #[error("overlap between consecutive nodes vanished ({0:.3e}); refine the phi grid")]
    ZeroOverlap(f64),
    #[error("overlap determinant vanished ({0:.3e}); refine the phi grid")]
    SingularOverlap(f64),
    #[error("path leaves the admissible box |a|,|b| <= 1 at s = {s}")]
    PathOutOfRange { s: f64 },
    #[error("instantaneous gap {gap:.3e} below threshold at s = {s}")]
    GaplessPath { gap: f64, s: f64 },
    #[error("time integrator failed: {0}")]
    IntegratorFailure(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
