use thiserror::Error;

/// Every failure mode surfaced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("field matrix is not skew-symmetric (defect {defect:.3e}, scale {scale:.3e})")]
    NotSkewSymmetric { defect: f64, scale: f64 },

    #[error("degenerate magnetic field: smallest frequency {smallest:.3e} below floor {floor:.3e}")]
    DegenerateField { smallest: f64, floor: f64 },

    #[error("total flux {flux:.12} is not an integer multiple of 2*pi (nearest m = {nearest})")]
    NotQuantized { flux: f64, nearest: i64 },

    #[error("flux quantum number m = {m} is not positive")]
    NonPositiveFlux { m: i64 },

    #[error("flux per plaquette aliased: p * max cell flux = {phase:.4} >= pi; refine the grid")]
    FluxAliased { phase: f64 },

    #[error("site phases are not unit modulus (worst deviation {deviation:.3e} at site {site})")]
    NonUnitaryPhases { deviation: f64, site: usize },

    #[error("an eigenvalue lies within {tol:.3e} of the window endpoint {endpoint}")]
    WindowBoundaryHit { endpoint: f64, tol: f64 },

    #[error("eigensolver did not converge: {converged} of {wanted} pairs after {iterations} block steps (worst residual {worst_residual:.3e})")]
    NoConvergence {
        wanted: usize,
        converged: usize,
        iterations: usize,
        worst_residual: f64,
    },

    #[error("LDL factorization of H - {shift} I hit a near-zero pivot at row {row}")]
    ShiftSingular { shift: f64, row: usize },

    #[error("eigenvalue {value} exceeds the band-set energy cap {cap}")]
    EnergyCapExceeded { value: f64, cap: f64 },

    #[error("need at least {needed} usable points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("Liouville prediction is zero but {count} eigenvalues were counted")]
    EmptyPrediction { count: usize },

    #[error("eigen window is empty")]
    EmptyWindow,

    #[error("only {bins} distance bins above the noise floor (need 5)")]
    InsufficientRange { bins: usize },

    #[error("window holds {counted} eigenvalues but the model band predicts {predicted}")]
    WindowBandMismatch { counted: usize, predicted: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("dense eigensolver failed: {0}")]
    Dense(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
