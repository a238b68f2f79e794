use thiserror::Error;

/// Failures raised by the numerical core.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid composition: {0}")]
    InvalidComposition(String),
    #[error("invalid reparametrization: {0}")]
    InvalidReparametrization(String),
    #[error("invalid resolution: {0}")]
    InvalidResolution(String),
    #[error("ambiguous degeneracy clustering: gap {gap:e} lies between {lower:e} and {upper:e}")]
    DegeneracyAmbiguity { gap: f64, lower: f64, upper: f64 },
    #[error("degeneracy mismatch at {point:?}: expected {expected:?}, found {found:?}")]
    DegeneracyMismatch {
        point: Vec<f64>,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("level {level} out of range for {levels} levels")]
    LevelOutOfRange { level: usize, levels: usize },
    #[error("generator output is not unitary (defect {defect:e})")]
    InvalidGenerator { defect: f64 },
    #[error("function lift merges an unselected level into the target eigenvalue (level {level})")]
    UnintendedDegeneracy { level: usize },
    #[error("frame transport broke down near {point:?}: smallest singular value {sigma:e}")]
    TransportBreakdown { point: Vec<f64>, sigma: f64 },
    #[error("connection is not anti-Hermitian (residue {residue:e})")]
    GaugeSmoothness { residue: f64 },
    #[error("projector product is singular (smallest singular value {sigma:e}); refine the loop sampling")]
    Resolution { sigma: f64 },
    #[error("integrator lost unitarity (defect {defect:e}); increase the step count")]
    IntegratorResolution { defect: f64 },
    #[error("spectral gap vanishes at t = {t}")]
    Crossing { t: f64 },
    #[error("invalid comparison: {0}")]
    InvalidComparison(String),
    #[error("field magnitude {magnitude:e} below the gap-collapse floor")]
    GapCollapse { magnitude: f64 },
    #[error("matrix is not unitary (defect {defect:e})")]
    NonUnitary { defect: f64 },
    #[error("no non-commuting loop pair found after {attempts} attempts (commutator norm {norm:e})")]
    GenericityFailure { attempts: usize, norm: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
