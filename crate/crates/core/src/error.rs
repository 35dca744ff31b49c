//! Error type shared by all modules.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("frame columns are not orthonormal (defect {defect:.3e})")]
    NotOrthonormal { defect: f64 },

    #[error("frame does not span a Lagrangian subspace (isotropy defect {defect:.3e})")]
    NotLagrangian { defect: f64 },

    #[error("matrix is not symmetric (defect {defect:.3e})")]
    NotSymmetric { defect: f64 },

    #[error("subspace is not isotropic")]
    NotIsotropic,

    #[error("Lagrangian is not the graph of an operator (meets the vertical)")]
    NotAGraph,

    #[error("subspaces do not intersect cleanly (intersection dimension {dim})")]
    NotClean { dim: usize },

    #[error("isotropic subspaces are not nested")]
    NotNested,

    #[error("path is not closed (endpoint gap {gap:.3e})")]
    NotClosed { gap: f64 },

    #[error("path endpoint at t = {t} is not transverse to the reference")]
    EndpointNotTransverse { t: f64 },

    #[error("transversality violated: {context}")]
    TransversalityViolated { context: &'static str },

    #[error("signature parity violated: {context}")]
    ParityViolation { context: &'static str },

    #[error("frame does not map to a unitary matrix (defect {defect:.3e})")]
    UnitarityFailure { defect: f64 },

    #[error("numerically ambiguous {context}: no clear spectral gap (ratio {ratio:.3e})")]
    NumericallyAmbiguous { context: &'static str, ratio: f64 },

    #[error("sample refinement exhausted on [{lo}, {hi}]")]
    RefinementExhausted { lo: f64, hi: f64 },

    #[error("consecutive path samples too far apart (gap {gap:.3e} at index {index})")]
    PathTooCoarse { index: usize, gap: f64 },

    #[error("operator is singular (eigenvalue {eigenvalue:.3e} inside the tolerance band)")]
    SingularOperator { eigenvalue: f64 },

    #[error("path endpoint at λ = {at} is singular (eigenvalue {eigenvalue:.3e})")]
    SingularEndpoint { at: f64, eigenvalue: f64 },

    #[error("non-isolated singularity on [{lo}, {hi}]")]
    NonIsolatedSingularity { lo: f64, hi: f64 },

    #[error("degenerate crossing at λ = {at}")]
    DegenerateCrossing { at: f64 },

    #[error("eigenvalue branch matching is ambiguous near λ = {at}")]
    BranchAmbiguity { at: f64 },

    #[error("invertibility certificate failed at λ = {at} (margin {margin:.3e})")]
    CertificateFailure { at: f64, margin: f64 },

    #[error("suspension budget exceeded (needed {needed}, budget {budget})")]
    SuspensionBudgetExceeded { needed: usize, budget: usize },

    #[error("transversality lost near t = {t}")]
    TransversalityLost { t: f64 },

    #[error("ambient space too small to absorb the suspension (needed {needed}, available {available})")]
    AmbientTooSmall { needed: usize, available: usize },

    #[error("Newton iteration diverged at amplitude rung {rung}")]
    NewtonDiverged { rung: usize },

    #[error("family contract violated: {0}")]
    ContractViolated(String),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
