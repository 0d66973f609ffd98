use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |m - m^dagger| = {deviation:e}")]
    NonHermitianInput { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} exceeds the dense limit of {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("qubit count {n} outside the supported range 1..={max}")]
    SizeOutOfRange { n: usize, max: usize },

    #[error("kick operator is not symmetric in the computational basis (deviation {deviation:e})")]
    AsymmetricKick { deviation: f64 },

    #[error("kick operator is not unitary (deviation {deviation:e})")]
    NonUnitaryKick { deviation: f64 },

    #[error("chain is disconnected: second eigenvalue {lambda1} is numerically 1")]
    DisconnectedChain { lambda1: f64 },

    #[error("walk spectrum has no eigenphase pair for chain eigenvalue {lambda} (closest distance {distance:e})")]
    BlockMismatch { lambda: f64, distance: f64 },

    #[error("state has weight {leakage:e} outside the measured subspace")]
    NormLoss { leakage: f64 },

    #[error("annealing aborted at step {step}: measurement outcome {outcome}")]
    AnnealAborted { step: usize, outcome: usize },

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
