use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spin count must be positive")]
    ZeroSpins,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("normalized time {0} outside [0, 1]")]
    TimeOutOfRange(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate fields: h and gamma both vanish")]
    DegenerateFields,
    #[error("no admissible self-consistent root (J={coupling}, h={field_h}, gamma={gamma})")]
    NoAdmissibleRoot {
        coupling: f64,
        field_h: f64,
        gamma: f64,
    },
    #[error("magnetization derivative is singular (denominator {0:e})")]
    SingularDerivative(f64),
    #[error("root continuation jumped by {jump} at s={s}")]
    BranchJump { s: f64, jump: f64 },
    #[error("counter-diabatic field diverges at the critical point (gamma_dot={0})")]
    CriticalDivergence(f64),
    #[error("near-degenerate levels {0} and {1} (gap {2:e})")]
    NearDegenerate(usize, usize, f64),
    #[error("exact oracle requested for N={n_spins} above cap {cap}")]
    OracleCapExceeded { n_spins: usize, cap: usize },
    #[error("eigensolver failed to converge")]
    EigensolverFailure,
    #[error("step halving changed final fidelity by {0:e}")]
    NotConverged(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
