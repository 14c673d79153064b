use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid precision: {0}")]
    InvalidPrecision(String),

    #[error("cannot parse {input:?} as a real number")]
    Parse { input: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("state is not on the simplex: {0}")]
    InvalidState(String),

    #[error("eigenvalue formulas degenerate for rho = {rho}")]
    DegenerateSpectrum { rho: String },

    #[error("singular matrix")]
    SingularMatrix,

    #[error("NaN produced while evaluating {0}")]
    NotANumber(&'static str),

    #[error("state has x0 >= pi0 and lies outside Delta_B")]
    NotInDeltaB,

    #[error("no periodic or B-forever behaviour detected within {budget} steps")]
    Undetected { budget: usize },

    #[error("periodic letter block {block} at period {period} is not of the form [1,n] or [1,n,1,n-2]")]
    UnrecognizedCycle { block: String, period: usize },

    #[error("bad index for {which}: n = {n}, m = {m}")]
    BadIndex { which: &'static str, n: u32, m: u32 },

    #[error("no even n <= {n_max} with E_n >= 0")]
    SNotFound { n_max: u32 },

    #[error("sign of {curve} is undecided at the precision cap")]
    BoundaryAmbiguous { curve: String },

    #[error("{curve} has no sign change on [{lo}, {hi}]")]
    NoSignChange { curve: String, lo: String, hi: String },

    #[error("(rho, phi) is outside the twelve-region partition (G_4_2 < 0 or phi <= 2/3)")]
    NotInPartition,

    #[error("region predicate {0} is undecided at the precision cap")]
    PredicateAmbiguous(String),

    #[error("vertex checks only apply to regions 3, 9, 10 and 11; got {0}")]
    WrongRegion(u8),

    #[error("{pattern} is not a cycle at these parameters")]
    NotACycle { pattern: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("mismatch at step {step}: {detail}")]
    Mismatch { step: usize, detail: String },
}
