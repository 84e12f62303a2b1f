use thiserror::Error;

/// Failure classes raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// `2πv_F + g4 ≤ |g2|` or `|g| ≥ ω`: the reference Hamiltonian has no stable ground state.
    #[error("luttinger-instability: {0}")]
    LuttingerInstability(String),

    /// The controlled spectrum `sqrt(v_s²p² − χ²)` became imaginary.
    #[error("cd-instability: {0}")]
    CdInstability(String),

    /// A precondition of an operation was violated by its caller.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A value left the representable range of `f64`.
    #[error("range error: {0}")]
    Range(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    /// Truncated Fock amplitudes put more than the allowed weight on the last level.
    #[error("cutoff-unsafe: tail mass {tail_mass:e} at n_max = {n_max}")]
    CutoffUnsafe { tail_mass: f64, n_max: usize },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn luttinger(msg: impl Into<String>) -> Self {
        Error::LuttingerInstability(msg.into())
    }

    pub(crate) fn cd(msg: impl Into<String>) -> Self {
        Error::CdInstability(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
