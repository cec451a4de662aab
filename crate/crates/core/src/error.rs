use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A construction parameter is outside its admissible range.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// An evaluation point lies outside the domain of the object.
    #[error("point outside domain: {0}")]
    Domain(String),

    /// A closed-form expression hit a (near) zero denominator.
    #[error("singular evaluation: {0}")]
    Singular(String),

    /// The requested configuration cannot produce a meaningful result.
    #[error("invalid configuration: {0}")]
    Configuration(String),

    /// A computed quantity contradicts an invariant that holds by construction.
    #[error("internal consistency violated: {0}")]
    InternalConsistency(String),

    /// Input data fails a hypothesis of the check it was handed to.
    #[error("rejected input: {0}")]
    RejectedInput(String),

    /// Random generation could not produce enough admissible candidates.
    #[error("generator exhausted: {0}")]
    GeneratorExhausted(String),
}

impl Error {
    /// True for errors caused by caller-supplied parameters rather than by computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::ParameterDomain(_) | Error::Domain(_) | Error::Configuration(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
