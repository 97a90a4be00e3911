use thiserror::Error;

/// Errors raised by the physics and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The drive vanishes, so the generator has no unique steady state.
    #[error("singular generator: steady state is not unique without a drive (omega = 0)")]
    SingularGenerator,

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical sanity check failed: {0}")]
    Numerical(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("spectrum structure: {0}")]
    Structure(String),

    #[error("fit did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last: [f64; 3],
    },
}

impl Error {
    /// True for errors caused by the physical inputs rather than bad numerics or data.
    pub fn is_physics_domain(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_) | Error::SingularGenerator | Error::Domain(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
