//! Error taxonomy shared by all modules.
//!
//! Variants map one-to-one onto the failure classes surfaced by the CLI:
//! configuration problems (`InvalidArgument`, `InvalidConfiguration`,
//! `UnsupportedTexture`), numeric failures (`Quadrature`, `Internal`),
//! and model-domain failures (`DegenerateActivation`, `AnsatzDegenerate`,
//! `InvalidFrame`, `DomainSingularity`).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the documented domain of an operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested operation is not defined for this texture.
    #[error("texture `{texture}` is not supported by {operation}")]
    UnsupportedTexture { texture: String, operation: String },

    /// The spontaneous strain lost positive definiteness.
    #[error("degenerate activation: {0}")]
    DegenerateActivation(String),

    /// A quadrature did not converge between successive orders.
    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// An internal identity that must hold by construction was violated.
    #[error("internal consistency check failed: {0}")]
    Internal(String),

    /// A geometric configuration violates its defining constraints.
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// An ansatz deformation stopped being orientation preserving.
    #[error("degenerate ansatz: {0}")]
    AnsatzDegenerate(String),

    /// A sampled frame field violates orthonormality or admissibility.
    #[error("invalid frame field: {0}")]
    InvalidFrame(String),

    /// An evaluation point sits on a singularity of a branch formula.
    #[error("domain singularity: {0}")]
    DomainSingularity(String),
}

impl Error {
    pub fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn unsupported_texture(texture: impl Into<String>, operation: impl Into<String>) -> Self {
        Error::UnsupportedTexture {
            texture: texture.into(),
            operation: operation.into(),
        }
    }
}
