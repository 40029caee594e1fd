//! Entanglement measures for bipartite quantum channels.
//!
//! A bipartite channel acts on systems held by two parties, Alice and Bob,
//! and is represented throughout by its (unnormalized) Choi matrix over the
//! labeled systems `A0, A1, B0, B1` (inputs `A0, B0`, outputs `A1, B1`).
//! On top of that representation the crate provides:
//!
//! - labeled operators with tensor, partial trace, partial transpose and the
//!   link product ([`operator`]);
//! - channels, PPT channels and a small zoo of named examples ([`channel`]);
//! - superchannels (one-slot combs) with pre/post realizations, PPT
//!   superchannels and a complete PPT-preservation check ([`superchannel`]);
//! - multi-slot combs and adaptive plug-in of channels ([`comb`]);
//! - entanglement measures defined by conic programs: negativity variants,
//!   a max-logarithmic negativity, conversion distances and exact single-shot
//!   distillation and cost under PPT superchannels ([`measures`]);
//! - a thin conic-programming layer over the Clarabel interior-point solver
//!   ([`conic`]);
//! - JSON serialization and the `dynent` command line tool ([`io`], [`cli`]).
//!
//! Conventions: the Choi matrix of a channel `N` from input `X` to output `Y`
//! is `J = sum_{ij} |i><j|_X (x) N(|i><j|)_Y`, so `Tr J = dim X` and complete
//! positivity is `J >= 0`. All transposes are taken in the computational
//! basis. Label names starting with `A` belong to Alice, names starting with
//! `B` to Bob; partial transposes defining PPT conditions act on Bob's labels.

pub mod channel;
pub mod cli;
pub mod comb;
pub mod conic;
pub mod io;
pub mod measures;
pub mod operator;
pub mod superchannel;

pub use channel::{Channel, ChoiMap, State};
pub use comb::Comb;
pub use operator::{LabeledOperator, SystemLabel, C64};
pub use superchannel::Superchannel;

/// Errors shared by every layer of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Two systems in one operator carry the same label name.
    #[error("label collision: {0}")]
    LabelCollision(String),

    /// A named system does not exist on the operator it was requested from.
    #[error("unknown label: {0}")]
    UnknownLabel(String),

    /// Dimensions or label sets do not fit the requested operation.
    #[error("shape mismatch: {0}")]
    ShapeError(String),

    /// An operator required to be Hermitian is not, within tolerance.
    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    /// POVM elements fail positivity or completeness.
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    /// The conic solver failed to produce a usable solution.
    #[error("solver failure: {0}")]
    SolverError(String),

    /// A precondition of the called routine does not hold for the input.
    #[error("precondition violated: {0}")]
    PreconditionError(String),

    /// Input parsing or file I/O failed.
    #[error("input error: {0}")]
    InputError(String),
}

pub type Result<T> = std::result::Result<T, Error>;
