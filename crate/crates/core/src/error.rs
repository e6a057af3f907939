//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by model-level operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    /// The configuration's window does not cover the impact region of the
    /// particle whose leap was requested.
    #[error("insufficient-support: configuration window does not cover the impact region")]
    InsufficientSupport,
    /// The model kind has no generic intensity integrator.
    #[error("no-closed-form: model kind lacks a diluteness integrator")]
    NoClosedForm,
    /// Probing found an effective leap below the supplied uniform bound.
    #[error("unbounded-density: effective leap {leap} fell below the declared bound {bound}")]
    UnboundedDensity { leap: f64, bound: f64 },
    /// The tail estimate cannot certify the sign of the Peierls coefficient
    /// against one.
    #[error("truncation-inconclusive: tail bound cannot certify the verdict at l_max {l_max}")]
    TruncationInconclusive { l_max: u32 },
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
}

/// Errors raised by the free cylinder process substrate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProcessError {
    /// A cell was queried at a time later than a previously served query.
    #[error("query-order-violation: cell queried at {requested} after earlier query at {last}")]
    QueryOrderViolation { requested: f64, last: f64 },
}

/// Errors raised by the clan sampler.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    /// The clan grew past the configured cap; the model is not diluted enough
    /// for backward simulation to terminate in reasonable time.
    #[error("clan-cap-exceeded: clan reached {count} cylinders (cap {cap})")]
    ClanCapExceeded { count: usize, cap: usize },
    /// Two distinct cylinders with impact between them share a birth time.
    #[error("birth-time-collision: cylinders {a:?} and {b:?} share birth time {time}")]
    BirthTimeCollision {
        a: (u32, u32),
        b: (u32, u32),
        time: f64,
    },
    /// A mapped impact region reached a cylinder outside the envelope clan.
    #[error("envelope-violation: mapped impact region escaped the envelope relation")]
    EnvelopeViolation,
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors raised by exact enumeration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("state-space-too-large: enumeration visited more than {cap} states")]
    StateSpaceTooLarge { cap: u64 },
    /// The model does not exclude multiplicity >= 2 per site and no cap was
    /// supplied, so the enumeration would miss mass.
    #[error("multiplicity-unbounded: model admits unbounded per-site multiplicity")]
    MultiplicityUnbounded,
    #[error("not-realizable: edge sets are not disjoint closed curves")]
    NotRealizable,
    #[error("catalog-too-large: contour catalog for l_max {l_max} exceeds the memory bound")]
    CatalogTooLarge { l_max: u32 },
    #[error("enumeration requires a lattice model")]
    NotLattice,
}

/// Errors raised by the model specification parser.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing key `{0}`")]
    MissingKey(String),
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
}
