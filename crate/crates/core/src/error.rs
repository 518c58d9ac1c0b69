// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("hopping map is not Hermitian at offset {offset}: t(-r) must equal conj(t(r))")]
    NonHermitianHopping { offset: i64 },

    #[error("hopping amplitude at offset {offset} has modulus {modulus:.6e}, above the declared envelope {envelope:.6e} (decay rate {decay_rate})")]
    DecayViolation { offset: i64, modulus: f64, envelope: f64, decay_rate: f64 },

    #[error("deformation parameter {zeta} lies outside the strip |Im ζ| < {width}")]
    OutsideStrip { zeta: String, width: f64 },

    #[error("deformation parameter must be purely imaginary, got real part {re}")]
    NonImaginary { re: f64 },

    #[error("matrix is not Hermitian: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { residual: f64, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("superoperator dimension {dim} exceeds the dense limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("non-finite values in the propagated state at t = {t} ({generator})")]
    Overflow { t: f64, generator: String },

    #[error("invalid jump operator: {0}")]
    InvalidJump(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("site sets overlap at site {site}")]
    OverlappingSets { site: usize },

    #[error("site set is empty: {0}")]
    EmptySet(&'static str),

    #[error("site {site} is outside the chain of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("slope undefined for disordered V: the potential is not constant")]
    SlopeUndefined,

    #[error("times must be non-negative and strictly ascending")]
    NonAscendingTimes,

    #[error("{0}")]
    Unsupported(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
