//! Flagged and shared-flag parallel syndrome extraction for small CSS codes.
//!
//! This crate builds syndrome-extraction gadgets for distance-2/3 CSS codes
//! (standard flagged circuits, shared-flag parallel circuits, and ex-Rec CNOT
//! assemblies), certifies them fault-tolerant by exhaustive single-fault
//! enumeration, generates the flag lookup tables used by the adaptive decoding
//! procedures, and estimates memory and computation pseudo-thresholds by
//! Pauli-frame Monte Carlo simulation under circuit-level depolarizing noise.
//!
//! The simulation core is phase-free binary-symplectic algebra: Pauli
//! operators are pairs of packed bit vectors, Clifford propagation is a
//! handful of XORs per gate, and a single trial touches only the faults it
//! actually sampled.

pub mod builders;
pub mod circuit;
pub mod codes;
pub mod decode;
pub mod faults;
pub mod ftcheck;
pub mod gf2;
pub mod montecarlo;
pub mod pauli;
pub mod propagate;
pub mod report;
pub mod scheme;

pub use codes::{CssCode, ResidualClass};
pub use pauli::{PauliOperator, Syndrome};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("operator length mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("expected a pure X-type or pure Z-type operator, got {0}")]
    MixedType(String),
    #[error("unknown code `{0}` (catalog: 422, steane713, shor913, rm1513)")]
    UnknownCode(String),
    #[error("unknown scheme `{0}` for code `{1}`")]
    UnknownScheme(String, String),
    #[error("inconsistent code definition: {0}")]
    BadCode(String),
    #[error("invalid circuit: {0}")]
    BadCircuit(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("stabilizer weight {0} too low for a flagged circuit; use the unflagged builder")]
    WeightTooLow(usize),
    #[error("flag budget violated: sum of flag-triggering classes {0} exceeds 2^{1}")]
    BudgetExceeded(usize, usize),
    #[error("schedule conflict: {0}")]
    Schedule(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("search exhausted after {0} iterations; best attempt had {1} syndrome collisions")]
    SearchExhausted(u64, usize),
    #[error("scheme is not certified: {0}")]
    NotCertified(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
