//! Schnorr–Euchner sphere decoders with exact operation counting.
//!
//! The eight decoders live in [`decoder`]; [`counting`] holds the cost model
//! they are charged under. [`oracle`] gives brute-force references,
//! [`reduction`] LLL preprocessing, [`sampling`] seeded instance generation and
//! [`experiments`] the gain measurements built on top.

pub mod counting;
pub mod decoder;
pub mod experiments;
pub mod linalg;
pub mod oracle;
pub mod reduction;
pub mod sampling;

pub use counting::{OpCounter, OpKind, Step};
pub use decoder::{
    decode, trace_decode, BasisForm, DecodeError, DecodeResult, DecoderConfig, Domain,
    SphereDecoder, Strategy,
};
pub use experiments::{
    gain, run_experiment, AlgorithmPair, ExperimentError, ExperimentSpec, Family, GainReport,
    Metric, Reduce, VectorSchedule,
};
pub use linalg::{lower_triangularize, LinalgError, LowerTriangularPair, Matrix};
pub use oracle::{oracle_finite, oracle_lattice, OracleError, OracleResult};
pub use reduction::{lll_reduce, ReducedBasis, ReductionError};
pub use sampling::Seed;
