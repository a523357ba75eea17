//! Schnorr–Euchner closest-point decoders.
//!
//! Eight variants share one engine, selected by [`DecoderConfig`]:
//!
//! | label | basis | projection | domain  |
//! |-------|-------|------------|---------|
//! | 1     | G     | old        | lattice |
//! | 2     | G     | old        | finite  |
//! | 3     | H     | old        | lattice |
//! | 4     | H     | old        | finite  |
//! | 5     | G     | new        | lattice |
//! | 6     | G     | new        | finite  |
//! | 7     | H     | new        | lattice |
//! | 8     | H     | new        | finite  |
//!
//! "Old" H-based decoders project the received vector row by row every time
//! they move down a layer. "Old" G-based decoders recompute the partial sums
//! `sum_{k>i} u_k G_{k,i}` from scratch. The "new" variants keep the lower
//! triangle of `E` (or of the partial-sum matrix `F`) and refresh a column
//! only from the layer `d_i` where it first became stale. All eight visit the
//! same candidates in the same order for a given domain.

mod engine;
pub mod rounding;
pub mod trace;

use std::fmt;

use thiserror::Error;

use crate::counting::OpCounter;
use crate::linalg::LowerTriangularPair;

pub use rounding::{round_clamped, round_nearest, sign_step};
pub use trace::{NoProbe, Phase, Probe, Trace, TraceEvent, Visit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("empty constellation range [{u_min}, {u_max}]")]
    EmptyRange { u_min: i64, u_max: i64 },
    #[error("received vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("received vector entry {index} is not finite")]
    NonFiniteInput { index: usize },
    #[error("unknown algorithm label {0} (expected 1..=8)")]
    UnknownAlgorithm(u8),
    #[error("algorithm {0} decodes a finite constellation and needs u_min/u_max")]
    MissingRange(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisForm {
    /// Works on `G` directly.
    G,
    /// Works on `H = G^-1`.
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Old,
    New,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Lattice,
    Finite { u_min: i64, u_max: i64 },
}

impl Domain {
    pub fn is_finite(&self) -> bool {
        matches!(self, Domain::Finite { .. })
    }

    /// Number of constellation levels, `None` for the full lattice.
    pub fn levels(&self) -> Option<u64> {
        match *self {
            Domain::Lattice => None,
            Domain::Finite { u_min, u_max } if u_min <= u_max => {
                Some((i128::from(u_max) - i128::from(u_min) + 1).min(u64::MAX as i128) as u64)
            }
            Domain::Finite { .. } => Some(0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DecoderConfig {
    pub basis_form: BasisForm,
    pub strategy: Strategy,
    pub domain: Domain,
}

impl DecoderConfig {
    pub fn new(basis_form: BasisForm, strategy: Strategy, domain: Domain) -> Self {
        DecoderConfig {
            basis_form,
            strategy,
            domain,
        }
    }

    /// Builds the configuration for algorithm `label` (1..=8). Even labels
    /// decode a finite constellation and need `range`; odd labels ignore it.
    pub fn from_label(label: u8, range: Option<(i64, i64)>) -> Result<Self, DecodeError> {
        if !(1..=8).contains(&label) {
            return Err(DecodeError::UnknownAlgorithm(label));
        }
        let bits = label - 1;
        let domain = if bits & 1 == 1 {
            let (u_min, u_max) = range.ok_or(DecodeError::MissingRange(label))?;
            Domain::Finite { u_min, u_max }
        } else {
            Domain::Lattice
        };
        let basis_form = if bits & 2 == 2 { BasisForm::H } else { BasisForm::G };
        let strategy = if bits & 4 == 4 { Strategy::New } else { Strategy::Old };
        let cfg = DecoderConfig::new(basis_form, strategy, domain);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn label(&self) -> u8 {
        1 + u8::from(self.domain.is_finite())
            + 2 * u8::from(self.basis_form == BasisForm::H)
            + 4 * u8::from(self.strategy == Strategy::New)
    }

    pub fn validate(&self) -> Result<(), DecodeError> {
        match self.domain {
            Domain::Finite { u_min, u_max } if u_min > u_max => {
                Err(DecodeError::EmptyRange { u_min, u_max })
            }
            _ => Ok(()),
        }
    }

    /// The same algorithm with the other projection strategy.
    pub fn with_strategy(self, strategy: Strategy) -> Self {
        DecoderConfig { strategy, ..self }
    }
}

impl fmt::Display for DecoderConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let form = match self.basis_form {
            BasisForm::G => "G",
            BasisForm::H => "H",
        };
        let strat = match self.strategy {
            Strategy::Old => "old",
            Strategy::New => "new",
        };
        match self.domain {
            Domain::Lattice => write!(f, "#{} {strat} {form}-based lattice", self.label()),
            Domain::Finite { u_min, u_max } => write!(
                f,
                "#{} {strat} {form}-based finite [{u_min}, {u_max}]",
                self.label()
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub u_hat: Vec<i64>,
    /// `C` at termination, the accumulated `lambda_1` of `u_hat`.
    pub squared_distance: f64,
    pub counters: OpCounter,
}

/// Mutable decoding state for one algorithm over one basis. Buffers are sized
/// once and reused by every call; run one instance per thread.
pub struct SphereDecoder<'a> {
    config: DecoderConfig,
    pair: &'a LowerTriangularPair,
    ws: engine::Workspace,
}

impl<'a> SphereDecoder<'a> {
    pub fn new(config: DecoderConfig, pair: &'a LowerTriangularPair) -> Result<Self, DecodeError> {
        config.validate()?;
        let n = pair.dim();
        if n == 0 {
            return Err(DecodeError::EmptyDimension);
        }
        Ok(SphereDecoder {
            config,
            pair,
            ws: engine::Workspace::new(pair),
        })
    }

    pub fn config(&self) -> DecoderConfig {
        self.config
    }

    pub fn dim(&self) -> usize {
        self.pair.dim()
    }

    pub fn decode(&mut self, r: &[f64]) -> Result<DecodeResult, DecodeError> {
        self.decode_with(r, &mut NoProbe)
    }

    pub fn trace_decode(&mut self, r: &[f64]) -> Result<(Trace, DecodeResult), DecodeError> {
        let mut trace = Trace::default();
        let res = self.decode_with(r, &mut trace)?;
        Ok((trace, res))
    }

    pub fn decode_with<P: Probe>(
        &mut self,
        r: &[f64],
        probe: &mut P,
    ) -> Result<DecodeResult, DecodeError> {
        let n = self.pair.dim();
        if r.len() != n {
            return Err(DecodeError::DimensionMismatch {
                expected: n,
                got: r.len(),
            });
        }
        if let Some(index) = r.iter().position(|v| !v.is_finite()) {
            return Err(DecodeError::NonFiniteInput { index });
        }
        Ok(engine::run(self.config, &mut self.ws, r, probe))
    }
}

/// One-shot decode. Allocates a fresh [`SphereDecoder`].
pub fn decode(
    config: DecoderConfig,
    pair: &LowerTriangularPair,
    r: &[f64],
) -> Result<DecodeResult, DecodeError> {
    SphereDecoder::new(config, pair)?.decode(r)
}

/// One-shot decode that also records every step and candidate visit.
pub fn trace_decode(
    config: DecoderConfig,
    pair: &LowerTriangularPair,
    r: &[f64],
) -> Result<(Trace, DecodeResult), DecodeError> {
    SphereDecoder::new(config, pair)?.trace_decode(r)
}

/// `||r - u G||^2` evaluated directly.
pub fn squared_distance(pair: &LowerTriangularPair, r: &[f64], u: &[i64]) -> f64 {
    let x = pair.g().combine(u);
    r.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum()
}
