//! Observation hooks for the engine.
//!
//! The engine is generic over a [`Probe`]. [`NoProbe`] compiles to nothing, so
//! counting runs pay no tracing cost; [`Trace`] records every counted step and
//! every candidate the enumeration examines.

use crate::counting::{OpCounter, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    /// First candidate of a layer, reached by moving down.
    Down,
    /// Next zig-zag candidate, reached by moving up.
    Up,
}

/// One candidate examination at a layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub phase: Phase,
    /// Layer index `i`, 1-based.
    pub layer: usize,
    pub candidate: i64,
    /// Projection value the candidate was rounded from (`E_{i,i}` or `p_i`).
    pub projection: f64,
    /// Displacement `y`; infinite when no in-range candidate was left.
    pub displacement: f64,
    /// `lambda_i` after this candidate.
    pub lambda: f64,
    /// `lambda_{i+1}` the accumulation started from.
    pub lambda_above: f64,
}

impl TraceEvent {
    pub fn visit(&self) -> Visit {
        Visit {
            phase: self.phase,
            layer: self.layer,
            candidate: self.candidate,
        }
    }
}

/// The arithmetic-free part of a [`TraceEvent`]: which candidate was tried
/// where. Algorithms that enumerate identically produce identical visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Visit {
    pub phase: Phase,
    pub layer: usize,
    pub candidate: i64,
}

pub trait Probe {
    #[inline(always)]
    fn step(&mut self, _step: Step) {}

    #[inline(always)]
    fn visit(&mut self, _event: TraceEvent) {}

    /// Called by the new decoders on every entry to the main loop with the
    /// current layer and the start indices `d_1..d_n`.
    #[inline(always)]
    fn loop_entry(&mut self, _layer: usize, _start: &[usize]) {}
}

#[derive(Debug, Default, Clone, Copy)]
pub struct NoProbe;

impl Probe for NoProbe {}

#[derive(Debug, Default, Clone)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub steps: Vec<Step>,
}

impl Trace {
    pub fn visits(&self) -> Vec<Visit> {
        self.events.iter().map(TraceEvent::visit).collect()
    }

    /// Sum of the cost table over the recorded steps.
    pub fn audited_cost(&self) -> OpCounter {
        self.steps.iter().fold(OpCounter::default(), |acc, s| acc + s.cost())
    }
}

impl Probe for Trace {
    fn step(&mut self, step: Step) {
        self.steps.push(step);
    }

    fn visit(&mut self, event: TraceEvent) {
        self.events.push(event);
    }
}
