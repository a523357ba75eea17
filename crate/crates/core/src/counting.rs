//! Floating-point and integer operation accounting.
//!
//! Every counted line of the decoder engine is a [`Step`]. Its price comes from
//! a single [`CostRule`] per [`StepKind`] so the whole classification can be
//! audited (and changed) in one place: [`cost_table`].
//!
//! Conventions:
//! - arithmetic and comparisons on reals are flops, on integers intops;
//! - `round` is one flop, `roundc` over `L` levels is `ceil(log2 L)` flops;
//! - a `k`-term sum of products costs `2k` flops (accumulate into zero);
//! - assignments, memory traffic and layer-index tests (`i != 1`, `i == n`)
//!   are free, like loop counters.

use std::fmt;
use std::ops::{Add, AddAssign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Flop,
    Intop,
}

/// Flop and intop tallies for one decode (or a sum of decodes).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct OpCounter {
    pub flops: u64,
    pub intops: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline(always)]
    pub fn charge(&mut self, kind: OpKind, amount: u64) {
        match kind {
            OpKind::Flop => self.flops += amount,
            OpKind::Intop => self.intops += amount,
        }
    }

    #[inline(always)]
    pub fn charge_step(&mut self, step: Step) {
        let c = step.cost();
        self.flops += c.flops;
        self.intops += c.intops;
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    pub fn get(&self, kind: OpKind) -> u64 {
        match kind {
            OpKind::Flop => self.flops,
            OpKind::Intop => self.intops,
        }
    }
}

impl Add for OpCounter {
    type Output = OpCounter;

    fn add(self, rhs: OpCounter) -> OpCounter {
        OpCounter {
            flops: self.flops + rhs.flops,
            intops: self.intops + rhs.intops,
        }
    }
}

impl AddAssign for OpCounter {
    fn add_assign(&mut self, rhs: OpCounter) {
        self.flops += rhs.flops;
        self.intops += rhs.intops;
    }
}

impl fmt::Display for OpCounter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "flops={} intops={}", self.flops, self.intops)
    }
}

/// A counted line of the engine, with whatever size parameter its cost
/// depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// `E_{n,j} = sum_{k=j..n} r_k H_{k,j}` for one column `j`.
    ProjectReceived { terms: usize },
    /// `E_{i,j} = E_{i+1,j} - y H_{i+1,j}` for `j = 1..i` (old H-based).
    RowUpdate { width: usize },
    /// Lazy column update of `E` or `F` from `d_i` down to `i+1` (new algorithms).
    ColumnUpdate { len: usize },
    /// `p_i = (r_i - sum_{j>i} u_j G_{j,i}) / G_{i,i}` (old G-based).
    ProjectionSum { terms: usize },
    /// `p_i = (r_i - F_{i,i}) / G_{i,i}` (new G-based).
    ProjectionFromPartial,
    Round,
    RoundClamped { levels: u64 },
    /// `y = (p_i - u_i) G_{i,i}` or `y = (E_{i,i} - u_i) / H_{i,i}`.
    Displacement,
    /// `Delta_i = sign(y)`.
    SignOfDisplacement,
    /// `lambda_n = y^2`.
    FirstDistance,
    /// `lambda_i = lambda_{i+1} + y^2`.
    AccumulateDistance,
    /// `lambda_i < C` or `lambda_i >= C`.
    CompareRadius,
    /// `u_i = u_i + Delta_i`.
    AdvanceCandidate,
    /// `Delta_i = -Delta_i - sign(Delta_i)`.
    ReverseStep,
    /// `U_min <= u_i <= U_max`.
    RangeCheck,
    /// `d_j < i`.
    StartIndexCompare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepKind {
    ProjectReceived,
    RowUpdate,
    ColumnUpdate,
    ProjectionSum,
    ProjectionFromPartial,
    Round,
    RoundClamped,
    Displacement,
    SignOfDisplacement,
    FirstDistance,
    AccumulateDistance,
    CompareRadius,
    AdvanceCandidate,
    ReverseStep,
    RangeCheck,
    StartIndexCompare,
}

/// Price of a step kind: `fixed + per_unit * units`, all of one [`OpKind`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostRule {
    pub kind: StepKind,
    pub line: &'static str,
    pub op: OpKind,
    pub fixed: u64,
    pub per_unit: u64,
    /// What `units` counts for this rule.
    pub unit: &'static str,
}

const TABLE: [CostRule; 16] = [
    CostRule { kind: StepKind::ProjectReceived, line: "E_{n,j} = sum_{k=j}^n r_k H_{k,j}", op: OpKind::Flop, fixed: 0, per_unit: 2, unit: "terms" },
    CostRule { kind: StepKind::RowUpdate, line: "E_{i,j} = E_{i+1,j} - y H_{i+1,j}, j=1..i", op: OpKind::Flop, fixed: 0, per_unit: 2, unit: "width i" },
    CostRule { kind: StepKind::ColumnUpdate, line: "F_{j-1,i} = F_{j,i} + u_j G_{j,i} / E_{j-1,i} = E_{j,i} - y_j H_{j,i}, j=d_i..i+1", op: OpKind::Flop, fixed: 0, per_unit: 2, unit: "d_i - i" },
    CostRule { kind: StepKind::ProjectionSum, line: "p_i = (r_i - sum_{j=i+1}^n u_j G_{j,i}) / G_{i,i}", op: OpKind::Flop, fixed: 2, per_unit: 2, unit: "n - i" },
    CostRule { kind: StepKind::ProjectionFromPartial, line: "p_i = (r_i - F_{i,i}) / G_{i,i}", op: OpKind::Flop, fixed: 2, per_unit: 0, unit: "-" },
    CostRule { kind: StepKind::Round, line: "u_i = round(.)", op: OpKind::Flop, fixed: 1, per_unit: 0, unit: "-" },
    CostRule { kind: StepKind::RoundClamped, line: "u_i = roundc(.)", op: OpKind::Flop, fixed: 0, per_unit: 1, unit: "ceil(log2 L)" },
    CostRule { kind: StepKind::Displacement, line: "y = (p_i - u_i) G_{i,i} / y = (E_{i,i} - u_i) / H_{i,i}", op: OpKind::Flop, fixed: 2, per_unit: 0, unit: "-" },
    CostRule { kind: StepKind::SignOfDisplacement, line: "Delta_i = sign(y)", op: OpKind::Flop, fixed: 1, per_unit: 0, unit: "-" },
    CostRule { kind: StepKind::FirstDistance, line: "lambda_n = y^2", op: OpKind::Flop, fixed: 1, per_unit: 0, unit: "-" },
    CostRule { kind: StepKind::AccumulateDistance, line: "lambda_i = lambda_{i+1} + y^2", op: OpKind::Flop, fixed: 2, per_unit: 0, unit: "-" },
    CostRule { kind: StepKind::CompareRadius, line: "while (lambda_i < C) / while (lambda_i >= C)", op: OpKind::Flop, fixed: 1, per_unit: 0, unit: "-" },
    CostRule { kind: StepKind::AdvanceCandidate, line: "u_i = u_i + Delta_i", op: OpKind::Intop, fixed: 1, per_unit: 0, unit: "-" },
    CostRule { kind: StepKind::ReverseStep, line: "Delta_i = -Delta_i - sign(Delta_i)", op: OpKind::Intop, fixed: 3, per_unit: 0, unit: "-" },
    CostRule { kind: StepKind::RangeCheck, line: "if (U_min <= u_i <= U_max)", op: OpKind::Intop, fixed: 2, per_unit: 0, unit: "-" },
    CostRule { kind: StepKind::StartIndexCompare, line: "if (d_j < i)", op: OpKind::Intop, fixed: 1, per_unit: 0, unit: "-" },
];

/// Every counted engine line with its price, in engine order.
pub fn cost_table() -> &'static [CostRule] {
    &TABLE
}

#[inline(always)]
pub fn rule(kind: StepKind) -> &'static CostRule {
    // TABLE is laid out in StepKind discriminant order.
    &TABLE[kind as usize]
}

/// `ceil(log2(levels))`, the number of comparisons a binary search needs to
/// place a real among `levels` integers. 1 for 2-PAM, 2 for 4-PAM.
#[inline(always)]
pub fn clamped_round_cost(levels: u64) -> u64 {
    if levels <= 1 {
        0
    } else {
        u64::from(64 - (levels - 1).leading_zeros())
    }
}

impl Step {
    #[inline(always)]
    pub fn kind(&self) -> StepKind {
        match self {
            Step::ProjectReceived { .. } => StepKind::ProjectReceived,
            Step::RowUpdate { .. } => StepKind::RowUpdate,
            Step::ColumnUpdate { .. } => StepKind::ColumnUpdate,
            Step::ProjectionSum { .. } => StepKind::ProjectionSum,
            Step::ProjectionFromPartial => StepKind::ProjectionFromPartial,
            Step::Round => StepKind::Round,
            Step::RoundClamped { .. } => StepKind::RoundClamped,
            Step::Displacement => StepKind::Displacement,
            Step::SignOfDisplacement => StepKind::SignOfDisplacement,
            Step::FirstDistance => StepKind::FirstDistance,
            Step::AccumulateDistance => StepKind::AccumulateDistance,
            Step::CompareRadius => StepKind::CompareRadius,
            Step::AdvanceCandidate => StepKind::AdvanceCandidate,
            Step::ReverseStep => StepKind::ReverseStep,
            Step::RangeCheck => StepKind::RangeCheck,
            Step::StartIndexCompare => StepKind::StartIndexCompare,
        }
    }

    #[inline(always)]
    fn units(&self) -> u64 {
        match *self {
            Step::ProjectReceived { terms } => terms as u64,
            Step::RowUpdate { width } => width as u64,
            Step::ColumnUpdate { len } => len as u64,
            Step::ProjectionSum { terms } => terms as u64,
            Step::RoundClamped { levels } => clamped_round_cost(levels),
            _ => 0,
        }
    }

    #[inline(always)]
    pub fn cost(&self) -> OpCounter {
        let r = rule(self.kind());
        let amount = r.fixed + r.per_unit * self.units();
        let mut c = OpCounter::default();
        c.charge(r.op, amount);
        c
    }
}
