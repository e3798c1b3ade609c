use alloc::boxed::Box;
use alloc::string::String;

use crate::selectors::Selection;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Which Dunford-Pettis witness could not be produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailedCondition {
    UniformIntegrability,
    Tightness,
    SetTest,
    TruncationBound,
}

impl core::fmt::Display for FailedCondition {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            FailedCondition::UniformIntegrability => "uniform integrability",
            FailedCondition::Tightness => "tightness",
            FailedCondition::SetTest => "set-test",
            FailedCondition::TruncationBound => "truncation bound",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("exponent p = {0} is outside the admissible range")]
    InvalidExponent(f64),
    #[error("densities live on different measure spaces")]
    SpaceMismatch,
    #[error("atom {atom} has non-positive or non-finite weight {weight}")]
    NonPositiveWeight { atom: usize, weight: f64 },
    #[error("exhaustion rank is not a permutation of 0..{atom_count}")]
    NotAPermutation { atom_count: usize },
    #[error("measure space has no atoms")]
    EmptySpace,
    #[error("atom index {index} out of range for {atom_count} atoms")]
    InvalidAtom { index: usize, atom_count: usize },
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite value at atom {atom} (column {column})")]
    NonFinite { atom: usize, column: usize },
    #[error("ragged table: row {row} has {found} values, expected {expected}")]
    RaggedRows { row: usize, expected: usize, found: usize },
    #[error("sequence has no terms")]
    EmptySequence,
    #[error("term {term} has norm {norm} above the declared bound {bound}")]
    NormBoundViolated { term: usize, norm: f64, bound: f64 },
    #[error("{what} = {value} out of range (allowed up to {max})")]
    OutOfRange { what: &'static str, value: usize, max: usize },
    #[error("dyadic grid 2^{grid} cannot resolve {terms} terms")]
    ResolutionExceeded { grid: u32, terms: usize },
    #[error("{what} must be strictly positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("empty {0}")]
    EmptyFamily(&'static str),
    #[error("no admissible index for step j = {j} before the horizon")]
    SelectionExhausted { j: usize, partial: Box<Selection> },
    #[error("Dunford-Pettis precondition failed: no {condition} witness ({detail})")]
    DiagnosticsFailed { condition: FailedCondition, detail: String },
    #[error("cannot replay this selection directly: {0}")]
    NotReplayable(&'static str),
    #[error("oracle budget exceeded: {needed} evaluations requested, cap is {cap}")]
    BudgetExceeded { needed: u128, cap: u128 },
}
