//! Words over a finite gate set and the group they generate: enumeration,
//! exact gate complexity, Diophantine gaps, freeness and Cayley growth.

mod complexity;
mod diophantine;
mod enumerate;
mod gateset;
mod search;
mod word;

use num_rational::Ratio;
use thiserror::Error;

use crate::algebra::AlgebraError;

pub use complexity::{
    algebraic_target_scans, complexity_scaling_scan, distance_profile, gate_complexity, gate_complexity_mitm,
    rational_quaternion_target, Approximation, DistanceProfile, MitmApproximation, ScalingScan,
    ScanPoint, TargetScan,
};
pub use diophantine::{
    diophantine_report, fit_diophantine_constant, min_distance_to_targets, min_gaps,
    DiophantineReport, GapPoint, FLOOR_SLACK,
};
pub use enumerate::{
    cayley_growth, enumerate_group_elements, free_group_check, growth_comparison, CayleyShell,
    Collision, EnumerationBudget, FreeGroupCensus, GroupElement, GroupEnumeration,
    GrowthComparison,
};
pub use gateset::{build_local_gateset, build_su2_gateset, embed_gate, GateSet};
pub use word::Word;

#[derive(Debug, Error)]
pub enum WordError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("cos πα = {0} is excluded")]
    InvalidAngle(Ratio<i64>),
    #[error("duplicate gate label {0:?}")]
    DuplicateLabel(String),
    #[error("gate {0:?} equals ±1")]
    TrivialGate(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("{0} qubits exceeds the dense realization cap")]
    DimensionCap(usize),
    #[error("embedding index {j} outside 2..={d}")]
    IndexOutOfRange { j: usize, d: usize },
    #[error("budget of {limit} exceeded")]
    BudgetExceeded { limit: usize },
    #[error("no word of cost ≤ {max_cost} is within tolerance")]
    NotFound { max_cost: usize },
    #[error("degenerate fit")]
    FitDegenerate,
    #[error("need {needed} data points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("empty gate set")]
    EmptyGateSet,
    #[error("unknown gate index {0}")]
    UnknownGate(usize),
    #[error("integer overflow")]
    Overflow,
    #[error("{0}")]
    InvalidArgument(String),
}
