//! Exact lattice reduction and the reduction step for small linear forms in
//! logarithms.

mod approx;
mod basis;
mod deweger;
mod lll;
mod pipeline;

use thiserror::Error;

use crate::analytic::AnalyticError;
use crate::bounds::BoundsError;

pub use approx::{
    build_lattice, is_multiplicative_relation, EliminatedRelation, Generator, LinearForm,
    RELATION_ENTRY_CAP,
};
pub use basis::{determinant, gram_schmidt, solve, GramSchmidtData, LatticeBasis};
pub use deweger::{c1_lower_bound, deweger_bound, s_and_t, C1Bound, DewegerOutcome, SigmaCase};
pub use lll::{apply_transform, is_reduced, lll_reduce, ReducedBasis};
pub use pipeline::{
    large_k_generators, reduce_form, reduce_large_k_case, reduce_small_k_case, scale_for,
    small_k_generators, small_k_sweep, LargeKChain, LargeKConfig, LargeKRound,
    ReductionCertificate, ReductionConfig, SmallKConfig, SmallKSweep,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("basis vectors are linearly dependent")]
    Rank,
    #[error("bad parameter: {0}")]
    Parameter(String),
    #[error("post-check failed: {0}")]
    PostCheck(&'static str),
    #[error("floor of C·η_{index} is not determined by its enclosure")]
    AmbiguousFloor { index: usize },
    #[error("c1² < T² + S after {} attempts (last C has {} digits)", .0.attempts, .0.c.to_string().len())]
    HypothesisFailed(Box<ReductionCertificate>),
    #[error("k bound did not decrease after round {}", .0.rounds.len())]
    Divergence(Box<LargeKChain>),
    #[error("k bound still {} after {} rounds", .0.final_k_bound(), .0.rounds.len())]
    RoundLimit(Box<LargeKChain>),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}
