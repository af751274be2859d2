//! Equivalence checking at desk scale: structural diff, the bounded
//! oracle, coupling checks, premise guessing and the proof strategy.

mod coupling;
mod diff;
mod grid;
mod oracle;
mod premises;
mod strategy;

pub use coupling::{check_fold_coupling, check_iter_coupling};
pub use diff::{align_binders, congruence_lift, contexts_agree, diff, widen, DiffResult};
pub use grid::{graphs_upto, int_order, lists_over, Enumerator, InputGrid, ParamDomain, ScopeVar, TupleSpace};
pub use oracle::{bounded_equiv, Counterexample, Evidence, Inconclusive, Verdict};
pub use premises::{add_missing_premises, components, premise_candidates};
pub use strategy::{prove_equivalent, Hint, PremiseRecord, PremiseStatus, ProofReport, ReportStep};

use thiserror::Error;

use crate::term::Path;
use crate::types::{Type, TypeError};

#[derive(Clone, Debug, Error)]
pub enum EquivError {
    #[error("the terms have different types: {left} vs {right}")]
    TypeMismatch { left: Type, right: Type },
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("the terms differ outside path {0}")]
    PathMismatch(Path),
    #[error("already at the root")]
    AlreadyAtRoot,
}
