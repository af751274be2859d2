//! Rewrite rules: patterns, matching, side conditions and the catalog.

mod apply;
mod catalog;
mod pattern;
mod side;

pub use apply::{apply_form, apply_rule, approximate_match, approximate_match_rule, discharge_all, Direction};
pub use catalog::{catalog, find_rule, RewriteRule, RuleForm};
pub use pattern::{instantiate, instantiate_reduced, match_pattern, metas, Substitution};
pub use side::{discharge, infer_length, lengths_equal, DischargeResult, LengthExpr, SideCondition};

use thiserror::Error;

use crate::term::{Name, Path};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("pattern does not match")]
    NoMatch,
    #[error("metavariable ?{0} is not assigned")]
    UnboundMetavariable(Name),
    #[error("no consistent candidate assignment")]
    NoCandidate,
    #[error("side condition `{condition}` fails: {evidence}")]
    SideConditionFailed { condition: String, evidence: String },
    #[error("no subterm at path {0}")]
    BadPath(Path),
}
