//! Assumptions under which a local equivalence holds.

use std::fmt;

use crate::binding::alpha_equal;
use crate::syntax::print_term;
use crate::term::{Path, Term};

#[derive(Clone, Debug)]
pub enum Premise {
    /// Both arrays have the same length.
    EqualLength(Term, Term),
    /// The term evaluates to a value.
    NotStuck(Term),
    /// Both terms evaluate to the same value.
    ValueEqual(Term, Term),
    /// The coupling predicate relates the two loops found at `at`.
    CouplingHolds { predicate: Term, at: Path },
}

impl Premise {
    pub fn kind(&self) -> &'static str {
        match self {
            Premise::EqualLength(..) => "EqualLength",
            Premise::NotStuck(_) => "NotStuck",
            Premise::ValueEqual(..) => "ValueEqual",
            Premise::CouplingHolds { .. } => "CouplingHolds",
        }
    }

    /// The terms the premise talks about.
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Premise::EqualLength(a, b) | Premise::ValueEqual(a, b) => vec![a, b],
            Premise::NotStuck(a) => vec![a],
            Premise::CouplingHolds { predicate, .. } => vec![predicate],
        }
    }

    /// Equality up to alpha, treating the symmetric kinds as unordered.
    pub fn same(&self, other: &Premise) -> bool {
        match (self, other) {
            (Premise::EqualLength(a, b), Premise::EqualLength(c, d))
            | (Premise::ValueEqual(a, b), Premise::ValueEqual(c, d)) => {
                (alpha_equal(a, c) && alpha_equal(b, d)) || (alpha_equal(a, d) && alpha_equal(b, c))
            }
            (Premise::NotStuck(a), Premise::NotStuck(b)) => alpha_equal(a, b),
            (
                Premise::CouplingHolds { predicate: p, at: a },
                Premise::CouplingHolds { predicate: q, at: b },
            ) => a == b && alpha_equal(p, q),
            _ => false,
        }
    }
}

impl PartialEq for Premise {
    fn eq(&self, other: &Self) -> bool {
        self.same(other)
    }
}

impl fmt::Display for Premise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Premise::EqualLength(a, b) => write!(f, "EqualLength({}, {})", print_term(a), print_term(b)),
            Premise::NotStuck(a) => write!(f, "NotStuck({})", print_term(a)),
            Premise::ValueEqual(a, b) => write!(f, "ValueEqual({}, {})", print_term(a), print_term(b)),
            Premise::CouplingHolds { predicate, at } => {
                write!(f, "CouplingHolds({} at {at})", print_term(predicate))
            }
        }
    }
}

/// Whether `p` (or its symmetric twin) is in `ps`.
pub fn contains(ps: &[Premise], p: &Premise) -> bool {
    ps.iter().any(|q| q.same(p))
}
