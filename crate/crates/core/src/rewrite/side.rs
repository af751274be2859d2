//! Side conditions of rewrite rules and their automatic discharge.

use std::fmt;

use num_bigint::BigInt;

use crate::binding::{alpha_equal, free_vars};
use crate::eval::{eval, is_value, EvalResult};
use crate::premise::{self, Premise};
use crate::syntax::print_term;
use crate::term::{Name, Prim, Term, TermKind};

use super::pattern::{instantiate, Substitution};

#[derive(Clone, Debug)]
pub enum SideCondition {
    EqualLength(Term, Term),
    NotStuck(Term),
    /// The pattern binder (named as in the rule statement) does not occur
    /// free in the instantiated pattern.
    NotFree(Name, Term),
}

impl fmt::Display for SideCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SideCondition::EqualLength(a, b) => write!(f, "length {} = length {}", print_term(a), print_term(b)),
            SideCondition::NotStuck(a) => write!(f, "{} is not stuck", print_term(a)),
            SideCondition::NotFree(x, a) => write!(f, "{x} not free in {}", print_term(a)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DischargeResult {
    /// Holds, with a short replayable justification.
    Proven(String),
    NeedsPremise(Premise),
    /// Refuted, with the evidence.
    Failed(String),
}

/// Symbolic array length.
#[derive(Clone, Debug)]
pub enum LengthExpr {
    Literal(BigInt),
    /// An integer-valued term, e.g. the count given to `replicate`.
    Symbolic(Term),
    /// The length of an array term no axiom sees through.
    LengthOf(Term),
    Unknown,
}

impl PartialEq for LengthExpr {
    /// Equality as far as the axioms show; `Unknown` equals nothing.
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (LengthExpr::Literal(a), LengthExpr::Literal(b)) => a == b,
            (LengthExpr::Symbolic(a), LengthExpr::Symbolic(b)) => alpha_equal(a, b),
            (LengthExpr::LengthOf(a), LengthExpr::LengthOf(b)) => alpha_equal(a, b),
            _ => false,
        }
    }
}

impl fmt::Display for LengthExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthExpr::Literal(n) => write!(f, "{n}"),
            LengthExpr::Symbolic(t) => write!(f, "{}", print_term(t)),
            LengthExpr::LengthOf(t) => write!(f, "length {}", print_term(t)),
            LengthExpr::Unknown => write!(f, "?"),
        }
    }
}

/// Reads an integer term as a length.
fn int_as_length(n: &Term, premises: &[Premise]) -> LengthExpr {
    match n.kind() {
        TermKind::Int(k) => LengthExpr::Literal(k.clone()),
        TermKind::Prim(Prim::Length, a) => infer_length(&a[0], premises),
        _ => LengthExpr::Symbolic(n.clone()),
    }
}

/// Whether an integer term is provably non-negative.
fn non_negative(n: &Term) -> bool {
    match n.kind() {
        TermKind::Int(k) => *k >= BigInt::from(0),
        TermKind::Prim(Prim::Length, _) => true,
        _ => false,
    }
}

/// Symbolic length of an array term using the length axioms.
pub fn infer_length(t: &Term, premises: &[Premise]) -> LengthExpr {
    match t.kind() {
        TermKind::Prim(Prim::Replicate, a) => int_as_length(&a[0], premises),
        TermKind::Prim(Prim::Range, a) => match (a[0].as_int(), a[1].as_int()) {
            (Some(l), Some(h)) => LengthExpr::Literal(if h > l { h - l } else { BigInt::from(0) }),
            (Some(l), None) if *l == BigInt::from(0) && non_negative(&a[1]) => int_as_length(&a[1], premises),
            _ => LengthExpr::Unknown,
        },
        TermKind::Prim(Prim::Map, a) => infer_length(&a[1], premises),
        TermKind::Prim(Prim::Write, a) => infer_length(&a[0], premises),
        TermKind::Prim(Prim::Zip, a) => {
            if lengths_equal(&a[0], &a[1], premises) {
                infer_length(&a[0], premises)
            } else {
                LengthExpr::Unknown
            }
        }
        TermKind::Prim(Prim::List, items) => LengthExpr::Literal(BigInt::from(items.len())),
        TermKind::Prim(Prim::Group | Prim::Concat, _) => LengthExpr::Unknown,
        _ => LengthExpr::LengthOf(t.clone()),
    }
}

/// Equal lengths, by the axioms or by an explicit premise on any pair of
/// terms the axioms reduce the two sides to.
pub fn lengths_equal(a: &Term, b: &Term, premises: &[Premise]) -> bool {
    let (la, lb) = (infer_length_plain(a), infer_length_plain(b));
    if la == lb && la != LengthExpr::Unknown {
        return true;
    }
    let base = |t: &Term, l: &LengthExpr| match l {
        LengthExpr::LengthOf(x) => x.clone(),
        _ => t.clone(),
    };
    let (ba, bb) = (base(a, &la), base(b, &lb));
    premises.iter().any(|p| match p {
        Premise::EqualLength(x, y) => {
            let (x, y) = (base(x, &infer_length_plain(x)), base(y, &infer_length_plain(y)));
            (alpha_equal(&x, &ba) && alpha_equal(&y, &bb)) || (alpha_equal(&x, &bb) && alpha_equal(&y, &ba))
        }
        _ => false,
    })
}

/// Length axioms without premises (zip stays opaque).
fn infer_length_plain(t: &Term) -> LengthExpr {
    match t.kind() {
        TermKind::Prim(Prim::Zip, _) => LengthExpr::LengthOf(t.clone()),
        _ => infer_length(t, &[]),
    }
}

/// Discharges one side condition under `s`.
pub fn discharge(sc: &SideCondition, s: &Substitution, premises: &[Premise]) -> DischargeResult {
    let inst = |p: &Term| instantiate(p, s).expect("substitution covers the side condition");
    match sc {
        SideCondition::NotFree(x, p) => {
            let t = inst(p);
            if free_vars(&t).contains(x) && !matches!(p.kind(), TermKind::Meta(_)) {
                DischargeResult::Failed(format!("{x} is free in {}", print_term(&t)))
            } else {
                // Metavariables are never bound to terms mentioning the
                // pattern's binders, so freshness holds by construction.
                DischargeResult::Proven(format!("{x} not free in {}", print_term(&t)))
            }
        }
        SideCondition::NotStuck(p) => {
            let t = inst(p);
            let want = Premise::NotStuck(t.clone());
            if is_value(&t) {
                DischargeResult::Proven(format!("{} is a value", print_term(&t)))
            } else if premise::contains(premises, &want) {
                DischargeResult::Proven("assumed".into())
            } else if free_vars(&t).is_empty() {
                match eval(&t, crate::eval::DEFAULT_FUEL) {
                    EvalResult::Value(_) => DischargeResult::Proven(format!("{} evaluates to a value", print_term(&t))),
                    EvalResult::Stuck { reason, .. } => {
                        DischargeResult::Failed(format!("{} is stuck: {}", print_term(&t), reason.as_str()))
                    }
                    EvalResult::OutOfFuel => DischargeResult::NeedsPremise(want),
                }
            } else {
                DischargeResult::NeedsPremise(want)
            }
        }
        SideCondition::EqualLength(a, b) => {
            let (ta, tb) = (inst(a), inst(b));
            if lengths_equal(&ta, &tb, premises) {
                let la = infer_length(&ta, premises);
                return DischargeResult::Proven(format!("both lengths are {la}"));
            }
            if free_vars(&ta).is_empty() && free_vars(&tb).is_empty() {
                let len = |t: &Term| match eval(t, crate::eval::DEFAULT_FUEL) {
                    EvalResult::Value(v) => match v.kind() {
                        TermKind::Prim(Prim::List, xs) => Some(xs.len()),
                        _ => None,
                    },
                    _ => None,
                };
                if let (Some(x), Some(y)) = (len(&ta), len(&tb)) {
                    return if x == y {
                        DischargeResult::Proven(format!("both evaluate to length {x}"))
                    } else {
                        DischargeResult::Failed(format!("lengths {x} and {y}"))
                    };
                }
            }
            DischargeResult::NeedsPremise(Premise::EqualLength(ta, tb))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn sub(pairs: &[(&str, &str)]) -> Substitution {
        pairs.iter().map(|(m, v)| (Name::from(*m), t(v))).collect()
    }

    #[test]
    fn length_axioms() {
        assert_eq!(infer_length(&t("(replicate k 0)"), &[]), LengthExpr::Symbolic(t("k")));
        assert_eq!(infer_length(&t("(map f (write xs i v))"), &[]), LengthExpr::LengthOf(t("xs")));
        assert!(matches!(infer_length(&t("(group xs)"), &[]), LengthExpr::Unknown));
        assert_eq!(infer_length(&t("(range 0 (length xs))"), &[]), LengthExpr::LengthOf(t("xs")));
        assert!(matches!(infer_length(&t("(range 0 n)"), &[]), LengthExpr::Unknown));
        assert_eq!(infer_length(&t("(list 1 2 3)"), &[]), LengthExpr::Literal(3.into()));
    }

    #[test]
    fn zip_length_needs_the_premise() {
        let z = t("(zip xs ys)");
        assert!(matches!(infer_length(&z, &[]), LengthExpr::Unknown));
        let ps = [Premise::EqualLength(t("xs"), t("ys"))];
        assert_eq!(infer_length(&z, &ps), LengthExpr::LengthOf(t("xs")));
    }

    #[test]
    fn discharge_examples() {
        let s = sub(&[("f", "(lam x (add x 1))"), ("a", "a"), ("b", "b"), ("n", "n")]);
        let nf = SideCondition::NotFree(Name::from("acc"), t("?f"));
        assert!(matches!(discharge(&nf, &s, &[]), DischargeResult::Proven(_)));
        let el = SideCondition::EqualLength(t("(replicate ?n ?a)"), t("(replicate ?n ?b)"));
        assert!(matches!(discharge(&el, &s, &[]), DischargeResult::Proven(_)));
        let s = sub(&[("xs", "xs"), ("ys", "ys")]);
        let el = SideCondition::EqualLength(t("?xs"), t("?ys"));
        assert_eq!(
            discharge(&el, &s, &[]),
            DischargeResult::NeedsPremise(Premise::EqualLength(t("xs"), t("ys")))
        );
        let ps = [Premise::EqualLength(t("ys"), t("xs"))];
        assert!(matches!(discharge(&el, &s, &ps), DischargeResult::Proven(_)));
    }

    #[test]
    fn not_stuck_cases() {
        let ns = SideCondition::NotStuck(t("?g"));
        assert!(matches!(discharge(&ns, &sub(&[("g", "(lam x x)")]), &[]), DischargeResult::Proven(_)));
        assert!(matches!(discharge(&ns, &sub(&[("g", "g")]), &[]), DischargeResult::NeedsPremise(_)));
        assert!(matches!(
            discharge(&ns, &sub(&[("g", "(read (list) 0)")]), &[]),
            DischargeResult::Failed(_)
        ));
    }
}
