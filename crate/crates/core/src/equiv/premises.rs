//! Guessing the assumptions a failed local check was missing.

use crate::binding::substitute_closed;
use crate::eval::{eval, EvalResult};
use crate::premise::Premise;
use crate::term::{Name, Term};
use crate::types::Type;

use super::oracle::Counterexample;

const MAX_CANDIDATES: usize = 8;

/// Variables and their projections down to `depth` pair levels.
pub fn components(scope: &[(Name, Type)], depth: usize) -> Vec<(Term, Type)> {
    fn go(t: Term, ty: &Type, depth: usize, out: &mut Vec<(Term, Type)>) {
        out.push((t.clone(), ty.clone()));
        if let (Type::Prod(a, b), true) = (ty, depth > 0) {
            go(Term::fst(t.clone()), a, depth - 1, out);
            go(Term::snd(t), b, depth - 1, out);
        }
    }
    let mut out = Vec::new();
    for (x, ty) in scope {
        go(Term::var(x.clone()), ty, depth, &mut out);
    }
    out
}

fn value_in(cex: &Counterexample, t: &Term) -> Option<Term> {
    match eval(&substitute_closed(t, &cex.inputs), 10_000) {
        EvalResult::Value(v) => Some(v),
        _ => None,
    }
}

fn list_len(t: &Term) -> Option<usize> {
    match t.as_prim() {
        Some((crate::term::Prim::List, items)) => Some(items.len()),
        _ => None,
    }
}

/// Candidate premises in schema order: `EqualLength` over array
/// components whose lengths differ in the counterexample, `NotStuck` over
/// function components, then `ValueEqual` over same-typed components that
/// differ in the counterexample.
pub fn premise_candidates(cex: &Counterexample, scope: &[(Name, Type)]) -> Vec<Premise> {
    let comps = components(scope, 3);
    let vals: Vec<Option<Term>> = comps.iter().map(|(t, _)| value_in(cex, t)).collect();
    let mut out = Vec::new();
    for i in 0..comps.len() {
        for j in i + 1..comps.len() {
            if !comps[i].1.is_list() || !comps[j].1.is_list() {
                continue;
            }
            let (Some(a), Some(b)) = (&vals[i], &vals[j]) else { continue };
            if list_len(a) != list_len(b) {
                out.push(Premise::EqualLength(comps[i].0.clone(), comps[j].0.clone()));
            }
        }
    }
    for (t, ty) in &comps {
        if matches!(ty, Type::Arrow(..)) {
            out.push(Premise::NotStuck(t.clone()));
        }
    }
    let mut value_eq = 0;
    for i in 0..comps.len() {
        for j in i + 1..comps.len() {
            if value_eq == 4 {
                break;
            }
            if comps[i].1 != comps[j].1 || matches!(comps[i].1, Type::Arrow(..)) {
                continue;
            }
            let (Some(a), Some(b)) = (&vals[i], &vals[j]) else { continue };
            if !crate::binding::alpha_equal(a, b) {
                out.push(Premise::ValueEqual(comps[i].0.clone(), comps[j].0.clone()));
                value_eq += 1;
            }
        }
    }
    out.truncate(MAX_CANDIDATES);
    out
}

/// The shortest prefix of the candidates under which `recheck` succeeds,
/// or nothing if no prefix does.
pub fn add_missing_premises(
    cex: &Counterexample,
    scope: &[(Name, Type)],
    recheck: &mut dyn FnMut(&[Premise]) -> bool,
) -> Vec<Premise> {
    let cands = premise_candidates(cex, scope);
    for k in 1..=cands.len() {
        if recheck(&cands[..k]) {
            return cands[..k].to_vec();
        }
    }
    Vec::new()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::grid::InputGrid;
    use crate::equiv::oracle::{bounded_equiv, Verdict};
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn zip_needs_equal_lengths() {
        let scope = vec![(Name::from("xs"), Type::list(Type::Int)), (Name::from("ys"), Type::list(Type::Int))];
        let p = t("(map (lam q (add (fst q) (snd q))) (zip xs ys))");
        let q = t("(map (lam i (add (read xs i) (read ys i))) (range 0 (length xs)))");
        let g = InputGrid::default().with_len(2);
        let Verdict::NotEquivalent(cex) = bounded_equiv(&p, &q, &scope, &g, &[]).unwrap() else { panic!() };
        let ps = add_missing_premises(&cex, &scope, &mut |ps| {
            bounded_equiv(&p, &q, &scope, &g, ps).unwrap().is_equivalent()
        });
        assert_eq!(ps, vec![Premise::EqualLength(t("xs"), t("ys"))]);
    }

    #[test]
    fn inequivalent_pair_gets_nothing() {
        let scope = vec![(Name::from("x"), Type::Int), (Name::from("y"), Type::Int)];
        let (p, q) = (t("(sub x y)"), t("(add (sub x y) 1)"));
        let g = InputGrid::default();
        let Verdict::NotEquivalent(cex) = bounded_equiv(&p, &q, &scope, &g, &[]).unwrap() else { panic!() };
        let ps = add_missing_premises(&cex, &scope, &mut |ps| {
            bounded_equiv(&p, &q, &scope, &g, ps).unwrap().is_equivalent()
        });
        assert!(ps.is_empty());
    }

    #[test]
    fn projections_are_components() {
        let scope = vec![(Name::from("p"), Type::prod(Type::Int, Type::list(Type::Int)))];
        let c: Vec<String> = components(&scope, 3).iter().map(|(t, _)| t.to_string()).collect();
        assert_eq!(c, ["p", "(fst p)", "(snd p)"]);
    }
}
