//! Behavior-preserving term simplification: let inlining, safe beta
//! reduction, projection of explicit pairs and integer constant folding.
//!
//! A reduction is safe when it cannot turn a stuck or diverging term into a
//! value or the other way round. Substituting atomic arguments is always
//! safe; any other argument is substituted only when it is used exactly once
//! in a position evaluated exactly once.

use crate::binding::{count_free, substitute};
use crate::term::{Name, Prim, Term, TermKind};

/// Variables, literals and projection chains of variables.
pub fn atomic(t: &Term) -> bool {
    match t.kind() {
        TermKind::Var(_) | TermKind::Int(_) | TermKind::Bool(_) | TermKind::Unit => true,
        TermKind::Prim(Prim::Fst | Prim::Snd, args) => projection_of_var(&args[0]),
        _ => false,
    }
}

fn projection_of_var(t: &Term) -> bool {
    match t.kind() {
        TermKind::Var(_) => true,
        TermKind::Prim(Prim::Fst | Prim::Snd, args) => projection_of_var(&args[0]),
        _ => false,
    }
}

/// Pair trees whose leaves are atomic.
pub fn atomic_tree(t: &Term) -> bool {
    match t.as_prim() {
        Some((Prim::Pair, [a, b])) => atomic_tree(a) && atomic_tree(b),
        _ => atomic(t),
    }
}

/// Whether the single free occurrence of `x` in `t` is evaluated exactly
/// once whenever `t` is.
pub fn strict_occurrence(x: &Name, t: &Term) -> bool {
    match t.kind() {
        TermKind::Var(y) => y == x,
        TermKind::Lam(..) | TermKind::Meta(_) | TermKind::Int(_) | TermKind::Bool(_) | TermKind::Unit => false,
        TermKind::Case(s, ..) => count_free(x, s) == 1 && strict_occurrence(x, s),
        TermKind::Prim(p, args) => {
            let Some(k) = args.iter().position(|a| count_free(x, a) == 1) else {
                return false;
            };
            match (p, k) {
                (Prim::If, 1 | 2) | (Prim::Map, 0) => false,
                (Prim::App, 0) => match args[0].kind() {
                    TermKind::Lam(y, body) => y != x && strict_occurrence(x, body),
                    _ => strict_occurrence(x, &args[0]),
                },
                _ => strict_occurrence(x, &args[k]),
            }
        }
    }
}

/// Safe beta reduction of `app(λx.body, e)`. A pair argument whose parts
/// are only reached through projections is split, and each part is
/// substituted on its own terms.
pub fn beta(x: &Name, body: &Term, e: &Term) -> Option<Term> {
    let n = count_free(x, body);
    if atomic_tree(e) || (n == 1 && strict_occurrence(x, body)) {
        return Some(substitute(body, x, e));
    }
    if !matches!(e.as_prim(), Some((Prim::Pair, _))) {
        return None;
    }
    let mut leaves = Vec::new();
    pair_leaves(e, Vec::new(), &mut leaves);
    let taken: std::collections::BTreeSet<Name> =
        crate::binding::all_names(body).into_iter().chain(crate::binding::all_names(e)).collect();
    let mut names: Vec<Name> = Vec::new();
    for _ in &leaves {
        let v = crate::binding::fresh_name(&Name::from("v"), |c| taken.contains(c) || names.contains(c));
        names.push(v);
    }
    let split = split_projections(body, x, &leaves, &names)?;
    let mut out = split;
    for ((_, leaf), v) in leaves.iter().zip(&names) {
        if atomic(leaf) || (count_free(v, &out) == 1 && strict_occurrence(v, &out)) {
            out = substitute(&out, v, leaf);
        } else {
            return None;
        }
    }
    Some(out)
}

/// Leaves of a pair tree with their projection paths (false = fst).
fn pair_leaves(e: &Term, path: Vec<bool>, out: &mut Vec<(Vec<bool>, Term)>) {
    match e.as_prim() {
        Some((Prim::Pair, [a, b])) => {
            let mut pa = path.clone();
            pa.push(false);
            pair_leaves(a, pa, out);
            let mut pb = path;
            pb.push(true);
            pair_leaves(b, pb, out);
        }
        _ => out.push((path, e.clone())),
    }
}

/// Replaces each full projection path of `x` by the matching name. Fails if
/// `x` occurs any other way.
fn split_projections(t: &Term, x: &Name, leaves: &[(Vec<bool>, Term)], names: &[Name]) -> Option<Term> {
    let mut path = Vec::new();
    let mut cur = t;
    loop {
        match cur.as_prim() {
            Some((Prim::Fst, [a])) => {
                path.push(false);
                cur = a;
            }
            Some((Prim::Snd, [a])) => {
                path.push(true);
                cur = a;
            }
            _ => break,
        }
    }
    if cur.as_var() == Some(x) {
        path.reverse();
        let k = leaves.iter().position(|(p, _)| *p == path)?;
        return Some(Term::var(names[k].clone()));
    }
    match t.kind() {
        TermKind::Var(y) if y == x => None,
        TermKind::Lam(y, _) if y == x => Some(t.clone()),
        TermKind::Case(s, l, a, r, b) => {
            let s = split_projections(s, x, leaves, names)?;
            let a = if l == x { a.clone() } else { split_projections(a, x, leaves, names)? };
            let b = if r == x { b.clone() } else { split_projections(b, x, leaves, names)? };
            Some(Term::case(s, l.clone(), a, r.clone(), b))
        }
        _ => {
            let kids =
                t.children().into_iter().map(|c| split_projections(c, x, leaves, names)).collect::<Option<Vec<_>>>()?;
            Some(t.with_children(kids))
        }
    }
}

/// Tries one reduction at the root of `t`.
fn step(t: &Term) -> Option<Term> {
    let TermKind::Prim(p, args) = t.kind() else {
        return None;
    };
    match (p, args.as_slice()) {
        (Prim::App, [f, e]) => {
            let TermKind::Lam(x, body) = f.kind() else {
                return None;
            };
            beta(x, body, e)
        }
        (Prim::Fst | Prim::Snd, [pr]) => match pr.as_prim() {
            Some((Prim::Pair, [a, b])) => {
                let (keep, drop) = if *p == Prim::Fst { (a, b) } else { (b, a) };
                atomic_tree(drop).then(|| keep.clone())
            }
            _ => None,
        },
        (Prim::Add | Prim::Sub | Prim::Mul, [a, b]) => {
            let (x, y) = (a.as_int()?, b.as_int()?);
            Some(Term::int(match p {
                Prim::Add => x + y,
                Prim::Sub => x - y,
                _ => x * y,
            }))
        }
        (Prim::Lt | Prim::Gt, [a, b]) => {
            let (x, y) = (a.as_int()?, b.as_int()?);
            Some(Term::bool(if *p == Prim::Lt { x < y } else { x > y }))
        }
        (Prim::If, [c, a, b]) => match c.kind() {
            TermKind::Bool(true) => Some(a.clone()),
            TermKind::Bool(false) => Some(b.clone()),
            _ => None,
        },
        _ => None,
    }
}

/// Bottom-up normalization with the safe reductions above.
pub fn normalize(t: &Term) -> Term {
    let kids: Vec<Term> = t.children().into_iter().map(normalize).collect();
    let t = t.with_children(kids);
    match step(&t) {
        Some(r) => normalize(&r),
        None => t,
    }
}

/// Inlines `let` bindings (applied lambdas) only; nothing else changes.
pub fn inline_lets(t: &Term) -> Term {
    let kids: Vec<Term> = t.children().into_iter().map(inline_lets).collect();
    let t = t.with_children(kids);
    if let Some((Prim::App, [f, e])) = t.as_prim() {
        if let TermKind::Lam(x, body) = f.kind() {
            if atomic(e) || (count_free(x, body) == 1 && strict_occurrence(x, body)) {
                return inline_lets(&substitute(body, x, e));
            }
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binding::alpha_equal;
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn beta_with_pair_argument_projects() {
        let r = normalize(&t("(app (lam z (add (fst z) (snd z))) (pair a b))"));
        assert!(alpha_equal(&r, &t("(add a b)")));
    }

    #[test]
    fn duplicating_a_computation_is_refused() {
        let src = t("(app (lam z (add z z)) (read xs 0))");
        assert_eq!(normalize(&src), src);
    }

    #[test]
    fn discarding_a_computation_is_refused() {
        let src = t("(fst (pair 1 (read xs 9)))");
        assert_eq!(normalize(&src), src);
        assert!(alpha_equal(&normalize(&t("(fst (pair (read xs 9) 1))")), &t("(read xs 9)")));
    }

    #[test]
    fn pair_argument_splits() {
        let r = normalize(&t("(app (lam z (add (fst z) (snd z))) (pair a (mul b 2)))"));
        assert!(alpha_equal(&r, &t("(add a (mul b 2))")), "{r}");
        let src = t("(app (lam z (add (snd z) (snd z))) (pair a (mul b 2)))");
        assert_eq!(normalize(&src), src);
    }

    #[test]
    fn constants_fold() {
        assert!(alpha_equal(&normalize(&t("(if (lt 1 2) (add 2 3) x)")), &t("5")));
    }

    #[test]
    fn branch_use_is_not_strict() {
        let src = t("(app (lam z (if c z 0)) (read xs 0))");
        assert_eq!(inline_lets(&src), src);
    }
}
