//! Matching terms against patterns with metavariables, and hole filling.

use std::collections::{BTreeMap, BTreeSet};

use crate::binding::{all_names, alpha_equal, free_vars, fresh_name, substitute};
use crate::norm;
use crate::term::{Name, Prim, Term, TermKind};

use super::RewriteError;

/// Metavariable assignment.
pub type Substitution = BTreeMap<Name, Term>;

/// Metavariables occurring in `p`.
pub fn metas(p: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_metas(p, &mut out);
    out
}

fn collect_metas(p: &Term, out: &mut BTreeSet<Name>) {
    if let TermKind::Meta(m) = p.kind() {
        out.insert(m.clone());
    }
    for c in p.children() {
        collect_metas(c, out);
    }
}

/// Whether `p` contains an application whose head is a metavariable.
fn has_higher_order(p: &Term) -> bool {
    if let Some((Prim::App, [f, _])) = p.as_prim() {
        if matches!(f.kind(), TermKind::Meta(_)) {
            return true;
        }
    }
    p.children().into_iter().any(has_higher_order)
}

/// Matches `p` against `t`. Metavariables never capture variables bound by
/// the pattern's own binders, except at `app(?F, A)` where `A` is built from
/// such variables: there `?F` becomes the abstraction of `t` over `A`.
pub fn match_pattern(p: &Term, t: &Term) -> Result<Substitution, RewriteError> {
    let mut s = Substitution::new();
    let ok = Matcher { s: &mut s, lenient: false, scope: Vec::new() }.go(p, t);
    if ok {
        Ok(s)
    } else {
        Err(RewriteError::NoMatch)
    }
}

/// Like [`match_pattern`] but higher-order spots whose argument still holds
/// unassigned metavariables are skipped, and assignments start from `seed`.
pub(crate) fn match_lenient(p: &Term, t: &Term, seed: &Substitution) -> Option<Substitution> {
    let mut s = seed.clone();
    Matcher { s: &mut s, lenient: true, scope: Vec::new() }.go(p, t).then_some(s)
}

struct Matcher<'a> {
    s: &'a mut Substitution,
    lenient: bool,
    /// (pattern binder, target binder), innermost last.
    scope: Vec<(Name, Name)>,
}

impl Matcher<'_> {
    fn captures(&self, t: &Term) -> bool {
        let fv = free_vars(t);
        self.scope.iter().any(|(_, y)| fv.contains(y))
    }

    fn assign(&mut self, m: &Name, t: &Term) -> bool {
        match self.s.get(m) {
            Some(old) => alpha_equal(old, t),
            None => {
                self.s.insert(m.clone(), t.clone());
                true
            }
        }
    }

    fn go(&mut self, p: &Term, t: &Term) -> bool {
        match (p.kind(), t.kind()) {
            (TermKind::Meta(m), _) => !self.captures(t) && self.assign(m, t),
            (TermKind::Var(x), TermKind::Var(y)) => {
                let i = self.scope.iter().rposition(|(a, _)| a == x);
                let j = self.scope.iter().rposition(|(_, b)| b == y);
                match (i, j) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (TermKind::Lam(x, b), TermKind::Lam(y, c)) => self.under(&[(x, y)], b, c),
            (TermKind::Case(s1, l1, a1, r1, b1), TermKind::Case(s2, l2, a2, r2, b2)) => {
                self.go(s1, s2) && self.under(&[(l1, l2)], a1, a2) && self.under(&[(r1, r2)], b1, b2)
            }
            (TermKind::Int(a), TermKind::Int(b)) => a == b,
            (TermKind::Bool(a), TermKind::Bool(b)) => a == b,
            (TermKind::Unit, TermKind::Unit) => true,
            (TermKind::Prim(Prim::App, pa), _) if matches!(pa[0].kind(), TermKind::Meta(_)) => {
                let snapshot = self.s.clone();
                if let Some((Prim::App, ta)) = t.as_prim() {
                    if self.go(&pa[0], &ta[0]) && self.go(&pa[1], &ta[1]) {
                        return true;
                    }
                    *self.s = snapshot;
                }
                let TermKind::Meta(f) = pa[0].kind() else { unreachable!() };
                self.higher_order(f, &pa[1], t)
            }
            (TermKind::Prim(p1, a1), TermKind::Prim(p2, a2)) => {
                if p1 != p2 || a1.len() != a2.len() {
                    return false;
                }
                // First-order children first so metavariables used inside
                // higher-order arguments are already known.
                let mut order: Vec<usize> = (0..a1.len()).collect();
                order.sort_by_key(|&k| has_higher_order(&a1[k]));
                order.into_iter().all(|k| self.go(&a1[k], &a2[k]))
            }
            _ => false,
        }
    }

    fn under(&mut self, bs: &[(&Name, &Name)], p: &Term, t: &Term) -> bool {
        let n = self.scope.len();
        self.scope.extend(bs.iter().map(|(a, b)| ((*a).clone(), (*b).clone())));
        let ok = self.go(p, t);
        self.scope.truncate(n);
        ok
    }

    /// The pattern argument with bound names renamed to the target's and
    /// known metavariables filled in. `None` if some are still unknown.
    fn target_arg(&self, a: &Term) -> Option<Term> {
        match a.kind() {
            TermKind::Meta(m) => self.s.get(m).cloned(),
            TermKind::Var(x) => {
                let y = match self.scope.iter().rposition(|(p, _)| p == x) {
                    Some(i) => self.scope[i].1.clone(),
                    None => x.clone(),
                };
                Some(Term::var(y))
            }
            TermKind::Lam(..) | TermKind::Case(..) => None,
            _ => {
                let kids = a.children().into_iter().map(|c| self.target_arg(c)).collect::<Option<Vec<_>>>()?;
                Some(a.with_children(kids))
            }
        }
    }

    fn higher_order(&mut self, f: &Name, arg: &Term, t: &Term) -> bool {
        let Some(a) = self.target_arg(arg) else {
            return self.lenient;
        };
        let mut leaves = Vec::new();
        let z = fresh_name(&Name::from("z"), |c| {
            all_names(t).contains(c) || all_names(&a).contains(c) || self.scope.iter().any(|(_, y)| y == c)
        });
        collect_leaves(&a, Term::var(z.clone()), &mut leaves);
        // Larger leaves first so `read(acc, i)` wins over `i`.
        leaves.sort_by_key(|(l, _)| std::cmp::Reverse(l.size()));
        let body = replace_leaves(t, &leaves, &mut Vec::new());
        let cand = Term::lam(z, body);
        !self.captures(&cand) && self.assign(f, &cand)
    }
}

fn collect_leaves(a: &Term, access: Term, out: &mut Vec<(Term, Term)>) {
    match a.as_prim() {
        Some((Prim::Pair, [l, r])) => {
            collect_leaves(l, Term::fst(access.clone()), out);
            collect_leaves(r, Term::snd(access), out);
        }
        _ => out.push((a.clone(), access)),
    }
}

fn replace_leaves(t: &Term, leaves: &[(Term, Term)], rebound: &mut Vec<Name>) -> Term {
    for (leaf, access) in leaves {
        if alpha_equal(t, leaf) && free_vars(leaf).iter().all(|v| !rebound.contains(v)) {
            return access.clone();
        }
    }
    match t.kind() {
        TermKind::Lam(x, b) => {
            rebound.push(x.clone());
            let b2 = replace_leaves(b, leaves, rebound);
            rebound.pop();
            Term::lam(x.clone(), b2)
        }
        TermKind::Case(s, l, a, r, b) => {
            let s2 = replace_leaves(s, leaves, rebound);
            rebound.push(l.clone());
            let a2 = replace_leaves(a, leaves, rebound);
            rebound.pop();
            rebound.push(r.clone());
            let b2 = replace_leaves(b, leaves, rebound);
            rebound.pop();
            Term::case(s2, l.clone(), a2, r.clone(), b2)
        }
        _ => {
            let kids = t.children().into_iter().map(|c| replace_leaves(c, leaves, rebound)).collect();
            t.with_children(kids)
        }
    }
}

/// Renames the pattern's binders away from `avoid`.
fn rename_binders(p: &Term, avoid: &BTreeSet<Name>) -> Term {
    let taken = |c: &Name| avoid.contains(c) || all_names(p).contains(c);
    match p.kind() {
        TermKind::Lam(x, b) => {
            let b = rename_binders(b, avoid);
            if avoid.contains(x) {
                let y = fresh_name(x, |c| taken(c) || all_names(&b).contains(c));
                Term::lam(y.clone(), substitute(&b, x, &Term::var(y)))
            } else {
                Term::lam(x.clone(), b)
            }
        }
        TermKind::Case(s, l, a, r, b) => {
            let s = rename_binders(s, avoid);
            let side = |x: &Name, body: &Term| {
                let body = rename_binders(body, avoid);
                if avoid.contains(x) {
                    let y = fresh_name(x, |c| taken(c) || all_names(&body).contains(c));
                    (y.clone(), substitute(&body, x, &Term::var(y)))
                } else {
                    (x.clone(), body)
                }
            };
            let (l, a) = side(l, a);
            let (r, b) = side(r, b);
            Term::case(s, l, a, r, b)
        }
        _ => p.with_children(p.children().into_iter().map(|c| rename_binders(c, avoid)).collect()),
    }
}

/// Fills the holes of `p`. Pattern binders are renamed where they would
/// capture free variables of the filled-in terms.
pub fn instantiate(p: &Term, s: &Substitution) -> Result<Term, RewriteError> {
    fill(p, s, false)
}

/// Like [`instantiate`], then reduces `app(?F, A)` sites where `?F` became a
/// lambda and the reduction is safe.
pub fn instantiate_reduced(p: &Term, s: &Substitution) -> Result<Term, RewriteError> {
    fill(p, s, true)
}

fn fill(p: &Term, s: &Substitution, reduce: bool) -> Result<Term, RewriteError> {
    for m in metas(p) {
        if !s.contains_key(&m) {
            return Err(RewriteError::UnboundMetavariable(m));
        }
    }
    let avoid: BTreeSet<Name> = s.values().flat_map(free_vars).collect();
    let p = rename_binders(p, &avoid);
    Ok(fill_in(&p, s, reduce))
}

fn fill_in(p: &Term, s: &Substitution, reduce: bool) -> Term {
    match p.kind() {
        TermKind::Meta(m) => s[m].clone(),
        TermKind::Prim(Prim::App, args) if reduce && matches!(args[0].kind(), TermKind::Meta(_)) => {
            let f = fill_in(&args[0], s, reduce);
            let a = fill_in(&args[1], s, reduce);
            let app = Term::app(f, a);
            reduce_site(&app)
        }
        _ => p.with_children(p.children().into_iter().map(|c| fill_in(c, s, reduce)).collect()),
    }
}

/// Beta-reduces an instantiated `app(λz.b, A)` and cleans up the
/// projections of `A`'s pairs that this creates.
fn reduce_site(app: &Term) -> Term {
    let Some((Prim::App, [f, a])) = app.as_prim() else {
        return app.clone();
    };
    let TermKind::Lam(z, body) = f.kind() else {
        return app.clone();
    };
    match norm::beta(z, body, a) {
        Some(r) => project_pairs(&r),
        None => app.clone(),
    }
}

fn project_pairs(t: &Term) -> Term {
    let kids: Vec<Term> = t.children().into_iter().map(project_pairs).collect();
    let t = t.with_children(kids);
    if let Some((p @ (Prim::Fst | Prim::Snd), [pr])) = t.as_prim() {
        if let Some((Prim::Pair, [a, b])) = pr.as_prim() {
            let (keep, drop) = if p == Prim::Fst { (a, b) } else { (b, a) };
            if norm::atomic_tree(drop) {
                return keep.clone();
            }
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn map_fusion_left_pattern() {
        let p = t("(map ?f (map ?g ?xs))");
        let s = match_pattern(&p, &t("(map (lam x (add x 1)) (map (lam x (mul x 2)) a))")).unwrap();
        assert!(alpha_equal(&s[&Name::from("f")], &t("(lam x (add x 1))")));
        assert!(alpha_equal(&s[&Name::from("g")], &t("(lam x (mul x 2))")));
        assert!(alpha_equal(&s[&Name::from("xs")], &t("a")));
        let r = instantiate(&t("(map (lam x (app ?f (app ?g x))) ?xs)"), &s).unwrap();
        let want = t("(map (lam x (app (lam y (add y 1)) (app (lam z (mul z 2)) x))) a)");
        assert!(alpha_equal(&r, &want), "{r}");
    }

    #[test]
    fn constructor_clash_and_inconsistent_repeat() {
        assert_eq!(match_pattern(&t("(fold ?f ?i ?xs)"), &t("(map f xs)")), Err(RewriteError::NoMatch));
        assert_eq!(match_pattern(&t("(zip ?xs ?xs)"), &t("(zip a b)")), Err(RewriteError::NoMatch));
        assert!(match_pattern(&t("(zip ?xs ?xs)"), &t("(zip a a)")).is_ok());
    }

    #[test]
    fn partial_substitution_is_unbound() {
        let p = t("(map ?f ?xs)");
        let mut s = Substitution::new();
        s.insert(Name::from("f"), t("f"));
        assert_eq!(instantiate(&p, &s), Err(RewriteError::UnboundMetavariable(Name::from("xs"))));
        assert_eq!(instantiate(&t("(add 1 2)"), &Substitution::new()).unwrap(), t("(add 1 2)"));
    }

    #[test]
    fn metas_do_not_capture_pattern_binders() {
        let p = t("(lam x ?body)");
        assert_eq!(match_pattern(&p, &t("(lam y (add y 1))")), Err(RewriteError::NoMatch));
        assert!(match_pattern(&p, &t("(lam y (add z 1))")).is_ok());
    }

    #[test]
    fn higher_order_site_abstracts_bound_components() {
        let p = t("(fold (lam (acc x) (app ?f (pair acc x))) ?i ?xs)");
        let target = t("(fold (lam (s e) (add s (mul e 2))) 0 ys)");
        let s = match_pattern(&p, &target).unwrap();
        assert!(alpha_equal(&s[&Name::from("f")], &t("(lam z (add (fst z) (mul (snd z) 2)))")));
        let back = instantiate_reduced(&p, &s).unwrap();
        assert!(alpha_equal(&back, &target), "{back}");
    }

    #[test]
    fn instantiation_avoids_capture() {
        let p = t("(lam x (add x ?e))");
        let mut s = Substitution::new();
        s.insert(Name::from("e"), t("x"));
        let r = instantiate(&p, &s).unwrap();
        assert!(alpha_equal(&r, &t("(lam y (add y x))")), "{r}");
    }
}
