//! Free variables, capture-avoiding substitution and alpha-equivalence.

use std::collections::BTreeSet;

use crate::term::{Name, Term, TermKind};

pub type VarSet = BTreeSet<Name>;

pub fn free_vars(t: &Term) -> VarSet {
    let mut out = VarSet::new();
    let mut bound = Vec::new();
    collect_free(t, &mut bound, &mut out);
    out
}

fn collect_free(t: &Term, bound: &mut Vec<Name>, out: &mut VarSet) {
    match t.kind() {
        TermKind::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        TermKind::Lam(x, b) => {
            bound.push(x.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
        TermKind::Case(s, l, lb, r, rb) => {
            collect_free(s, bound, out);
            bound.push(l.clone());
            collect_free(lb, bound, out);
            bound.pop();
            bound.push(r.clone());
            collect_free(rb, bound, out);
            bound.pop();
        }
        _ => {
            for c in t.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

pub fn occurs_free(x: &Name, t: &Term) -> bool {
    match t.kind() {
        TermKind::Var(y) => x == y,
        TermKind::Lam(y, b) => y != x && occurs_free(x, b),
        TermKind::Case(s, l, lb, r, rb) => {
            occurs_free(x, s) || (l != x && occurs_free(x, lb)) || (r != x && occurs_free(x, rb))
        }
        _ => t.children().into_iter().any(|c| occurs_free(x, c)),
    }
}

/// Number of free occurrences of `x`.
pub fn count_free(x: &Name, t: &Term) -> usize {
    match t.kind() {
        TermKind::Var(y) => usize::from(x == y),
        TermKind::Lam(y, b) => {
            if y == x {
                0
            } else {
                count_free(x, b)
            }
        }
        TermKind::Case(s, l, lb, r, rb) => {
            count_free(x, s)
                + if l == x { 0 } else { count_free(x, lb) }
                + if r == x { 0 } else { count_free(x, rb) }
        }
        _ => t.children().into_iter().map(|c| count_free(x, c)).sum(),
    }
}

/// Every name appearing in `t`, bound or free.
pub fn all_names(t: &Term) -> VarSet {
    let mut out = VarSet::new();
    fn go(t: &Term, out: &mut VarSet) {
        match t.kind() {
            TermKind::Var(x) => {
                out.insert(x.clone());
            }
            TermKind::Lam(x, _) => {
                out.insert(x.clone());
            }
            TermKind::Case(_, l, _, r, _) => {
                out.insert(l.clone());
                out.insert(r.clone());
            }
            _ => {}
        }
        for c in t.children() {
            go(c, out);
        }
    }
    go(t, &mut out);
    out
}

/// Appends primes to `base` until `taken` rejects the candidate.
pub fn fresh_name(base: &Name, taken: impl Fn(&Name) -> bool) -> Name {
    let mut candidate = base.clone();
    while taken(&candidate) {
        candidate = Name::new(format!("{candidate}'"));
    }
    candidate
}

/// Capture-avoiding `t[v/x]`.
pub fn substitute(t: &Term, x: &Name, v: &Term) -> Term {
    let fv = free_vars(v);
    subst_with(t, x, v, &fv)
}

fn subst_with(t: &Term, x: &Name, v: &Term, fv_v: &VarSet) -> Term {
    if !occurs_free(x, t) {
        return t.clone();
    }
    match t.kind() {
        TermKind::Var(_) => v.clone(),
        TermKind::Lam(y, b) => {
            let (y2, b2) = rename_if_captured(y, b, x, fv_v);
            Term::lam(y2, subst_with(&b2, x, v, fv_v))
        }
        TermKind::Case(s, l, lb, r, rb) => {
            let s2 = subst_with(s, x, v, fv_v);
            let (l2, lb2) = if l == x {
                (l.clone(), lb.clone())
            } else {
                let (l2, lb2) = rename_if_captured(l, lb, x, fv_v);
                let lb3 = subst_with(&lb2, x, v, fv_v);
                (l2, lb3)
            };
            let (r2, rb2) = if r == x {
                (r.clone(), rb.clone())
            } else {
                let (r2, rb2) = rename_if_captured(r, rb, x, fv_v);
                let rb3 = subst_with(&rb2, x, v, fv_v);
                (r2, rb3)
            };
            Term::case(s2, l2, lb2, r2, rb2)
        }
        _ => {
            let kids = t
                .children()
                .into_iter()
                .map(|c| subst_with(c, x, v, fv_v))
                .collect();
            t.with_children(kids)
        }
    }
}

fn rename_if_captured(y: &Name, body: &Term, x: &Name, fv_v: &VarSet) -> (Name, Term) {
    if fv_v.contains(y) && occurs_free(x, body) {
        let fv_b = free_vars(body);
        let y2 = fresh_name(y, |c| fv_v.contains(c) || fv_b.contains(c) || c == x);
        let body2 = substitute(body, y, &Term::var(y2.clone()));
        (y2, body2)
    } else {
        (y.clone(), body.clone())
    }
}

/// Simultaneous substitution of closed terms. No capture can occur because
/// the replacements have no free variables.
pub fn substitute_closed(t: &Term, env: &[(Name, Term)]) -> Term {
    if env.is_empty() {
        return t.clone();
    }
    match t.kind() {
        TermKind::Var(y) => env
            .iter()
            .rev()
            .find(|(n, _)| n == y)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| t.clone()),
        TermKind::Lam(y, b) => {
            let inner: Vec<_> = env.iter().filter(|(n, _)| n != y).cloned().collect();
            Term::lam(y.clone(), substitute_closed(b, &inner))
        }
        TermKind::Case(s, l, lb, r, rb) => {
            let le: Vec<_> = env.iter().filter(|(n, _)| n != l).cloned().collect();
            let re: Vec<_> = env.iter().filter(|(n, _)| n != r).cloned().collect();
            Term::case(
                substitute_closed(s, env),
                l.clone(),
                substitute_closed(lb, &le),
                r.clone(),
                substitute_closed(rb, &re),
            )
        }
        _ if t.num_children() == 0 => t.clone(),
        _ => t.with_children(
            t.children()
                .into_iter()
                .map(|c| substitute_closed(c, env))
                .collect(),
        ),
    }
}

/// Equality up to consistent renaming of bound variables. Compares
/// variables by binder depth (de Bruijn position) when bound and by name
/// when free.
pub fn alpha_equal(a: &Term, b: &Term) -> bool {
    let mut sa = Vec::new();
    let mut sb = Vec::new();
    alpha_eq_in(a, b, &mut sa, &mut sb)
}

/// Alpha-equality with given enclosing binder stacks (innermost last).
pub fn alpha_eq_in(a: &Term, b: &Term, sa: &mut Vec<Name>, sb: &mut Vec<Name>) -> bool {
    if Term::ptr_eq(a, b) && sa == sb {
        return true;
    }
    match (a.kind(), b.kind()) {
        (TermKind::Var(x), TermKind::Var(y)) => {
            let ix = sa.iter().rposition(|n| n == x);
            let iy = sb.iter().rposition(|n| n == y);
            match (ix, iy) {
                (Some(i), Some(j)) => sa.len() - i == sb.len() - j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (TermKind::Lam(x, ba), TermKind::Lam(y, bb)) => {
            sa.push(x.clone());
            sb.push(y.clone());
            let r = alpha_eq_in(ba, bb, sa, sb);
            sa.pop();
            sb.pop();
            r
        }
        (TermKind::Case(s1, l1, lb1, r1, rb1), TermKind::Case(s2, l2, lb2, r2, rb2)) => {
            if !alpha_eq_in(s1, s2, sa, sb) {
                return false;
            }
            sa.push(l1.clone());
            sb.push(l2.clone());
            let ok = alpha_eq_in(lb1, lb2, sa, sb);
            sa.pop();
            sb.pop();
            if !ok {
                return false;
            }
            sa.push(r1.clone());
            sb.push(r2.clone());
            let ok = alpha_eq_in(rb1, rb2, sa, sb);
            sa.pop();
            sb.pop();
            ok
        }
        (TermKind::Prim(p, xs), TermKind::Prim(q, ys)) => {
            p == q
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| alpha_eq_in(x, y, sa, sb))
        }
        (ka, kb) => ka == kb,
    }
}

/// Nameless rendering: bound variables become `#k` (distance to binder),
/// binder names are dropped. Two terms are alpha-equal iff their nameless
/// forms are equal.
pub fn nameless(t: &Term) -> String {
    let mut out = String::new();
    let mut stack = Vec::new();
    fn go(t: &Term, stack: &mut Vec<Name>, out: &mut String) {
        match t.kind() {
            TermKind::Var(x) => match stack.iter().rposition(|n| n == x) {
                Some(i) => out.push_str(&format!("#{}", stack.len() - 1 - i)),
                None => out.push_str(x.as_str()),
            },
            TermKind::Meta(m) => {
                out.push('?');
                out.push_str(m.as_str());
            }
            TermKind::Int(i) => out.push_str(&i.to_string()),
            TermKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            TermKind::Unit => out.push_str("unit"),
            TermKind::Lam(x, b) => {
                out.push_str("(lam ");
                stack.push(x.clone());
                go(b, stack, out);
                stack.pop();
                out.push(')');
            }
            TermKind::Case(s, l, lb, r, rb) => {
                out.push_str("(case ");
                go(s, stack, out);
                out.push(' ');
                stack.push(l.clone());
                go(lb, stack, out);
                stack.pop();
                out.push(' ');
                stack.push(r.clone());
                go(rb, stack, out);
                stack.pop();
                out.push(')');
            }
            TermKind::Prim(p, args) => {
                out.push('(');
                out.push_str(p.keyword());
                for a in args {
                    out.push(' ');
                    go(a, stack, out);
                }
                out.push(')');
            }
        }
    }
    go(t, &mut stack, &mut out);
    out
}
