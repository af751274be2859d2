//! Structural difference, widening and congruence.

use crate::binding::{alpha_equal, occurs_free, substitute};
use crate::term::{Name, Path, Term, TermKind};

use super::oracle::{Evidence, Verdict};
use super::EquivError;

#[derive(Clone, Debug)]
pub enum DiffResult {
    Identical,
    Differ { left: Term, right: Term, path: Path },
}

/// Renames binders of `q` to the names `p` uses at the same positions,
/// wherever that cannot capture.
pub fn align_binders(p: &Term, q: &Term) -> Term {
    match (p.kind(), q.kind()) {
        (TermKind::Lam(x, pb), TermKind::Lam(y, qb)) => {
            let (y, qb) = rename(qb, y, x);
            Term::lam(y, align_binders(pb, &qb))
        }
        (TermKind::Case(ps, pl, plb, pr, prb), TermKind::Case(qs, ql, qlb, qr, qrb)) => {
            let (ql, qlb) = rename(qlb, ql, pl);
            let (qr, qrb) = rename(qrb, qr, pr);
            Term::case(align_binders(ps, qs), ql, align_binders(plb, &qlb), qr, align_binders(prb, &qrb))
        }
        _ if p.same_head(q) && p.num_children() == q.num_children() => {
            let kids = p
                .children()
                .into_iter()
                .zip(q.children())
                .map(|(a, b)| align_binders(a, b))
                .collect();
            q.with_children(kids)
        }
        _ => q.clone(),
    }
}

/// The binder `from` of `body` renamed to `to`, unless `to` is free in
/// `body` and would be captured.
fn rename(body: &Term, from: &Name, to: &Name) -> (Name, Term) {
    if from == to || occurs_free(to, body) {
        return (from.clone(), body.clone());
    }
    (to.clone(), substitute(body, from, &Term::var(to.clone())))
}

/// Smallest pair of differing subterms. Differences under binders are
/// reported at the binding node, never at a bare lambda or branch body.
pub fn diff(p: &Term, q: &Term) -> DiffResult {
    let q = align_binders(p, q);
    match diff_path(p, &q, Path::root()) {
        None => DiffResult::Identical,
        Some(path) => DiffResult::Differ {
            left: p.subterm(&path).expect("path from p").clone(),
            right: q.subterm(&path).expect("path from q").clone(),
            path,
        },
    }
}

fn diff_path(p: &Term, q: &Term, here: Path) -> Option<Path> {
    if alpha_equal(p, q) {
        return None;
    }
    if !p.same_head(q) || p.num_children() != q.num_children() {
        return Some(here);
    }
    let differing: Vec<usize> = (0..p.num_children())
        .filter(|&i| !same_child(p, q, i))
        .collect();
    match differing.as_slice() {
        [] => Some(here),
        [k] => {
            let child = here.child(*k);
            let sub = diff_path(p.child(*k).unwrap(), q.child(*k).unwrap(), child.clone())?;
            let body = p.child(*k).unwrap();
            if sub == child && p.binder_of_child(*k).is_some() && !matches!(body.kind(), TermKind::Lam(..)) {
                Some(here)
            } else {
                Some(sub)
            }
        }
        _ => Some(here),
    }
}

/// Child equality in context: binder children are compared with their
/// binders, so `λx.x` and `λy.y` agree.
fn same_child(p: &Term, q: &Term, i: usize) -> bool {
    match (p.binder_of_child(i), q.binder_of_child(i)) {
        (Some(x), Some(y)) => alpha_equal(
            &Term::lam(x.clone(), p.child(i).unwrap().clone()),
            &Term::lam(y.clone(), q.child(i).unwrap().clone()),
        ),
        _ => alpha_equal(p.child(i).unwrap(), q.child(i).unwrap()),
    }
}

/// Whether replacing both subterms at `path` by one placeholder makes the
/// terms alpha-equal.
pub fn contexts_agree(p: &Term, q: &Term, path: &Path) -> bool {
    let hole = Term::meta("\u{25a1}");
    match (p.replace_at(path, hole.clone()), q.replace_at(path, hole)) {
        (Some(a), Some(b)) => alpha_equal(&a, &b),
        _ => false,
    }
}

/// One step toward the root.
pub fn widen(p: &Term, q: &Term, at: &Path) -> Result<(Term, Term, Path), EquivError> {
    let up = at.parent().ok_or(EquivError::AlreadyAtRoot)?;
    let a = p.subterm(&up).ok_or_else(|| EquivError::PathMismatch(at.clone()))?;
    let b = q.subterm(&up).ok_or_else(|| EquivError::PathMismatch(at.clone()))?;
    Ok((a.clone(), b.clone(), up))
}

/// Lifts a verdict about the subterms at `at` to `p` and `q`.
pub fn congruence_lift(child: Verdict, p: &Term, q: &Term, at: &Path) -> Result<Verdict, EquivError> {
    if p.subterm(at).is_none() || q.subterm(at).is_none() || !contexts_agree(p, q, at) {
        return Err(EquivError::PathMismatch(at.clone()));
    }
    Ok(match child {
        Verdict::Equivalent(e) => {
            let node = if at.is_root() {
                "root".to_string()
            } else {
                let parent = p.subterm(&at.parent().unwrap()).unwrap();
                head_name(parent)
            };
            Verdict::Equivalent(Evidence {
                method: "congruence".into(),
                detail: format!("{} at {at} lifted through {node}", e.method),
                tuples: e.tuples,
            })
        }
        other => other,
    })
}

fn head_name(t: &Term) -> String {
    match t.kind() {
        TermKind::Lam(..) => "lam".into(),
        TermKind::Case(..) => "case".into(),
        TermKind::Prim(p, _) => p.keyword().into(),
        _ => "leaf".into(),
    }
}
