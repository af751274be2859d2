use ffl_core::equiv::{contexts_agree, diff, DiffResult};
use ffl_core::notation::render_pair;
use ffl_core::syntax::parse_term;
use ffl_core::{Path, Term, TermKind};

use super::gen::Gen;
use crate::fixture;

const WANT: &str = "(λ(x,y).x+y, λ(x,y).y+x)";

/// Whether the subterm at `at` is the body of a binder and not itself a
/// lambda; diff never reports such positions, it moves up to the binder.
fn binder_body(p: &Term, at: &Path) -> bool {
    let (Some(parent), Some(&k)) = (at.parent(), at.0.last()) else {
        return false;
    };
    let node = p.subterm(&parent).unwrap();
    node.binder_of_child(k).is_some() && !matches!(p.subterm(at).unwrap().kind(), TermKind::Lam(..))
}

/// Whether `path` is a minimal differing position of `p` and `q`: the
/// contexts agree there, and at no reportable position below it.
fn minimal(p: &Term, q: &Term, path: &Path) -> Result<(), String> {
    if !contexts_agree(p, q, path) {
        return Err(format!("contexts differ outside {path}"));
    }
    if binder_body(p, path) {
        return Err(format!("{path} is a bare binder body"));
    }
    for rel in p.subterm(path).unwrap().paths() {
        if rel.is_root() {
            continue;
        }
        let below = Path(path.0.iter().chain(&rel.0).copied().collect());
        if contexts_agree(p, q, &below) && !binder_body(p, &below) {
            return Err(format!("{below} below {path} already isolates the difference"));
        }
    }
    Ok(())
}

pub fn run() -> Result<String, String> {
    let p = parse_term(&fixture("diff/fold_add.ffl")).unwrap();
    let q = parse_term(&fixture("diff/fold_add_commuted.ffl")).unwrap();
    let DiffResult::Differ { left, right, .. } = diff(&p, &q) else {
        return Err("fold pair reported identical".into());
    };
    let shown = render_pair(&left, &right);
    if shown != WANT {
        return Err(format!("rendered {shown}, expected {WANT}"));
    }

    let mut pairs = 0;
    let mut seed = 0u64;
    while pairs < 200 {
        seed += 1;
        let mut g = Gen::new(seed);
        let ty = g.ty();
        let p = g.term(ty, 4);
        let mut q = p.clone();
        for _ in 0..1 + g.below(2) {
            let paths = q.paths();
            let at = paths[g.below(paths.len())].clone();
            let ty = g.ty();
            let new = g.term(ty, 2);
            q = q.replace_at(&at, new).unwrap();
        }
        let DiffResult::Differ { left, path, .. } = diff(&p, &q) else {
            continue;
        };
        if !ffl_core::binding::alpha_equal(&left, p.subterm(&path).unwrap()) {
            return Err(format!("seed {seed}: left side is not the subterm at {path}"));
        }
        minimal(&p, &q, &path).map_err(|e| format!("seed {seed}: {p} vs {q}: {e}"))?;
        pairs += 1;
    }
    Ok(format!("{shown}\n{pairs} mutation pairs minimal"))
}
