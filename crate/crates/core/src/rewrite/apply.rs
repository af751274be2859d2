use crate::binding::alpha_equal;
use crate::norm::normalize;
use crate::premise::Premise;
use crate::term::{Path, Term};

use super::catalog::{RewriteRule, RuleForm};
use super::pattern::{instantiate_reduced, match_lenient, match_pattern, metas, Substitution};
use super::side::{discharge, DischargeResult};
use super::RewriteError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

impl Direction {
    pub fn patterns<'a>(self, f: &'a RuleForm) -> (&'a Term, &'a Term) {
        match self {
            Direction::LeftToRight => (&f.left, &f.right),
            Direction::RightToLeft => (&f.right, &f.left),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::LeftToRight => "ltr",
            Direction::RightToLeft => "rtl",
        }
    }
}

/// Discharges all side conditions of `form`. Conditions that need an
/// assumption come back as premises.
pub fn discharge_all(
    form: &RuleForm,
    s: &Substitution,
    premises: &[Premise],
) -> Result<Vec<Premise>, RewriteError> {
    let mut residual: Vec<Premise> = Vec::new();
    for sc in &form.side {
        match discharge(sc, s, premises) {
            DischargeResult::Proven(_) => {}
            DischargeResult::NeedsPremise(p) => {
                if !crate::premise::contains(&residual, &p) {
                    residual.push(p);
                }
            }
            DischargeResult::Failed(evidence) => {
                return Err(RewriteError::SideConditionFailed { condition: sc.to_string(), evidence })
            }
        }
    }
    Ok(residual)
}

/// Rewrites the subterm of `t` at `at` with one form of a rule.
pub fn apply_form(
    form: &RuleForm,
    dir: Direction,
    t: &Term,
    at: &Path,
    premises: &[Premise],
) -> Result<(Term, Vec<Premise>), RewriteError> {
    let sub = t.subterm(at).ok_or_else(|| RewriteError::BadPath(at.clone()))?;
    let (src, dst) = dir.patterns(form);
    let s = match_pattern(src, sub)?;
    if let Some(m) = metas(dst).into_iter().find(|m| !s.contains_key(m)) {
        return Err(RewriteError::UnboundMetavariable(m));
    }
    let residual = discharge_all(form, &s, premises)?;
    let new = instantiate_reduced(dst, &s)?;
    let out = t.replace_at(at, new).ok_or_else(|| RewriteError::BadPath(at.clone()))?;
    Ok((out, residual))
}

/// Rewrites with the first form of `rule` whose source pattern matches.
pub fn apply_rule(
    rule: &RewriteRule,
    dir: Direction,
    t: &Term,
    at: &Path,
    premises: &[Premise],
) -> Result<(Term, Vec<Premise>), RewriteError> {
    let mut last = RewriteError::NoMatch;
    for form in &rule.forms {
        match apply_form(form, dir, t, at, premises) {
            Ok(r) => return Ok(r),
            Err(RewriteError::NoMatch) => {}
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn close(a: &Term, b: &Term) -> bool {
    alpha_equal(a, b) || alpha_equal(&normalize(a), &normalize(b))
}

/// Finds an assignment for both patterns of `form`: the source pattern is
/// matched against `source` and whatever it cannot determine is taken from
/// matching the target pattern against `target`. The target side wins
/// conflicts; if that leaves the source side unreproducible, there is no
/// candidate.
pub fn approximate_match(
    form: &RuleForm,
    dir: Direction,
    source: &Term,
    target: &Term,
) -> Result<Substitution, RewriteError> {
    let (src, dst) = dir.patterns(form);
    let empty = Substitution::new();
    let s1 = match_lenient(src, source, &empty);
    let s2 = match_lenient(dst, target, &empty);
    if s1.is_none() && s2.is_none() {
        return Err(RewriteError::NoCandidate);
    }
    let mut s = s1.clone().unwrap_or_default();
    let mut conflict = false;
    for (m, v) in s2.clone().unwrap_or_default() {
        if let Some(old) = s.get(&m) {
            conflict |= !alpha_equal(old, &v);
        }
        s.insert(m, v);
    }
    // A second pass on each side can now fill higher-order spots.
    if let Some(more) = match_lenient(src, source, &s) {
        s = more;
    }
    if let Some(more) = match_lenient(dst, target, &s) {
        s = more;
    }
    let mut all = metas(src);
    all.extend(metas(dst));
    if all.iter().any(|m| !s.contains_key(m)) {
        return Err(RewriteError::NoCandidate);
    }
    if conflict {
        let a = instantiate_reduced(src, &s)?;
        let b = instantiate_reduced(dst, &s)?;
        if !close(&a, source) || !close(&b, target) {
            return Err(RewriteError::NoCandidate);
        }
    }
    Ok(s)
}

/// Tries every form and both directions. Returns the first that yields a
/// candidate.
pub fn approximate_match_rule(
    rule: &RewriteRule,
    source: &Term,
    target: &Term,
) -> Option<(usize, Direction, Substitution)> {
    for (i, form) in rule.forms.iter().enumerate() {
        for dir in [Direction::LeftToRight, Direction::RightToLeft] {
            if let Ok(s) = approximate_match(form, dir, source, target) {
                return Some((i, dir, s));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::{catalog, find_rule};
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn fusion_at_root_leaves_no_premises() {
        let r = &catalog()[3];
        let src = t("(map (lam x (add x 1)) (map (lam x (mul x 2)) (list 1 2)))");
        let (out, residual) = apply_rule(r, Direction::LeftToRight, &src, &Path::root(), &[]).unwrap();
        assert!(residual.is_empty());
        assert!(alpha_equal(&out, &t("(map (lam x (add (mul x 2) 1)) (list 1 2))")), "{out}");
    }

    #[test]
    fn non_matching_path() {
        let (r, _) = find_rule("R11").unwrap();
        let src = t("(map (lam x x) (list 1))");
        assert_eq!(
            apply_rule(r, Direction::LeftToRight, &src, &Path::root(), &[]),
            Err(RewriteError::NoMatch)
        );
        assert_eq!(
            apply_rule(r, Direction::LeftToRight, &src, &Path(vec![7]), &[]),
            Err(RewriteError::BadPath(Path(vec![7])))
        );
    }

    #[test]
    fn opaque_arrays_give_a_residual_premise() {
        let (r, _) = find_rule("R12").unwrap();
        let src = t("(fst (read (zip xs ys) i))");
        let (out, residual) = apply_rule(r, Direction::LeftToRight, &src, &Path::root(), &[]).unwrap();
        assert!(alpha_equal(&out, &t("(read xs i)")));
        assert_eq!(residual, vec![Premise::EqualLength(t("xs"), t("ys")), Premise::NotStuck(t("ys"))]);
    }

    #[test]
    fn target_supplies_the_missing_function() {
        let (r, _) = find_rule("R1").unwrap();
        let source = t("(fold (lam (acc x) (add acc (mul x 2))) 0 xs)");
        let target = t("(fold (lam (acc y) (add acc y)) 0 (map (lam x (mul x 2)) xs))");
        let s = approximate_match(&r.forms[0], Direction::LeftToRight, &source, &target).unwrap();
        assert!(alpha_equal(&s[&crate::Name::from("g")], &t("(lam x (mul x 2))")));
        let back = instantiate_reduced(&r.forms[0].left, &s).unwrap();
        assert!(close(&back, &source), "{back}");
    }

    #[test]
    fn source_alone_agrees_with_exact_match() {
        let r = &catalog()[3];
        let source = t("(map f (map g xs))");
        let s = approximate_match(&r.forms[0], Direction::LeftToRight, &source, &t("unit")).unwrap();
        assert_eq!(s, match_pattern(&r.forms[0].left, &source).unwrap());
    }

    #[test]
    fn contradictory_sides() {
        let r = &catalog()[3];
        let source = t("(map f (map g xs))");
        let target = t("(map (lam x (app h (app g x))) xs)");
        assert_eq!(
            approximate_match(&r.forms[0], Direction::LeftToRight, &source, &target),
            Err(RewriteError::NoCandidate)
        );
    }
}
