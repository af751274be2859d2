use std::path::PathBuf;

use ffl_core::binding::alpha_equal;
use ffl_core::il::{parse_il, translate, translate_with, LoopMode, TranslateOptions};
use ffl_core::rewrite::{apply_rule, catalog, find_rule, metas, Direction, SideCondition};
use ffl_core::syntax::parse_term;
use ffl_core::types::{typecheck_patterns, TypeContext};
use ffl_core::{Path, Term};

fn fixture(rel: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel);
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn thirteen_rules_in_order() {
    let rules = catalog();
    assert_eq!(rules.len(), 13);
    assert_eq!(rules[0].name, "extract-independent-to-map");
    assert!(rules[0]
        .side_conditions()
        .iter()
        .any(|sc| matches!(sc, SideCondition::NotFree(x, p) if x.as_str() == "acc" && p.to_string() == "?f")));
    for (i, r) in rules.iter().enumerate() {
        assert_eq!(r.number as usize, i + 1);
    }
}

#[test]
fn both_sides_of_every_form_typecheck_together() {
    for r in catalog() {
        for f in &r.forms {
            typecheck_patterns(&TypeContext::new(), &[&f.left, &f.right])
                .unwrap_or_else(|e| panic!("{}: {e}", f.label));
        }
    }
}

#[test]
fn side_condition_metas_occur_in_a_pattern() {
    for r in catalog() {
        for f in &r.forms {
            let mut all = metas(&f.left);
            all.extend(metas(&f.right));
            for sc in &f.side {
                let t = match sc {
                    SideCondition::EqualLength(a, b) => vec![a, b],
                    SideCondition::NotStuck(a) | SideCondition::NotFree(_, a) => vec![a],
                };
                for p in t {
                    assert!(metas(p).is_subset(&all), "{}: {sc}", f.label);
                }
            }
        }
    }
}

#[test]
fn lookup_by_id_label_and_name() {
    assert_eq!(find_rule("R4").unwrap().0.number, 4);
    assert_eq!(find_rule("map-fusion").unwrap().0.number, 4);
    let (r, form) = find_rule("r7b").unwrap();
    assert_eq!((r.number, form), (7, Some(1)));
    assert!(find_rule("R14").is_none());
}

#[test]
fn iter_loop_rewrites_to_the_fold_loop() {
    let p = parse_il(&fixture("sum/sum_arrays.il")).unwrap();
    let iter = translate_with(&p, TranslateOptions { for_loops: LoopMode::Iter, ..Default::default() }).unwrap();
    let fold = translate(&p).unwrap();
    let (r, _) = find_rule("R7").unwrap();
    let at = Path(vec![0, 0, 0]);
    let (out, residual) = apply_rule(r, Direction::LeftToRight, &iter, &at, &[]).unwrap();
    assert!(residual.is_empty(), "{residual:?}");
    assert!(alpha_equal(&out, &fold), "{out}");
    let want = parse_term(&fixture("sum/sum_fold.ffl")).unwrap();
    assert!(alpha_equal(&out, &want));
}

#[test]
fn rule_four_spot_check() {
    let (r, _) = find_rule("R4").unwrap();
    let t: Term = parse_term("(map (lam x (add x 1)) (map (lam x (mul x 2)) (list 1 2)))").unwrap();
    let (out, residual) = apply_rule(r, Direction::LeftToRight, &t, &Path::root(), &[]).unwrap();
    assert!(residual.is_empty());
    let v = ffl_core::eval::eval(&out, 10_000);
    assert_eq!(v, ffl_core::eval::EvalResult::Value(parse_term("(list 3 5)").unwrap()));
}

fn ints_scope(names: &[&str]) -> Vec<(ffl_core::Name, ffl_core::Type)> {
    use ffl_core::Type;
    names
        .iter()
        .map(|n| {
            let ty = if n.ends_with('s') { Type::list(Type::Int) } else { Type::Int };
            (ffl_core::Name::from(*n), ty)
        })
        .collect()
}

#[test]
fn read_zip_needs_equal_lengths() {
    use ffl_core::equiv::{bounded_equiv, InputGrid, Verdict};
    let l = parse_term("(fst (read (zip xs ys) i))").unwrap();
    let r = parse_term("(read xs i)").unwrap();
    let v = bounded_equiv(&l, &r, &ints_scope(&["xs", "ys", "i"]), &InputGrid::default(), &[]).unwrap();
    let Verdict::NotEquivalent(c) = v else { panic!("{v}") };
    let len = |x: &str| match c.input(x).unwrap().as_prim() {
        Some((_, items)) => items.len(),
        None => panic!(),
    };
    assert_ne!(len("xs"), len("ys"));
}

/// Map never applies its function to an empty list, and both sides are
/// stuck on any other list, so dropping NotStuck on `?g` is unobservable.
#[test]
fn map_fusion_with_stuck_function_has_no_counterexample() {
    use ffl_core::equiv::{bounded_equiv, InputGrid};
    let g = "(app (lam z (lam x x)) (div 1 0))";
    let l = parse_term(&format!("(map (lam x (add x 1)) (map {g} xs))")).unwrap();
    let r = parse_term(&format!("(map (lam x (app (lam x (add x 1)) (app {g} x))) xs)")).unwrap();
    let v = bounded_equiv(&l, &r, &ints_scope(&["xs"]), &InputGrid::default(), &[]).unwrap();
    assert!(v.is_equivalent(), "{v}");
}

/// Reading the initial accumulator and the range start as one shared
/// metavariable gives an unsound rule.
#[test]
fn fold_over_values_with_shared_start_is_unsound() {
    use ffl_core::equiv::{bounded_equiv, InputGrid};
    let l = parse_term("(fold (lam (acc i) (add acc (read xs i))) j (range j (length xs)))").unwrap();
    let r = parse_term("(fold (lam p (add (fst p) (snd p))) j xs)").unwrap();
    let v = bounded_equiv(&l, &r, &ints_scope(&["xs", "j"]), &InputGrid::default(), &[]).unwrap();
    assert!(v.is_not_equivalent(), "{v}");
}
