//! The thirteen rewrite rules.
//!
//! Lambdas taking several arguments are written in pair-taking form, with
//! tuple binders such as `(lam (acc x) ...)`. A rule may have more than one
//! form: variants (`a`, `b`) share a number.

use std::sync::OnceLock;

use crate::syntax::parse_term;
use crate::term::{Name, Term};

use super::side::SideCondition;

#[derive(Clone, Debug)]
pub struct RuleForm {
    /// `R7a`, `R12b`, or just `R4` for single-form rules.
    pub label: String,
    pub left: Term,
    pub right: Term,
    pub side: Vec<SideCondition>,
}

#[derive(Clone, Debug)]
pub struct RewriteRule {
    pub number: u8,
    pub name: &'static str,
    pub summary: &'static str,
    pub forms: Vec<RuleForm>,
}

impl RewriteRule {
    pub fn left(&self) -> &Term {
        &self.forms[0].left
    }

    pub fn right(&self) -> &Term {
        &self.forms[0].right
    }

    /// Side conditions of the first form.
    pub fn side_conditions(&self) -> &[SideCondition] {
        &self.forms[0].side
    }

    pub fn id(&self) -> String {
        format!("R{}", self.number)
    }
}

fn p(s: &str) -> Term {
    parse_term(s).unwrap_or_else(|e| panic!("bad rule pattern {s}: {e}"))
}

fn not_free(binders: &[&str], meta: &str) -> Vec<SideCondition> {
    binders.iter().map(|b| SideCondition::NotFree(Name::from(*b), p(meta))).collect()
}

fn not_stuck(meta: &str) -> SideCondition {
    SideCondition::NotStuck(p(meta))
}

fn equal_length(a: &str, b: &str) -> SideCondition {
    SideCondition::EqualLength(p(a), p(b))
}

fn form(label: &str, left: &str, right: &str, side: Vec<SideCondition>) -> RuleForm {
    RuleForm { label: label.into(), left: p(left), right: p(right), side }
}

fn rule(number: u8, name: &'static str, summary: &'static str, forms: Vec<RuleForm>) -> RewriteRule {
    RewriteRule { number, name, summary, forms }
}

fn cat(parts: Vec<Vec<SideCondition>>) -> Vec<SideCondition> {
    parts.into_iter().flatten().collect()
}

fn build() -> Vec<RewriteRule> {
    vec![
        rule(
            1,
            "extract-independent-to-map",
            "split a loop body into a per-element map and the remaining fold",
            vec![form(
                "R1",
                "(fold (lam (acc x) (app ?f (pair acc (app ?g x)))) ?init ?xs)",
                "(fold (lam (acc y) (app ?f (pair acc y))) ?init (map ?g ?xs))",
                cat(vec![not_free(&["acc", "x", "y"], "?f"), not_free(&["x", "acc"], "?g"), vec![not_stuck("?g")]]),
            )],
        ),
        rule(
            2,
            "group-same-index",
            "group loop iterations that update the same array index",
            vec![form(
                "R2",
                "(fold (lam (acc (i x)) (write acc i (app ?f (pair i (pair x (read acc i)))))) ?ys ?xs)",
                "(fold (lam (acc (i v)) (write acc i v)) ?ys
                   (map (lam (i vs) (pair i (fold (lam (x' x) (app ?f (pair i (pair x x')))) (read ?ys i) vs)))
                        (group ?xs)))",
                not_free(&["acc", "x", "x'", "i", "vs"], "?f"),
            )],
        ),
        rule(
            3,
            "group-same-key",
            "group loop iterations that update the same key",
            vec![form(
                "R3",
                "(fold (lam (acc (k v)) (writek acc k (app ?f (pair k (pair v (readk acc k)))))) ?m ?xs)",
                "(fold (lam (acc (k v)) (writek acc k v)) ?m
                   (map (lam (k vs)
                          (pair k (case (fold (lam (v' v) (inr (app ?f (pair k (pair v v'))))) (readk ?m k) vs)
                                        u (read (list) 0)
                                        w w)))
                        (group ?xs)))",
                not_free(&["acc", "v", "v'", "k", "vs"], "?f"),
            )],
        ),
        rule(
            4,
            "map-fusion",
            "fuse two consecutive maps",
            vec![form(
                "R4",
                "(map ?f (map ?g ?xs))",
                "(map (lam x (app ?f (app ?g x))) ?xs)",
                cat(vec![not_free(&["x"], "?f"), not_free(&["x"], "?g"), vec![not_stuck("?f"), not_stuck("?g")]]),
            )],
        ),
        rule(
            5,
            "separate-read-write-arrays",
            "read from the input array and write to a separate one",
            vec![form(
                "R5",
                "(fold (lam (xs' i) (write xs' i (app ?f (pair i (read xs' i))))) ?xs (range 0 (length ?xs)))",
                "(fold (lam (ys' i) (write ys' i (app ?f (pair i (read ?xs i))))) ?ys (range 0 (length ?xs)))",
                cat(vec![
                    vec![equal_length("?xs", "?ys")],
                    not_free(&["xs'", "i"], "?f"),
                    not_free(&["ys'", "i"], "?xs"),
                ]),
            )],
        ),
        rule(
            6,
            "flatten-fold-over-concat",
            "flatten nested folds over an array of arrays",
            vec![form(
                "R6",
                "(fold (lam (acc' xs) (fold ?f acc' xs)) ?acc ?xss)",
                "(fold ?f ?acc (concat ?xss))",
                cat(vec![vec![not_stuck("?f")], not_free(&["acc'", "xs"], "?f")]),
            )],
        ),
        rule(
            7,
            "iter-to-fold",
            "a counting iter loop is a fold over a range",
            vec![
                form(
                    "R7a",
                    "(fst (iter (lam (acc i) (if (lt i ?max) (inr (pair (app ?f (pair acc i)) (add i 1))) (inl unit)))
                                (pair ?acc0 ?min)))",
                    "(fold ?f ?acc0 (range ?min ?max))",
                    cat(vec![vec![not_stuck("?f")], not_free(&["acc", "i"], "?f"), not_free(&["i", "acc"], "?max")]),
                ),
                form(
                    "R7b",
                    "(snd (iter (lam (i acc) (if (lt i ?max) (inr (pair (add i 1) (app ?f (pair acc i)))) (inl unit)))
                                (pair ?min ?acc0)))",
                    "(fold ?f ?acc0 (range ?min ?max))",
                    cat(vec![vec![not_stuck("?f")], not_free(&["acc", "i"], "?f"), not_free(&["i", "acc"], "?max")]),
                ),
            ],
        ),
        rule(
            8,
            "fold-to-map",
            "an index loop writing f of each element is a map",
            vec![form(
                "R8",
                "(fold (lam (ys' i) (write ys' i (app ?f (read ?xs i)))) ?ys (range 0 (length ?xs)))",
                "(map ?f ?xs)",
                cat(vec![
                    vec![equal_length("?xs", "?ys")],
                    not_free(&["ys'", "i"], "?f"),
                    not_free(&["ys'", "i"], "?xs"),
                    vec![not_stuck("?f")],
                ]),
            )],
        ),
        rule(
            9,
            "fold-over-values",
            "fold over the elements instead of the index range",
            vec![form(
                "R9",
                "(fold (lam (acc i) (app ?f (pair acc (read ?xs i)))) ?init (range 0 (length ?xs)))",
                "(fold ?f ?init ?xs)",
                cat(vec![not_free(&["i", "acc"], "?xs"), not_free(&["i", "acc"], "?f"), vec![not_stuck("?f")]]),
            )],
        ),
        rule(
            10,
            "map-over-values",
            "map over the elements instead of the index range",
            vec![form(
                "R10",
                "(map (lam i (app ?f (read ?xs i))) (range 0 (length ?xs)))",
                "(map ?f ?xs)",
                cat(vec![not_free(&["i"], "?xs"), not_free(&["i"], "?f"), vec![not_stuck("?f")]]),
            )],
        ),
        rule(
            11,
            "commute-writeback-map",
            "apply a map before writing updates back instead of after",
            vec![form(
                "R11",
                "(map ?f (fold (lam (xs' (i x)) (write xs' i x)) ?xs ?ys))",
                "(fold (lam (xs' (i x)) (write xs' i x)) (map ?f ?xs) (map (lam (i x) (pair i (app ?f x))) ?ys))",
                not_free(&["i", "x"], "?f"),
            )],
        ),
        rule(
            12,
            "read-zip",
            "a projection of a read from a zip reads the underlying array",
            vec![
                form(
                    "R12a",
                    "(fst (read (zip ?xs ?ys) ?i))",
                    "(read ?xs ?i)",
                    vec![equal_length("?xs", "?ys"), not_stuck("?ys")],
                ),
                form(
                    "R12b",
                    "(snd (read (zip ?xs ?ys) ?i))",
                    "(read ?ys ?i)",
                    vec![equal_length("?xs", "?ys"), not_stuck("?xs")],
                ),
            ],
        ),
        rule(
            13,
            "read-map",
            "reading from a mapped array applies the function to the read",
            vec![
                form("R13a", "(read (map ?f ?xs) ?i)", "(app ?f (read ?xs ?i))", vec![]),
                form(
                    "R13b",
                    "(readk (map (lam (k v) (pair k (app ?f v))) ?xs) ?k)",
                    "(case (readk ?xs ?k) u (inl u) w (inr (app ?f w)))",
                    vec![],
                ),
            ],
        ),
    ]
}

/// All rules, in number order.
pub fn catalog() -> &'static [RewriteRule] {
    static CATALOG: OnceLock<Vec<RewriteRule>> = OnceLock::new();
    CATALOG.get_or_init(build)
}

/// Looks a rule up by `R4`, a variant label such as `R7b`, or its name.
/// Returns the rule and, for a variant label, the index of that form.
pub fn find_rule(key: &str) -> Option<(&'static RewriteRule, Option<usize>)> {
    let k = key.trim();
    for r in catalog() {
        if r.name.eq_ignore_ascii_case(k) || r.id().eq_ignore_ascii_case(k) {
            return Some((r, None));
        }
        if r.forms.len() > 1 {
            if let Some(i) = r.forms.iter().position(|f| f.label.eq_ignore_ascii_case(k)) {
                return Some((r, Some(i)));
            }
        }
    }
    None
}
