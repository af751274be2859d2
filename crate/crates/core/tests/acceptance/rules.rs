use std::collections::BTreeMap;

use ffl_core::binding::free_vars;
use ffl_core::equiv::{bounded_equiv, InputGrid, ParamDomain, Verdict};
use ffl_core::rewrite::{catalog, discharge_all, instantiate, RuleForm, Substitution};
use ffl_core::syntax::parse_term;
use ffl_core::{Name, Term, Type};

const INT_FNS: &[&str] = &["(lam x x)", "(lam x (add x 1))", "(lam x (mul x 2))", "(lam x 0)", "(lam x (sub 0 x))"];

const PAIR_FNS: &[&str] = &[
    "(lam p (fst p))",
    "(lam p (snd p))",
    "(lam p (add (fst p) (snd p)))",
    "(lam p (sub (mul (fst p) 2) (snd p)))",
    "(lam p 1)",
];

/// Functions of `(i, (x, old))` for index-grouping loops.
const UPDATE_FNS: &[&str] = &[
    "(lam p (add (fst (snd p)) (snd (snd p))))",
    "(lam p (fst (snd p)))",
    "(lam p (snd (snd p)))",
    "(lam p (add (fst p) (snd (snd p))))",
    "(lam p 0)",
];

/// Functions of `(k, (v, old))` where `old` is `inl unit` for a missing key.
const KEY_FNS: &[&str] = &[
    "(lam p (case (snd (snd p)) u (fst (snd p)) w (add w (fst (snd p)))))",
    "(lam p (fst (snd p)))",
    "(lam p (case (snd (snd p)) u 1 w (add w 1)))",
];

const SHORT_LISTS: &[&str] = &[
    "(list)",
    "(list 1)",
    "(list -1)",
    "(list 1 2)",
    "(list 0 -2)",
    "(list 2 0 1)",
    "(list -1 -1 2)",
];

fn param_type(x: &str) -> Type {
    let pairs = Type::list(Type::prod(Type::Int, Type::Int));
    match x {
        "xs" | "ys" => Type::list(Type::Int),
        "ps" | "m" => pairs,
        "xss" => Type::list(Type::list(Type::Int)),
        _ => Type::Int,
    }
}

/// One instantiation family: candidate terms per metavariable.
struct Family {
    label: &'static str,
    metas: Vec<(&'static str, &'static [&'static str])>,
}

fn families() -> Vec<Family> {
    let f = |label, metas| Family { label, metas };
    vec![
        f("R1", vec![("f", PAIR_FNS), ("g", INT_FNS), ("init", &["0", "1", "a"]), ("xs", &["xs"])]),
        f("R2", vec![("f", UPDATE_FNS), ("ys", &["ys"]), ("xs", &["ps"])]),
        f("R3", vec![("f", KEY_FNS), ("m", &["m"]), ("xs", &["ps"])]),
        f("R4", vec![("f", INT_FNS), ("g", INT_FNS), ("xs", &["xs"])]),
        f(
            "R5",
            vec![
                ("f", PAIR_FNS),
                ("xs", &["xs"]),
                ("ys", &["xs", "(replicate (length xs) 0)", "(map (lam x (add x 1)) xs)"]),
            ],
        ),
        f("R6", vec![("f", PAIR_FNS), ("acc", &["0", "a"]), ("xss", &["xss"])]),
        f("R7a", vec![("f", PAIR_FNS), ("acc0", &["0", "a"]), ("min", &["0", "1", "lo"]), ("max", &["0", "2", "hi"])]),
        f("R7b", vec![("f", PAIR_FNS), ("acc0", &["0", "a"]), ("min", &["0", "1", "lo"]), ("max", &["0", "2", "hi"])]),
        f(
            "R8",
            vec![
                ("f", INT_FNS),
                ("xs", &["xs"]),
                ("ys", &["(replicate (length xs) 0)", "(map (lam x (mul x 3)) xs)", "xs"]),
            ],
        ),
        f("R9", vec![("f", PAIR_FNS), ("init", &["0", "a"]), ("xs", &["xs"])]),
        f("R10", vec![("f", INT_FNS), ("xs", &["xs"])]),
        f("R11", vec![("f", INT_FNS), ("xs", &["xs"]), ("ys", &["ps"])]),
        f("R12a", vec![("xs", SHORT_LISTS), ("ys", SHORT_LISTS), ("i", &["i"])]),
        f("R12b", vec![("xs", SHORT_LISTS), ("ys", SHORT_LISTS), ("i", &["i"])]),
        f("R13a", vec![("f", INT_FNS), ("xs", &["xs"]), ("i", &["i"])]),
        f("R13b", vec![("f", INT_FNS), ("xs", &["ps"]), ("k", &["k"])]),
    ]
}

fn grid() -> InputGrid {
    let m = ["(list)", "(list (pair 0 5))", "(list (pair 1 1) (pair 0 2))", "(list (pair 0 1) (pair 0 2))"];
    InputGrid::default().with_domain("m", ParamDomain::Values(m.iter().map(|s| t(s)).collect()))
}

fn t(s: &str) -> Term {
    parse_term(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn substitutions(fam: &Family) -> Vec<Substitution> {
    let mut out = vec![Substitution::new()];
    for (m, choices) in &fam.metas {
        out = out
            .into_iter()
            .flat_map(|s| {
                choices.iter().map(move |c| {
                    let mut s = s.clone();
                    s.insert(Name::from(*m), t(c));
                    s
                })
            })
            .collect();
    }
    out
}

fn scope(l: &Term, r: &Term) -> Vec<(Name, Type)> {
    let mut vars: BTreeMap<Name, Type> = BTreeMap::new();
    for x in free_vars(l).iter().chain(free_vars(r).iter()) {
        vars.insert(x.clone(), param_type(x.as_str()));
    }
    vars.into_iter().collect()
}

fn form(label: &str) -> &'static RuleForm {
    catalog()
        .iter()
        .flat_map(|r| r.forms.iter())
        .find(|f| f.label == label)
        .unwrap_or_else(|| panic!("no form {label}"))
}

/// Checks one instance; `None` if some side condition is not Proven.
fn validate(f: &RuleForm, s: &Substitution, g: &InputGrid) -> Result<Option<u64>, String> {
    match discharge_all(f, s, &[]) {
        Ok(residual) if residual.is_empty() => {}
        _ => return Ok(None),
    }
    let l = instantiate(&f.left, s).map_err(|e| e.to_string())?;
    let r = instantiate(&f.right, s).map_err(|e| e.to_string())?;
    let params = scope(&l, &r);
    match bounded_equiv(&l, &r, &params, g, &[]).map_err(|e| format!("{}: {l}: {e}", f.label))? {
        Verdict::Equivalent(ev) => Ok(Some(ev.tuples)),
        v => Err(format!("{}: {l} vs {r}: {v}", f.label)),
    }
}

/// Dropping a side condition must let a counterexample through.
fn necessity(g: &InputGrid) -> Result<Vec<String>, String> {
    let mut notes = Vec::new();
    let ints = Type::list(Type::Int);
    let scope = [(Name::from("xs"), ints.clone()), (Name::from("ys"), ints), (Name::from("i"), Type::Int)];
    let v = bounded_equiv(&t("(fst (read (zip xs ys) i))"), &t("(read xs i)"), &scope, g, &[]).map_err(|e| e.to_string())?;
    match v {
        Verdict::NotEquivalent(c) => notes.push(format!("R12a without equal lengths: counterexample {c}")),
        v => return Err(format!("R12a without equal lengths: expected a counterexample, got {v}")),
    }
    // A stuck ?g: map never applies its function to an empty list and
    // both sides get stuck on any other list, so no input separates them.
    let stuck_g = "(app (lam z (lam x x)) (div 1 0))";
    let l = t(&format!("(map (lam x (add x 1)) (map {stuck_g} xs))"));
    let r = t(&format!("(map (lam x (app (lam x (add x 1)) (app {stuck_g} x))) xs)"));
    let scope = [(Name::from("xs"), Type::list(Type::Int))];
    let v = bounded_equiv(&l, &r, &scope, g, &[]).map_err(|e| e.to_string())?;
    notes.push(format!("R4 with a stuck g: {} (no separating input exists)", v.kind()));
    Ok(notes)
}

pub fn run() -> Result<String, String> {
    let g = grid();
    let mut lines = Vec::new();
    let mut covered: Vec<u32> = Vec::new();
    for fam in families() {
        let f = form(fam.label);
        let (mut valid, mut skipped, mut tuples) = (0, 0, 0u64);
        for s in substitutions(&fam) {
            match validate(f, &s, &g)? {
                Some(n) => {
                    valid += 1;
                    tuples += n;
                }
                None => skipped += 1,
            }
        }
        if valid == 0 {
            return Err(format!("{}: no instance with all side conditions proven", fam.label));
        }
        let number: u32 = fam.label[1..].trim_end_matches(char::is_alphabetic).parse().unwrap();
        if !covered.contains(&number) {
            covered.push(number);
        }
        lines.push(format!(
            "{}: {valid} instances Equivalent ({tuples} tuples), {skipped} with unproven side conditions",
            fam.label
        ));
    }
    if covered.len() != catalog().len() {
        return Err(format!("only rules {covered:?} validated"));
    }
    lines.extend(necessity(&g)?);
    Ok(lines.join("\n"))
}
