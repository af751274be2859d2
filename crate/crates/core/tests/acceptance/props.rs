use std::cell::Cell;

use proptest::prelude::any;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use ffl_core::binding::{free_vars, substitute, substitute_closed};
use ffl_core::equiv::{bounded_equiv, check_fold_coupling, Inconclusive, InputGrid, Verdict};
use ffl_core::eval::{eval, EvalResult, StuckReason};
use ffl_core::types::typecheck;
use ffl_core::{Name, Prim, Term, TermKind, Type, TypeContext};

use super::gen::{Gen, Ty};

const CASES: u32 = 1000;
const FUEL: u64 = 20_000;

/// Runs `prop` on `CASES` seeds; `prop` returns whether the case was
/// non-trivial (it exercised the interesting branch).
fn suite(name: &str, prop: impl Fn(u64) -> Result<bool, TestCaseError>) -> Result<String, String> {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let (ran, hits) = (Cell::new(0u32), Cell::new(0u32));
    runner
        .run(&any::<u64>(), |seed| {
            ran.set(ran.get() + 1);
            if prop(seed)? {
                hits.set(hits.get() + 1);
            }
            Ok(())
        })
        .map_err(|e| format!("{name}: {e}"))?;
    Ok(format!("{name}: {} cases, {} non-trivial", ran.get(), hits.get()))
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

fn ctx(vars: &[(&str, Ty)]) -> TypeContext {
    vars.iter().map(|(x, t)| (Name::from(*x), t.to_type())).collect()
}

fn type_of(c: &TypeContext, t: &Term) -> Result<Type, TestCaseError> {
    typecheck(c, t).map_err(|e| fail(format!("generated term {t} does not typecheck: {e}")))
}

/// Typing is preserved by substitution, and substituting under binders
/// named like the free variables of the argument does not capture them.
fn substitution(seed: u64) -> Result<bool, TestCaseError> {
    let mut g = Gen::new(seed).with_free("x", Ty::Int).with_free("y", Ty::Int);
    let ty = g.ty();
    let t = g.term(ty, 3);
    let v = Gen::new(!seed).with_free("y", Ty::Int).term(Ty::Int, 2);
    let want = type_of(&ctx(&[("x", Ty::Int), ("y", Ty::Int)]), &t)?;
    let y_only = ctx(&[("y", Ty::Int)]);
    type_of(&y_only, &v)?;
    let x = Name::from("x");
    let s = substitute(&t, &x, &v);
    let got = typecheck(&y_only, &s).map_err(|e| fail(format!("{t}[x := {v}] = {s}: {e}")))?;
    if got != want {
        return Err(fail(format!("{t}[x := {v}] = {s} has type {got}, expected {want}")));
    }
    let allowed: Vec<Name> = free_vars(&t).into_iter().filter(|n| *n != x).chain(free_vars(&v)).collect();
    if let Some(stray) = free_vars(&s).into_iter().find(|n| !allowed.contains(n)) {
        return Err(fail(format!("{stray} free in {s}")));
    }
    let capture_risk = free_vars(&v).contains(&Name::from("y"));
    for n in [-1, 2] {
        let close = [(Name::from("y"), Term::int(n))];
        let direct = eval(&substitute_closed(&s, &close), FUEL);
        let reference = eval(&substitute(&substitute_closed(&t, &close), &x, &substitute_closed(&v, &close)), FUEL);
        if direct != reference {
            return Err(fail(format!("{s} at y={n}: {direct}, expected {reference}")));
        }
        // the substitution lemma for a value argument
        if let EvalResult::Value(w) = eval(&substitute_closed(&v, &close), FUEL) {
            let body = substitute_closed(&t, &close);
            let applied = eval(&Term::app(Term::lam(x.clone(), body.clone()), w.clone()), FUEL);
            let substituted = eval(&substitute(&body, &x, &w), FUEL);
            if !same_outcome(&applied, &substituted) {
                return Err(fail(format!("({body})[x := {w}]: {substituted} but application gives {applied}")));
            }
        }
    }
    Ok(capture_risk)
}

/// Equal up to stuck positions, treating fuel exhaustion as unknown.
fn same_outcome(a: &EvalResult, b: &EvalResult) -> bool {
    match (a, b) {
        (EvalResult::OutOfFuel, _) | (_, EvalResult::OutOfFuel) => true,
        (EvalResult::Stuck { reason: r, .. }, EvalResult::Stuck { reason: s, .. }) => r == s,
        _ => a == b,
    }
}

/// Values have the type of the term they came from, and well-typed closed
/// terms never get stuck on a malformed operand.
fn preservation(seed: u64) -> Result<bool, TestCaseError> {
    let mut g = Gen::new(seed);
    let ty = g.ty();
    let t = g.term(ty, 4);
    let want = type_of(&TypeContext::new(), &t)?;
    match eval(&t, FUEL) {
        EvalResult::Value(v) => {
            let got = typecheck(&TypeContext::new(), &v).map_err(|e| fail(format!("value {v} of {t}: {e}")))?;
            if got != want {
                return Err(fail(format!("{t} : {want} evaluates to {v} : {got}")));
            }
            Ok(true)
        }
        EvalResult::Stuck { reason: StuckReason::NonValueScrutinee, .. } => {
            Err(fail(format!("well-typed {t} stuck on a non-value")))
        }
        _ => Ok(false),
    }
}

/// More fuel never changes a result that did not run out of fuel.
fn fuel_monotone(seed: u64) -> Result<bool, TestCaseError> {
    let mut g = Gen::new(seed);
    let ty = g.ty();
    let t = g.term(ty, 4);
    let f1 = g.int_in(0, 400) as u64;
    let f2 = f1 + g.int_in(0, 5000) as u64;
    let (r1, r2) = (eval(&t, f1), eval(&t, f2));
    match r1 {
        EvalResult::OutOfFuel => Ok(false),
        r1 if r1 == r2 => Ok(true),
        r1 => Err(fail(format!("{t}: {r1} at fuel {f1} but {r2} at {f2}"))),
    }
}

fn oracle_grid() -> InputGrid {
    InputGrid::default().with_len(2).with_fuel(5_000)
}

fn oracle_scope() -> Vec<(Name, Type)> {
    vec![(Name::from("x"), Type::Int), (Name::from("xs"), Type::list(Type::Int))]
}

/// A term and a variant of it: one integer literal changed, or a fresh
/// term of the same type.
fn oracle_pair(seed: u64) -> (Term, Term) {
    let mut g = Gen::new(seed).with_free("x", Ty::Int).with_free("xs", Ty::Ints);
    let ty = [Ty::Int, Ty::Bool, Ty::Ints][g.below(3)];
    let p = g.term(ty, 3);
    let lits: Vec<_> = p.paths().into_iter().filter(|at| matches!(p.subterm(at).unwrap().kind(), TermKind::Int(_))).collect();
    let q = if !lits.is_empty() && g.below(2) == 0 {
        let at = &lits[g.below(lits.len())];
        let old = p.subterm(at).unwrap().clone();
        p.replace_at(at, Term::binop(Prim::Add, old, Term::int(1))).unwrap()
    } else {
        g.term(ty, 3)
    };
    (p, q)
}

fn oracle(p: &Term, q: &Term) -> Result<Verdict, TestCaseError> {
    bounded_equiv(p, q, &oracle_scope(), &oracle_grid(), &[]).map_err(|e| fail(format!("{p} vs {q}: {e}")))
}

fn reflexive(seed: u64) -> Result<bool, TestCaseError> {
    let (p, _) = oracle_pair(seed);
    match oracle(&p, &p)? {
        Verdict::Equivalent(_) => Ok(true),
        Verdict::Inconclusive(Inconclusive::Fuel { .. }) => Ok(false),
        v => Err(fail(format!("{p} against itself: {v}"))),
    }
}

fn symmetric(seed: u64) -> Result<bool, TestCaseError> {
    let (p, q) = oracle_pair(seed);
    let (a, b) = (oracle(&p, &q)?, oracle(&q, &p)?);
    match (&a, &b) {
        (Verdict::NotEquivalent(c), Verdict::NotEquivalent(d)) => {
            let m = c.mirrored();
            if m.inputs != d.inputs || m.left != d.left || m.right != d.right {
                return Err(fail(format!("{p} / {q}: counterexample {c} mirrors to {m}, reverse gives {d}")));
            }
            Ok(true)
        }
        _ if a.kind() == b.kind() => Ok(false),
        _ => Err(fail(format!("{p} / {q}: {a} but reversed {b}"))),
    }
}

/// A reported counterexample reproduces when its inputs are substituted.
fn replay(seed: u64) -> Result<bool, TestCaseError> {
    let (p, q) = oracle_pair(seed);
    let Verdict::NotEquivalent(c) = oracle(&p, &q)? else {
        return Ok(false);
    };
    let fuel = oracle_grid().fuel;
    let left = eval(&substitute_closed(&p, &c.inputs), fuel);
    let right = eval(&substitute_closed(&q, &c.inputs), fuel);
    if !same_outcome(&left, &c.left) || !same_outcome(&right, &c.right) {
        return Err(fail(format!("{p} / {q}: reported {c}, replay gives {left} / {right}")));
    }
    Ok(true)
}

fn ints(g: &mut Gen, n: usize) -> Term {
    Term::list((0..n).map(|_| Term::int(g.int_in(-2, 2))).collect())
}

fn prefix(xs: &Term, k: usize) -> Term {
    let TermKind::Prim(Prim::List, items) = xs.kind() else { unreachable!() };
    Term::list(items[..k].to_vec())
}

fn fold(f: &Term, s0: &Term, xs: &Term) -> EvalResult {
    eval(&Term::prim(Prim::Fold, vec![f.clone(), s0.clone(), xs.clone()]), FUEL)
}

/// A reported coupling violation replays: running both loops for the
/// reported number of iterations gives the reported states, on which the
/// predicate is false.
fn coupling(seed: u64) -> Result<bool, TestCaseError> {
    let mut g = Gen::new(seed);
    let f = g.lam(Ty::Pair, Ty::Int, 2);
    let f2 = if g.below(3) == 0 { f.clone() } else { g.lam(Ty::Pair, Ty::Int, 2) };
    let (s0, s02) = (Term::int(g.int_in(-2, 2)), Term::int(g.int_in(-2, 2)));
    let n = g.below(4);
    let (xs, xs2) = (ints(&mut g, n), ints(&mut g, n));
    let c = g.lam(Ty::Pair, Ty::Bool, 2);
    let grid = InputGrid::default().with_fuel(FUEL);
    let verdict = check_fold_coupling(&f, &f2, &s0, &s02, &[(xs.clone(), xs2.clone())], &c, &grid);
    let holds = |l: &Term, r: &Term| eval(&Term::app(c.clone(), Term::pair(l.clone(), r.clone())), FUEL);
    let show = || format!("f {f}, f' {f2}, c {c}, from {s0}/{s02} over {xs}/{xs2}");
    match verdict {
        Verdict::Inconclusive(Inconclusive::CouplingViolated { iteration, left, right }) => {
            let state = |f: &Term, s0: &Term, xs: &Term| match fold(f, s0, &prefix(xs, iteration)) {
                EvalResult::Value(v) => Some((v, true)),
                EvalResult::Stuck { .. } if iteration > 0 => match fold(f, s0, &prefix(xs, iteration - 1)) {
                    EvalResult::Value(v) => Some((v, false)),
                    _ => None,
                },
                _ => None,
            };
            let (Some((l, lv)), Some((r, rv))) = (state(&f, &s0, &xs), state(&f2, &s02, &xs2)) else {
                return Err(fail(format!("{}: violation at {iteration} does not replay", show())));
            };
            if !ffl_core::binding::alpha_equal(&l, &left) || !ffl_core::binding::alpha_equal(&r, &right) {
                return Err(fail(format!("{}: reported {left}/{right} at {iteration}, replay {l}/{r}", show())));
            }
            if lv && rv && holds(&l, &r) != EvalResult::Value(Term::bool(false)) {
                return Err(fail(format!("{}: predicate not false on {l}/{r}", show())));
            }
            Ok(true)
        }
        Verdict::Equivalent(_) => {
            if let (EvalResult::Value(l), EvalResult::Value(r)) = (fold(&f, &s0, &xs), fold(&f2, &s02, &xs2)) {
                if holds(&l, &r) != EvalResult::Value(Term::bool(true)) {
                    return Err(fail(format!("{}: accepted, but c fails on final states {l}/{r}", show())));
                }
            }
            Ok(false)
        }
        _ => Ok(false),
    }
}

pub fn run() -> Result<String, String> {
    let lines = [
        suite("substitution preserves typing, no capture", substitution)?,
        suite("evaluation preserves typing", preservation)?,
        suite("fuel monotonicity", fuel_monotone)?,
        suite("oracle reflexivity", reflexive)?,
        suite("oracle symmetry", symmetric)?,
        suite("counterexample replay", replay)?,
        suite("coupling trace replay", coupling)?,
    ];
    Ok(lines.join("\n"))
}
