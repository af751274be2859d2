//! Bounded exhaustive-input equivalence oracle and verdicts.

use std::fmt;

use crate::binding::{fresh_name, free_vars};
use crate::eval::{EvalResult, Outcome, Program, Val};
use crate::premise::Premise;
use crate::syntax::print_term;
use crate::term::{Name, Term};
use crate::types::{typecheck, Type, TypeContext};

use super::grid::{InputGrid, ScopeVar, TupleSpace};
use super::EquivError;

/// Why an equivalence holds.
#[derive(Clone, Debug)]
pub struct Evidence {
    /// `alpha`, `oracle`, `rule R7`, `coupling`, `congruence`, ...
    pub method: String,
    pub detail: String,
    /// Tuples checked by the oracle step that produced this evidence.
    pub tuples: u64,
}

/// An input tuple on which the two terms disagree.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub inputs: Vec<(Name, Term)>,
    pub left: EvalResult,
    pub right: EvalResult,
}

impl Counterexample {
    pub fn mirrored(&self) -> Counterexample {
        Counterexample {
            inputs: self.inputs.clone(),
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }

    pub fn input(&self, x: &str) -> Option<&Term> {
        self.inputs.iter().find(|(n, _)| n.as_str() == x).map(|(_, t)| t)
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => left {} / right {}", show_inputs(&self.inputs), self.left, self.right)
    }
}

pub(crate) fn show_inputs(inputs: &[(Name, Term)]) -> String {
    let parts: Vec<String> = inputs.iter().map(|(n, t)| format!("{n}={}", print_term(t))).collect();
    format!("({})", parts.join(", "))
}

#[derive(Clone, Debug)]
pub enum Inconclusive {
    /// One side produced a value while the other ran out of fuel.
    Fuel { inputs: Vec<(Name, Term)> },
    /// The enumeration budget ran out before the domain was covered.
    Budget { scanned: u64, total: u128 },
    /// Premises that no wider context could discharge.
    OpenPremises(Vec<Premise>),
    /// A coupling predicate failed on a lockstep trace.
    CouplingViolated { iteration: usize, left: Term, right: Term },
    /// A coupling predicate got stuck on a state pair.
    PredicateStuck { left: Term, right: Term },
    /// The loops of a coupling check do not have the expected shape.
    NotCouplable(String),
    /// The two programs do not have the same type.
    TypeMismatch(String),
}

impl fmt::Display for Inconclusive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inconclusive::Fuel { inputs } => write!(f, "fuel exhausted on one side at {}", show_inputs(inputs)),
            Inconclusive::Budget { scanned, total } => write!(f, "budget: scanned {scanned} of {total} tuples"),
            Inconclusive::OpenPremises(ps) => {
                let v: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                write!(f, "open premises: {}", v.join(", "))
            }
            Inconclusive::CouplingViolated { iteration, left, right } => write!(
                f,
                "coupling fails after iteration {iteration} on states {} / {}",
                print_term(left),
                print_term(right)
            ),
            Inconclusive::PredicateStuck { left, right } => {
                write!(f, "coupling predicate stuck on {} / {}", print_term(left), print_term(right))
            }
            Inconclusive::NotCouplable(s) => write!(f, "not couplable: {s}"),
            Inconclusive::TypeMismatch(s) => write!(f, "type mismatch: {s}"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Equivalent(Evidence),
    NotEquivalent(Counterexample),
    Inconclusive(Inconclusive),
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent(_))
    }

    pub fn is_not_equivalent(&self) -> bool {
        matches!(self, Verdict::NotEquivalent(_))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Equivalent(_) => "Equivalent",
            Verdict::NotEquivalent(_) => "NotEquivalent",
            Verdict::Inconclusive(_) => "Inconclusive",
        }
    }

    /// Process exit code: 0, 1 or 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Equivalent(_) => 0,
            Verdict::NotEquivalent(_) => 1,
            Verdict::Inconclusive(_) => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Equivalent(e) => write!(f, "Equivalent ({}: {})", e.method, e.detail),
            Verdict::NotEquivalent(c) => write!(f, "NotEquivalent {c}"),
            Verdict::Inconclusive(r) => write!(f, "Inconclusive ({r})"),
        }
    }
}

/// Checks `p` and `q` on every tuple of the grid over `params` that
/// satisfies `premises` and the grid's own assumptions. Function-typed
/// results are compared after applying enumerated arguments.
pub fn bounded_equiv(
    p: &Term,
    q: &Term,
    params: &[(Name, Type)],
    grid: &InputGrid,
    premises: &[Premise],
) -> Result<Verdict, EquivError> {
    let ctx: TypeContext = params.iter().cloned().collect();
    let tp = typecheck(&ctx, p)?;
    let tq = typecheck(&ctx, q)?;
    if tp != tq {
        return Err(EquivError::TypeMismatch { left: tp, right: tq });
    }
    let mut vars: Vec<ScopeVar> = params
        .iter()
        .map(|(n, t)| ScopeVar {
            name: n.clone(),
            ty: t.clone(),
            domain: grid.domains.get(n).cloned(),
        })
        .collect();
    let (p, q) = apply_fresh_args(p, q, &tp, &mut vars);
    let names: Vec<Name> = vars.iter().map(|v| v.name.clone()).collect();
    let mut filters: Vec<Premise> = grid
        .assumptions
        .iter()
        .filter(|a| a.terms().iter().all(|t| free_vars(t).iter().all(|x| names.contains(x))))
        .cloned()
        .collect();
    filters.extend(premises.iter().cloned());
    Ok(oracle(&p, &q, &vars, grid, &filters))
}

/// Applies both terms to fresh arguments, one per curried parameter of
/// `ty`, and registers the arguments as scope variables.
pub(crate) fn apply_fresh_args(p: &Term, q: &Term, ty: &Type, vars: &mut Vec<ScopeVar>) -> (Term, Term) {
    let (args, _) = ty.uncurry();
    let mut p = p.clone();
    let mut q = q.clone();
    // the function's own arguments come first and vary fastest
    for (i, a) in args.into_iter().enumerate() {
        let taken: Vec<Name> = vars.iter().map(|v| v.name.clone()).collect();
        let x = fresh_name(&Name::from("arg"), |c| taken.contains(c) || free_vars(&p).contains(c) || free_vars(&q).contains(c));
        p = Term::app(p, Term::var(x.clone()));
        q = Term::app(q, Term::var(x.clone()));
        vars.insert(
            i,
            ScopeVar {
                name: x,
                ty: a.clone(),
                domain: None,
            },
        );
    }
    (p, q)
}

/// Scans the tuple space of `vars` under `filters` and compares the two
/// closed-over terms on each tuple.
pub(crate) fn oracle(p: &Term, q: &Term, vars: &[ScopeVar], grid: &InputGrid, filters: &[Premise]) -> Verdict {
    let space = TupleSpace::new(vars, grid, filters);
    let pp = Program::compile(p, &space.names);
    let pq = Program::compile(q, &space.names);
    let mut checked = 0u64;
    let mut diverged = 0u64;
    let mut fuel_at: Option<Vec<Val>> = None;
    let mut cex: Option<(Vec<Val>, Outcome, Outcome)> = None;
    let scanned = space.for_each(grid.budget, &mut |tuple| {
        checked += 1;
        let a = pp.run(tuple, grid.fuel);
        let b = pq.run(tuple, grid.fuel);
        match agree(&a, &b) {
            Agreement::Yes => {}
            Agreement::BothDiverged => diverged += 1,
            Agreement::Fuel => {
                if fuel_at.is_none() {
                    fuel_at = Some(tuple.to_vec());
                }
            }
            Agreement::No => {
                cex = Some((tuple.to_vec(), a, b));
                return false;
            }
        }
        true
    });
    let named = |t: &[Val]| -> Vec<(Name, Term)> {
        space.names.iter().cloned().zip(t.iter().map(Val::to_term)).collect()
    };
    if let Some((t, a, b)) = cex {
        return Verdict::NotEquivalent(Counterexample {
            inputs: named(&t),
            left: a.into_result(),
            right: b.into_result(),
        });
    }
    if let Some(t) = fuel_at {
        return Verdict::Inconclusive(Inconclusive::Fuel { inputs: named(&t) });
    }
    let total = space.raw_count();
    if (scanned as u128) < total {
        return Verdict::Inconclusive(Inconclusive::Budget { scanned, total });
    }
    let mut detail = format!("{checked} tuples agree over {}", grid.describe());
    if diverged > 0 {
        detail.push_str(&format!("; {diverged} of them exhaust fuel on both sides"));
    }
    Verdict::Equivalent(Evidence {
        method: "oracle".into(),
        detail,
        tuples: checked,
    })
}

enum Agreement {
    Yes,
    BothDiverged,
    Fuel,
    No,
}

fn agree(a: &Outcome, b: &Outcome) -> Agreement {
    match (a, b) {
        (Outcome::Value(v), Outcome::Value(w)) => {
            if v.same(w) {
                Agreement::Yes
            } else {
                Agreement::No
            }
        }
        (Outcome::OutOfFuel, Outcome::OutOfFuel) => Agreement::BothDiverged,
        (Outcome::Value(_), Outcome::OutOfFuel) | (Outcome::OutOfFuel, Outcome::Value(_)) => Agreement::Fuel,
        (Outcome::Value(_), Outcome::Stuck(..)) | (Outcome::Stuck(..), Outcome::Value(_)) => Agreement::No,
        _ => Agreement::Yes,
    }
}
