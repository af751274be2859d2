//! Fuel-bounded big-step evaluator.
//!
//! Terms are compiled once into a de Bruijn indexed tree and then run by an
//! environment machine. Closures remember their source lambda so results
//! can be read back into terms. Fuel is charged once per node evaluation,
//! once per function application, once per loop step, and once per element
//! created by `replicate` and `range`.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::sync::atomic::{AtomicU32, Ordering};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::binding::{alpha_equal, free_vars, substitute_closed};
use crate::term::{Name, Path, Prim, Term, TermKind};

pub type Fuel = u64;

/// Default budget used by the CLI and the oracle.
pub const DEFAULT_FUEL: Fuel = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StuckReason {
    OutOfBounds,
    ZipLengthMismatch,
    NegativeReplicate,
    /// Range bounds that are not integers.
    EmptyRangeInvalid,
    DivByZero,
    /// A scrutinee, operand or callee that is not a value of the needed
    /// shape (only reachable from ill-typed or open terms).
    NonValueScrutinee,
}

impl StuckReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StuckReason::OutOfBounds => "out-of-bounds",
            StuckReason::ZipLengthMismatch => "zip-length-mismatch",
            StuckReason::NegativeReplicate => "negative-replicate",
            StuckReason::EmptyRangeInvalid => "empty-range-invalid",
            StuckReason::DivByZero => "div-by-zero",
            StuckReason::NonValueScrutinee => "non-value-scrutinee",
        }
    }
}

impl fmt::Display for StuckReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of evaluating a term.
#[derive(Clone, Debug)]
pub enum EvalResult {
    Value(Term),
    Stuck { path: Path, reason: StuckReason },
    OutOfFuel,
}

impl EvalResult {
    pub fn is_value(&self) -> bool {
        matches!(self, EvalResult::Value(_))
    }

    pub fn value(&self) -> Option<&Term> {
        match self {
            EvalResult::Value(v) => Some(v),
            _ => None,
        }
    }
}

impl PartialEq for EvalResult {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (EvalResult::Value(a), EvalResult::Value(b)) => alpha_equal(a, b),
            (
                EvalResult::Stuck { path: p, reason: r },
                EvalResult::Stuck { path: q, reason: s },
            ) => p == q && r == s,
            (EvalResult::OutOfFuel, EvalResult::OutOfFuel) => true,
            _ => false,
        }
    }
}

impl fmt::Display for EvalResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalResult::Value(v) => write!(f, "{v}"),
            EvalResult::Stuck { reason, .. } => write!(f, "stuck:{reason}"),
            EvalResult::OutOfFuel => write!(f, "out-of-fuel"),
        }
    }
}

/// Runtime value. Integers that fit in `i64` are always stored as `Int`.
#[derive(Clone)]
pub enum Val {
    Int(i64),
    Big(Rc<BigInt>),
    Bool(bool),
    Unit,
    Pair(Rc<(Val, Val)>),
    Inl(Rc<Val>),
    Inr(Rc<Val>),
    List(Rc<Vec<Val>>),
    Clo(Rc<Closure>),
}

pub struct Closure {
    info: Rc<LamInfo>,
    env: Env,
}

impl Val {
    pub fn big(b: BigInt) -> Val {
        match b.to_i64() {
            Some(i) => Val::Int(i),
            None => Val::Big(Rc::new(b)),
        }
    }

    pub fn pair(a: Val, b: Val) -> Val {
        Val::Pair(Rc::new((a, b)))
    }

    pub fn list(items: Vec<Val>) -> Val {
        Val::List(Rc::new(items))
    }

    pub fn inl(v: Val) -> Val {
        Val::Inl(Rc::new(v))
    }

    pub fn inr(v: Val) -> Val {
        Val::Inr(Rc::new(v))
    }

    pub fn as_list(&self) -> Option<&[Val]> {
        match self {
            Val::List(xs) => Some(xs),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Val::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn to_bigint(&self) -> Option<BigInt> {
        match self {
            Val::Int(i) => Some(BigInt::from(*i)),
            Val::Big(b) => Some((**b).clone()),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Val::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Val, &Val)> {
        match self {
            Val::Pair(p) => Some((&p.0, &p.1)),
            _ => None,
        }
    }

    pub fn is_closure(&self) -> bool {
        matches!(self, Val::Clo(_))
    }

    /// Reads the value back as a closed value term.
    pub fn to_term(&self) -> Term {
        match self {
            Val::Int(i) => Term::int(*i),
            Val::Big(b) => Term::int((**b).clone()),
            Val::Bool(b) => Term::bool(*b),
            Val::Unit => Term::unit(),
            Val::Pair(p) => Term::pair(p.0.to_term(), p.1.to_term()),
            Val::Inl(v) => Term::inl(v.to_term()),
            Val::Inr(v) => Term::inr(v.to_term()),
            Val::List(xs) => Term::list(xs.iter().map(Val::to_term).collect()),
            Val::Clo(c) => {
                let env: Vec<(Name, Term)> = c
                    .info
                    .captures
                    .iter()
                    .filter_map(|(n, i)| c.env.get(*i).map(|v| (n.clone(), v.to_term())))
                    .collect();
                substitute_closed(&c.info.term, &env)
            }
        }
    }

    /// Converts a value term; `None` if the term is not a closed value.
    pub fn from_term(t: &Term) -> Option<Val> {
        if !is_value(t) || !free_vars(t).is_empty() {
            return None;
        }
        match Program::compile(t, &[]).run(&[], t.size() as Fuel + 1) {
            Outcome::Value(v) => Some(v),
            _ => None,
        }
    }

    /// Structural equality; closures compare by alpha-equality of their
    /// read-back terms.
    pub fn same(&self, other: &Val) -> bool {
        match (self, other) {
            (Val::Int(a), Val::Int(b)) => a == b,
            (Val::Big(a), Val::Big(b)) => a == b,
            (Val::Bool(a), Val::Bool(b)) => a == b,
            (Val::Unit, Val::Unit) => true,
            (Val::Pair(a), Val::Pair(b)) => Rc::ptr_eq(a, b) || (a.0.same(&b.0) && a.1.same(&b.1)),
            (Val::Inl(a), Val::Inl(b)) | (Val::Inr(a), Val::Inr(b)) => a.same(b),
            (Val::List(a), Val::List(b)) => {
                Rc::ptr_eq(a, b) || (a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| x.same(y)))
            }
            (Val::Clo(a), Val::Clo(b)) => {
                Rc::ptr_eq(a, b) || alpha_equal(&self.to_term(), &other.to_term())
            }
            _ => false,
        }
    }
}

impl PartialEq for Val {
    fn eq(&self, other: &Val) -> bool {
        self.same(other)
    }
}

impl fmt::Debug for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// Evaluation outcome on runtime values.
#[derive(Clone, Debug)]
pub enum Outcome {
    Value(Val),
    Stuck(Path, StuckReason),
    OutOfFuel,
}

impl Outcome {
    pub fn into_result(self) -> EvalResult {
        match self {
            Outcome::Value(v) => EvalResult::Value(v.to_term()),
            Outcome::Stuck(path, reason) => EvalResult::Stuck { path, reason },
            Outcome::OutOfFuel => EvalResult::OutOfFuel,
        }
    }

    pub fn value(&self) -> Option<&Val> {
        match self {
            Outcome::Value(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Clone, Default)]
struct Env(Option<Rc<EnvCell>>);

struct EnvCell {
    val: Val,
    next: Env,
}

impl Env {
    fn push(&self, val: Val) -> Env {
        Env(Some(Rc::new(EnvCell {
            val,
            next: self.clone(),
        })))
    }

    fn get(&self, mut i: u32) -> Option<&Val> {
        let mut cur = self.0.as_ref()?;
        while i > 0 {
            cur = cur.next.0.as_ref()?;
            i -= 1;
        }
        Some(&cur.val)
    }

    fn from_vals(vals: &[Val]) -> Env {
        vals.iter().fold(Env::default(), |e, v| e.push(v.clone()))
    }
}

struct LamInfo {
    body: Node,
    term: Term,
    /// Free variables of the lambda with their environment index.
    captures: Vec<(Name, u32)>,
}

struct Node {
    id: u32,
    kind: NodeKind,
}

enum NodeKind {
    Var(u32),
    Free,
    Lam(Rc<LamInfo>),
    Lit(Val),
    Case(Box<[Node; 3]>),
    Prim(Prim, Vec<Node>),
}

/// Node ids are drawn from one counter so that a failure inside a closure
/// compiled by another program is never reported at a position of this one.
static NEXT_ID: AtomicU32 = AtomicU32::new(0);

struct Compiler {
    base: u32,
    paths: Vec<Path>,
    index: HashMap<Path, u32>,
}

impl Compiler {
    fn new<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Compiler {
        let n: usize = terms.into_iter().map(Term::size).sum();
        Compiler {
            base: NEXT_ID.fetch_add(n as u32, Ordering::Relaxed),
            paths: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn node(&mut self, t: &Term, scope: &mut Vec<Name>, path: &mut Vec<usize>) -> Node {
        let id = self.base.wrapping_add(self.paths.len() as u32);
        let p = Path(path.clone());
        self.index.insert(p.clone(), id);
        self.paths.push(p);
        let kind = match t.kind() {
            TermKind::Var(x) => match scope.iter().rposition(|n| n == x) {
                Some(pos) => NodeKind::Var((scope.len() - 1 - pos) as u32),
                None => NodeKind::Free,
            },
            TermKind::Meta(_) => NodeKind::Free,
            TermKind::Int(i) => NodeKind::Lit(Val::big(i.clone())),
            TermKind::Bool(b) => NodeKind::Lit(Val::Bool(*b)),
            TermKind::Unit => NodeKind::Lit(Val::Unit),
            TermKind::Lam(x, b) => {
                let captures = free_vars(t)
                    .into_iter()
                    .filter_map(|n| {
                        scope
                            .iter()
                            .rposition(|m| *m == n)
                            .map(|pos| (n, (scope.len() - 1 - pos) as u32))
                    })
                    .collect();
                scope.push(x.clone());
                path.push(0);
                let body = self.node(b, scope, path);
                path.pop();
                scope.pop();
                NodeKind::Lam(Rc::new(LamInfo {
                    body,
                    term: t.clone(),
                    captures,
                }))
            }
            TermKind::Case(s, l, lb, r, rb) => {
                path.push(0);
                let s = self.node(s, scope, path);
                path.pop();
                scope.push(l.clone());
                path.push(1);
                let lb = self.node(lb, scope, path);
                path.pop();
                scope.pop();
                scope.push(r.clone());
                path.push(2);
                let rb = self.node(rb, scope, path);
                path.pop();
                scope.pop();
                NodeKind::Case(Box::new([s, lb, rb]))
            }
            TermKind::Prim(p, args) => {
                let mut kids = Vec::with_capacity(args.len());
                for (i, a) in args.iter().enumerate() {
                    path.push(i);
                    kids.push(self.node(a, scope, path));
                    path.pop();
                }
                NodeKind::Prim(*p, kids)
            }
        };
        Node { id, kind }
    }
}

/// A term compiled for repeated evaluation with its free `inputs` supplied
/// as runtime values.
pub struct Program {
    root: Node,
    base: u32,
    paths: Vec<Path>,
    index: HashMap<Path, u32>,
    inputs: Vec<Name>,
    term: Term,
}

/// Terms compiled in the scope of one position of a [`Program`]; evaluated
/// every time the machine reaches that position.
pub struct Probe {
    at: u32,
    nodes: Vec<Node>,
    base: u32,
    paths: Vec<Path>,
    fuel: Fuel,
}

impl Program {
    pub fn compile(t: &Term, inputs: &[Name]) -> Program {
        let mut c = Compiler::new([t]);
        let mut scope = inputs.to_vec();
        let root = c.node(t, &mut scope, &mut Vec::new());
        Program {
            root,
            base: c.base,
            paths: c.paths,
            index: c.index,
            inputs: inputs.to_vec(),
            term: t.clone(),
        }
    }

    pub fn term(&self) -> &Term {
        &self.term
    }

    pub fn inputs(&self) -> &[Name] {
        &self.inputs
    }

    /// Runs with `args` bound to the inputs, in order.
    pub fn run(&self, args: &[Val], fuel: Fuel) -> Outcome {
        let mut m = Machine {
            fuel,
            probe: None,
        };
        let env = Env::from_vals(args);
        let r = m.eval(&self.root, &env);
        self.outcome(r)
    }

    /// Compiles `terms` in the scope of the subterm at `at`. `None` if the
    /// path does not exist.
    pub fn probe(&self, at: &Path, terms: &[Term], fuel: Fuel) -> Option<Probe> {
        let id = *self.index.get(at)?;
        let mut scope = self.inputs.clone();
        scope.extend(self.term.binders_along(at)?);
        let mut c = Compiler::new(terms);
        let nodes = terms
            .iter()
            .map(|t| c.node(t, &mut scope.clone(), &mut Vec::new()))
            .collect();
        Some(Probe {
            at: id,
            nodes,
            base: c.base,
            paths: c.paths,
            fuel,
        })
    }

    /// Runs like [`Program::run`], calling `on_hit` with the probe outcomes
    /// each time evaluation reaches the probed position.
    pub fn run_probed(
        &self,
        args: &[Val],
        fuel: Fuel,
        probe: &Probe,
        on_hit: &mut dyn FnMut(&[Outcome]),
    ) -> Outcome {
        let mut m = Machine {
            fuel,
            probe: Some(ProbeState { probe, on_hit }),
        };
        let env = Env::from_vals(args);
        let r = m.eval(&self.root, &env);
        self.outcome(r)
    }

    fn outcome(&self, r: Result<Val, Fail>) -> Outcome {
        fail_to_outcome(r, self.base, &self.paths)
    }
}

/// A failure in code compiled elsewhere (a closure passed in as an input)
/// has no position in this program and is reported at the root.
fn fail_to_outcome(r: Result<Val, Fail>, base: u32, paths: &[Path]) -> Outcome {
    match r {
        Ok(v) => Outcome::Value(v),
        Err(Fail::Stuck(id, reason)) => {
            let at = paths.get(id.wrapping_sub(base) as usize).cloned().unwrap_or_else(Path::root);
            Outcome::Stuck(at, reason)
        }
        Err(Fail::OutOfFuel) => Outcome::OutOfFuel,
    }
}

enum Fail {
    Stuck(u32, StuckReason),
    OutOfFuel,
}

type R<T> = Result<T, Fail>;

struct ProbeState<'a> {
    probe: &'a Probe,
    on_hit: &'a mut dyn FnMut(&[Outcome]),
}

struct Machine<'a> {
    fuel: Fuel,
    probe: Option<ProbeState<'a>>,
}

fn stuck<T>(n: &Node, reason: StuckReason) -> R<T> {
    Err(Fail::Stuck(n.id, reason))
}

fn int_op(a: &Val, b: &Val, small: fn(i64, i64) -> Option<i64>, big: fn(BigInt, BigInt) -> BigInt) -> Option<Val> {
    if let (Val::Int(x), Val::Int(y)) = (a, b) {
        if let Some(r) = small(*x, *y) {
            return Some(Val::Int(r));
        }
    }
    Some(Val::big(big(a.to_bigint()?, b.to_bigint()?)))
}

fn int_cmp(a: &Val, b: &Val) -> Option<std::cmp::Ordering> {
    match (a, b) {
        (Val::Int(x), Val::Int(y)) => Some(x.cmp(y)),
        _ => Some(a.to_bigint()?.cmp(&b.to_bigint()?)),
    }
}

impl Machine<'_> {
    fn tick(&mut self) -> R<()> {
        if self.fuel == 0 {
            return Err(Fail::OutOfFuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn charge(&mut self, n: u64) -> R<()> {
        if self.fuel < n {
            self.fuel = 0;
            return Err(Fail::OutOfFuel);
        }
        self.fuel -= n;
        Ok(())
    }

    fn apply(&mut self, n: &Node, f: &Val, arg: Val) -> R<Val> {
        self.tick()?;
        match f {
            Val::Clo(c) => {
                let env = c.env.push(arg);
                let info = c.info.clone();
                self.eval(&info.body, &env)
            }
            _ => stuck(n, StuckReason::NonValueScrutinee),
        }
    }

    fn run_probe(&mut self, env: &Env) {
        let Some(ps) = self.probe.take() else { return };
        let saved = self.fuel;
        let mut outs = Vec::with_capacity(ps.probe.nodes.len());
        for node in &ps.probe.nodes {
            self.fuel = ps.probe.fuel;
            let r = self.eval(node, env);
            outs.push(fail_to_outcome(r, ps.probe.base, &ps.probe.paths));
        }
        self.fuel = saved;
        (ps.on_hit)(&outs);
        self.probe = Some(ps);
    }

    fn eval(&mut self, n: &Node, env: &Env) -> R<Val> {
        self.tick()?;
        if let Some(ps) = &self.probe {
            if ps.probe.at == n.id {
                self.run_probe(env);
            }
        }
        match &n.kind {
            NodeKind::Var(i) => match env.get(*i) {
                Some(v) => Ok(v.clone()),
                None => stuck(n, StuckReason::NonValueScrutinee),
            },
            NodeKind::Free => stuck(n, StuckReason::NonValueScrutinee),
            NodeKind::Lit(v) => Ok(v.clone()),
            NodeKind::Lam(info) => Ok(Val::Clo(Rc::new(Closure {
                info: info.clone(),
                env: env.clone(),
            }))),
            NodeKind::Case(parts) => {
                let s = self.eval(&parts[0], env)?;
                match s {
                    Val::Inl(v) => self.eval(&parts[1], &env.push((*v).clone())),
                    Val::Inr(v) => self.eval(&parts[2], &env.push((*v).clone())),
                    _ => stuck(n, StuckReason::NonValueScrutinee),
                }
            }
            NodeKind::Prim(p, args) => self.prim(n, *p, args, env),
        }
    }

    fn list(&mut self, n: &Node, a: &Node, env: &Env) -> R<Rc<Vec<Val>>> {
        match self.eval(a, env)? {
            Val::List(xs) => Ok(xs),
            _ => stuck(n, StuckReason::NonValueScrutinee),
        }
    }

    fn int(&mut self, n: &Node, a: &Node, env: &Env) -> R<Val> {
        match self.eval(a, env)? {
            v @ (Val::Int(_) | Val::Big(_)) => Ok(v),
            _ => stuck(n, StuckReason::NonValueScrutinee),
        }
    }

    /// Index into a list of length `len`, or out-of-bounds.
    fn index(&mut self, n: &Node, a: &Node, env: &Env, len: usize) -> R<usize> {
        let i = self.int(n, a, env)?;
        match i.as_i64() {
            Some(i) if i >= 0 && (i as u64) < len as u64 => Ok(i as usize),
            _ => stuck(n, StuckReason::OutOfBounds),
        }
    }

    fn prim(&mut self, n: &Node, p: Prim, a: &[Node], env: &Env) -> R<Val> {
        use StuckReason::*;
        match p {
            Prim::App => {
                let f = self.eval(&a[0], env)?;
                let x = self.eval(&a[1], env)?;
                self.apply(n, &f, x)
            }
            Prim::Add | Prim::Sub | Prim::Mul | Prim::Div => {
                let x = self.int(n, &a[0], env)?;
                let y = self.int(n, &a[1], env)?;
                let r = match p {
                    Prim::Add => int_op(&x, &y, i64::checked_add, |a, b| a + b),
                    Prim::Sub => int_op(&x, &y, i64::checked_sub, |a, b| a - b),
                    Prim::Mul => int_op(&x, &y, i64::checked_mul, |a, b| a * b),
                    _ => {
                        if y.to_bigint().is_some_and(|b| b.is_zero()) {
                            return stuck(n, DivByZero);
                        }
                        int_op(&x, &y, i64::checked_div, |a, b| a / b)
                    }
                };
                r.map_or_else(|| stuck(n, NonValueScrutinee), Ok)
            }
            Prim::Gt | Prim::Lt => {
                let x = self.int(n, &a[0], env)?;
                let y = self.int(n, &a[1], env)?;
                let ord = int_cmp(&x, &y).expect("integers compare");
                Ok(Val::Bool(if p == Prim::Gt { ord.is_gt() } else { ord.is_lt() }))
            }
            Prim::Pair => {
                let x = self.eval(&a[0], env)?;
                let y = self.eval(&a[1], env)?;
                Ok(Val::pair(x, y))
            }
            Prim::Fst | Prim::Snd => match self.eval(&a[0], env)? {
                Val::Pair(pr) => Ok(if p == Prim::Fst { pr.0.clone() } else { pr.1.clone() }),
                _ => stuck(n, NonValueScrutinee),
            },
            Prim::Inl => Ok(Val::inl(self.eval(&a[0], env)?)),
            Prim::Inr => Ok(Val::inr(self.eval(&a[0], env)?)),
            Prim::Iter => {
                let f = self.eval(&a[0], env)?;
                let mut s = self.eval(&a[1], env)?;
                loop {
                    self.tick()?;
                    match self.apply(n, &f, s.clone())? {
                        Val::Inl(u) if matches!(*u, Val::Unit) => return Ok(s),
                        Val::Inr(next) => s = (*next).clone(),
                        _ => return stuck(n, NonValueScrutinee),
                    }
                }
            }
            Prim::Fold => {
                let f = self.eval(&a[0], env)?;
                let mut acc = self.eval(&a[1], env)?;
                let xs = self.list(n, &a[2], env)?;
                if !f.is_closure() {
                    return stuck(n, NonValueScrutinee);
                }
                for x in xs.iter() {
                    self.tick()?;
                    acc = self.apply(n, &f, Val::pair(acc, x.clone()))?;
                }
                Ok(acc)
            }
            Prim::If => match self.eval(&a[0], env)? {
                Val::Bool(true) => self.eval(&a[1], env),
                Val::Bool(false) => self.eval(&a[2], env),
                _ => stuck(n, NonValueScrutinee),
            },
            Prim::Read => {
                let xs = self.list(n, &a[0], env)?;
                let i = self.index(n, &a[1], env, xs.len())?;
                Ok(xs[i].clone())
            }
            Prim::Write => {
                let mut xs = self.list(n, &a[0], env)?;
                let i = self.index(n, &a[1], env, xs.len())?;
                let v = self.eval(&a[2], env)?;
                Rc::make_mut(&mut xs)[i] = v;
                Ok(Val::List(xs))
            }
            Prim::ReadAtKey => {
                let xs = self.list(n, &a[0], env)?;
                let k = self.eval(&a[1], env)?;
                for kv in xs.iter() {
                    match kv.as_pair() {
                        Some((key, v)) if key.same(&k) => return Ok(Val::inr(v.clone())),
                        Some(_) => {}
                        None => return stuck(n, NonValueScrutinee),
                    }
                }
                Ok(Val::inl(Val::Unit))
            }
            Prim::WriteAtKey => {
                let mut xs = self.list(n, &a[0], env)?;
                let k = self.eval(&a[1], env)?;
                let v = self.eval(&a[2], env)?;
                let mut hit = None;
                for (i, kv) in xs.iter().enumerate() {
                    match kv.as_pair() {
                        Some((key, _)) if key.same(&k) => {
                            hit = Some(i);
                            break;
                        }
                        Some(_) => {}
                        None => return stuck(n, NonValueScrutinee),
                    }
                }
                let items = Rc::make_mut(&mut xs);
                match hit {
                    Some(i) => items[i] = Val::pair(k, v),
                    None => items.push(Val::pair(k, v)),
                }
                Ok(Val::List(xs))
            }
            Prim::Replicate => {
                let count = self.int(n, &a[0], env)?;
                let v = self.eval(&a[1], env)?;
                match count.as_i64() {
                    Some(c) if c < 0 => stuck(n, NegativeReplicate),
                    Some(c) => {
                        self.charge(c as u64)?;
                        Ok(Val::list(vec![v; c as usize]))
                    }
                    None if count.to_bigint().is_some_and(|b| b < BigInt::zero()) => {
                        stuck(n, NegativeReplicate)
                    }
                    None => Err(Fail::OutOfFuel),
                }
            }
            Prim::Range => {
                let lo = self.eval(&a[0], env)?;
                let hi = self.eval(&a[1], env)?;
                let (Some(l), Some(h)) = (lo.to_bigint(), hi.to_bigint()) else {
                    return stuck(n, EmptyRangeInvalid);
                };
                if h <= l {
                    return Ok(Val::list(Vec::new()));
                }
                let len = (&h - &l).to_u64().ok_or(Fail::OutOfFuel)?;
                self.charge(len)?;
                Ok(Val::list(
                    (0..len).map(|k| Val::big(&l + BigInt::from(k))).collect(),
                ))
            }
            Prim::Length => {
                let xs = self.list(n, &a[0], env)?;
                Ok(Val::Int(xs.len() as i64))
            }
            Prim::Map => {
                let xs = self.list(n, &a[1], env)?;
                if xs.is_empty() {
                    return Ok(Val::list(Vec::new()));
                }
                let f = self.eval(&a[0], env)?;
                let mut out = Vec::with_capacity(xs.len());
                for x in xs.iter() {
                    out.push(self.apply(n, &f, x.clone())?);
                }
                Ok(Val::list(out))
            }
            Prim::Group => {
                let xs = self.list(n, &a[0], env)?;
                let mut groups: Vec<(Val, Vec<Val>)> = Vec::new();
                for kv in xs.iter() {
                    self.tick()?;
                    let Some((k, v)) = kv.as_pair() else {
                        return stuck(n, NonValueScrutinee);
                    };
                    match groups.iter_mut().find(|(g, _)| g.same(k)) {
                        Some((_, vs)) => vs.push(v.clone()),
                        None => groups.push((k.clone(), vec![v.clone()])),
                    }
                }
                Ok(Val::list(
                    groups.into_iter().map(|(k, vs)| Val::pair(k, Val::list(vs))).collect(),
                ))
            }
            Prim::Zip => {
                let xs = self.list(n, &a[0], env)?;
                let ys = self.list(n, &a[1], env)?;
                if xs.len() != ys.len() {
                    return stuck(n, ZipLengthMismatch);
                }
                Ok(Val::list(
                    xs.iter().zip(ys.iter()).map(|(x, y)| Val::pair(x.clone(), y.clone())).collect(),
                ))
            }
            Prim::Concat => {
                let xss = self.list(n, &a[0], env)?;
                let mut out = Vec::new();
                for xs in xss.iter() {
                    match xs.as_list() {
                        Some(items) => out.extend(items.iter().cloned()),
                        None => return stuck(n, NonValueScrutinee),
                    }
                }
                Ok(Val::list(out))
            }
            Prim::List => {
                let mut out = Vec::with_capacity(a.len());
                for x in a {
                    out.push(self.eval(x, env)?);
                }
                Ok(Val::list(out))
            }
        }
    }
}

/// Evaluates a closed term.
pub fn eval(t: &Term, fuel: Fuel) -> EvalResult {
    Program::compile(t, &[]).run(&[], fuel).into_result()
}

/// Evaluates the curried application of `t` to `args`.
pub fn run_program(t: &Term, args: &[Term], fuel: Fuel) -> EvalResult {
    let applied = args.iter().fold(t.clone(), |f, a| Term::app(f, a.clone()));
    eval(&applied, fuel)
}

/// Syntactic value check: abstractions, literals, unit, and pairs,
/// injections and array literals of values.
pub fn is_value(t: &Term) -> bool {
    match t.kind() {
        TermKind::Lam(..) | TermKind::Int(_) | TermKind::Bool(_) | TermKind::Unit => true,
        TermKind::Prim(Prim::Pair | Prim::Inl | Prim::Inr | Prim::List, args) => args.iter().all(is_value),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn ev(src: &str) -> EvalResult {
        eval(&parse_term(src).unwrap(), 100_000)
    }

    fn val(src: &str) -> Term {
        parse_term(src).unwrap()
    }

    #[test]
    fn closure_from_another_program_gets_stuck_at_the_root() {
        let deep = val("(lam x (add 1 (add 2 (add 3 (read (list) x)))))");
        let f = Program::compile(&deep, &[]).run(&[], 1000).value().cloned().unwrap();
        let (g, x) = (Name::from("g"), Name::from("x"));
        let apply = Program::compile(&Term::app(Term::var(g.clone()), Term::var(x.clone())), &[g, x]);
        match apply.run(&[f, Val::Int(0)], 1000) {
            Outcome::Stuck(at, StuckReason::OutOfBounds) => assert!(at.is_root()),
            _ => panic!("expected out-of-bounds"),
        }
    }

    #[test]
    fn sum_arrays_fold() {
        let prog = val(
            "(lam xs (lam ys (lam n (fold (lam (sum i) (write sum i (add (read xs i) (read ys i)))) (replicate n 0) (range 0 n)))))",
        );
        let r = run_program(&prog, &[val("(list 1 2)"), val("(list 3 4)"), val("2")], 100_000);
        assert_eq!(r, EvalResult::Value(val("(list 4 6)")));
    }

    #[test]
    fn group_keeps_first_occurrence_order() {
        assert_eq!(
            ev("(group (list (pair 1 10) (pair 2 20) (pair 1 30)))"),
            EvalResult::Value(val("(list (pair 1 (list 10 30)) (pair 2 (list 20)))"))
        );
    }

    #[test]
    fn stuck_and_fuel() {
        assert_eq!(ev("(iter (lam s (inr s)) 0)"), EvalResult::OutOfFuel);
        match ev("(read (list 1 2) 5)") {
            EvalResult::Stuck { reason, path } => {
                assert_eq!(reason, StuckReason::OutOfBounds);
                assert!(path.is_root());
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(ev("(readk (list (pair 1 10)) 2)"), EvalResult::Value(val("(inl unit)")));
    }

    #[test]
    fn division_truncates_toward_zero() {
        assert_eq!(ev("(div -7 2)"), EvalResult::Value(val("-3")));
        assert_eq!(ev("(div 7 -2)"), EvalResult::Value(val("-3")));
        assert!(matches!(
            ev("(div 1 0)"),
            EvalResult::Stuck { reason: StuckReason::DivByZero, .. }
        ));
    }

    #[test]
    fn overflow_promotes_to_bigint() {
        let r = ev("(mul 9223372036854775807 2)");
        assert_eq!(r, EvalResult::Value(val("18446744073709551614")));
        assert_eq!(ev("(sub (mul 9223372036854775807 2) 9223372036854775807)"), EvalResult::Value(val("9223372036854775807")));
    }

    #[test]
    fn closures_read_back_with_captures() {
        let r = ev("(app (lam y (lam x (add x y))) 3)");
        assert_eq!(r, EvalResult::Value(val("(lam x (add x 3))")));
    }

    #[test]
    fn run_program_with_no_args_returns_term() {
        let id = val("(lam x x)");
        assert_eq!(run_program(&id, &[], 100), EvalResult::Value(id.clone()));
        assert_eq!(run_program(&val("(lam x (add x 1))"), &[val("41")], 100), EvalResult::Value(val("42")));
    }

    #[test]
    fn is_value_cases() {
        assert!(is_value(&val("(lam x x)")));
        assert!(!is_value(&val("(add 1 2)")));
        assert!(!is_value(&val("(pair 1 (add 1 2))")));
        assert!(is_value(&val("(list (inl 1) (inr true))")));
    }

    #[test]
    fn stuck_path_points_into_term() {
        match ev("(pair 1 (read (list) 0))") {
            EvalResult::Stuck { path, reason } => {
                assert_eq!(path, Path(vec![1]));
                assert_eq!(reason, StuckReason::OutOfBounds);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn map_over_empty_list_ignores_function() {
        assert_eq!(ev("(map (read (list) 0) (list))"), EvalResult::Value(val("(list)")));
        // fold still needs its function to be a value
        assert!(matches!(ev("(fold (read (list) 0) 0 (list))"), EvalResult::Stuck { .. }));
    }

    #[test]
    fn probe_sees_every_iteration() {
        let t = val("(fold (lam (acc x) (add acc x)) 0 (list 1 2 3))");
        let prog = Program::compile(&t, &[]);
        let probe = prog
            .probe(&Path(vec![0, 0]), &[val("(snd p)")], 1000)
            .expect("path exists");
        let mut seen = Vec::new();
        let out = prog.run_probed(&[], 1000, &probe, &mut |o| seen.push(o[0].value().unwrap().as_i64().unwrap()));
        assert_eq!(out.value().and_then(Val::as_i64), Some(6));
        assert_eq!(seen, vec![1, 2, 3]);
    }
}
