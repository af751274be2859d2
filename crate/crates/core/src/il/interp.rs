//! Direct IL interpreter working on the source AST. It shares no code with
//! the FFL evaluator, so agreement between the two checks the translation.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::ast::*;
use crate::term::{Name, Term};

#[derive(Clone)]
pub enum IlValue {
    Int(BigInt),
    Bool(bool),
    Unit,
    Pair(Box<IlValue>, Box<IlValue>),
    Inl(Box<IlValue>),
    Inr(Box<IlValue>),
    List(Vec<IlValue>),
    Fun(Rc<Closure>),
}

pub struct Closure {
    param: Pattern,
    body: Expr,
    env: Env,
}

impl fmt::Debug for IlValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IlValue::Int(n) => write!(f, "{n}"),
            IlValue::Bool(b) => write!(f, "{b}"),
            IlValue::Unit => write!(f, "unit"),
            IlValue::Pair(a, b) => write!(f, "({a:?}, {b:?})"),
            IlValue::Inl(a) => write!(f, "inl({a:?})"),
            IlValue::Inr(a) => write!(f, "inr({a:?})"),
            IlValue::List(xs) => f.debug_list().entries(xs).finish(),
            IlValue::Fun(_) => write!(f, "<fun>"),
        }
    }
}

impl IlValue {
    /// FFL term with the same meaning. Functions have none and give `None`.
    pub fn to_term(&self) -> Option<Term> {
        Some(match self {
            IlValue::Int(n) => Term::int(n.clone()),
            IlValue::Bool(b) => Term::bool(*b),
            IlValue::Unit => Term::unit(),
            IlValue::Pair(a, b) => Term::pair(a.to_term()?, b.to_term()?),
            IlValue::Inl(a) => Term::inl(a.to_term()?),
            IlValue::Inr(a) => Term::inr(a.to_term()?),
            IlValue::List(xs) => Term::list(xs.iter().map(|x| x.to_term()).collect::<Option<_>>()?),
            IlValue::Fun(_) => return None,
        })
    }

    /// Reads a closed first-order FFL value.
    pub fn from_term(t: &Term) -> Option<IlValue> {
        use crate::term::{Prim, TermKind};
        Some(match t.kind() {
            TermKind::Int(n) => IlValue::Int(n.clone()),
            TermKind::Bool(b) => IlValue::Bool(*b),
            TermKind::Unit => IlValue::Unit,
            TermKind::Prim(Prim::Pair, a) => {
                IlValue::Pair(Box::new(Self::from_term(&a[0])?), Box::new(Self::from_term(&a[1])?))
            }
            TermKind::Prim(Prim::Inl, a) => IlValue::Inl(Box::new(Self::from_term(&a[0])?)),
            TermKind::Prim(Prim::Inr, a) => IlValue::Inr(Box::new(Self::from_term(&a[0])?)),
            TermKind::Prim(Prim::List, a) => IlValue::List(a.iter().map(Self::from_term).collect::<Option<_>>()?),
            _ => return None,
        })
    }

    fn eq_data(&self, o: &IlValue) -> bool {
        match (self, o) {
            (IlValue::Int(a), IlValue::Int(b)) => a == b,
            (IlValue::Bool(a), IlValue::Bool(b)) => a == b,
            (IlValue::Unit, IlValue::Unit) => true,
            (IlValue::Pair(a, b), IlValue::Pair(c, d)) => a.eq_data(c) && b.eq_data(d),
            (IlValue::Inl(a), IlValue::Inl(b)) | (IlValue::Inr(a), IlValue::Inr(b)) => a.eq_data(b),
            (IlValue::List(a), IlValue::List(b)) => a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.eq_data(y)),
            _ => false,
        }
    }
}

/// Why a run produced no value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IlFailure {
    /// A partial operation was applied outside its domain.
    Stuck(String),
    OutOfFuel,
}

type Env = HashMap<Name, IlValue>;
type R<T> = Result<T, IlFailure>;

fn stuck<T>(why: &str) -> R<T> {
    Err(IlFailure::Stuck(why.to_string()))
}

struct Interp {
    fuel: u64,
}

enum Flow {
    Next,
    Return(IlValue),
}

/// Runs `p` on `args` (one per parameter).
pub fn run_il(p: &IlProgram, args: &[IlValue], fuel: u64) -> Result<IlValue, IlFailure> {
    assert_eq!(args.len(), p.params.len(), "argument count");
    let mut env: Env = p.params.iter().map(|(x, _)| x.clone()).zip(args.iter().cloned()).collect();
    let mut it = Interp { fuel };
    match it.block(&p.body, &mut env)? {
        Flow::Return(v) => Ok(v),
        Flow::Next => stuck("fell off the end"),
    }
}

fn int(v: &IlValue) -> R<&BigInt> {
    match v {
        IlValue::Int(n) => Ok(n),
        _ => stuck("expected an integer"),
    }
}

fn boolean(v: &IlValue) -> R<bool> {
    match v {
        IlValue::Bool(b) => Ok(*b),
        _ => stuck("expected a boolean"),
    }
}

fn list(v: IlValue) -> R<Vec<IlValue>> {
    match v {
        IlValue::List(xs) => Ok(xs),
        _ => stuck("expected a list"),
    }
}

fn index(i: &BigInt, len: usize) -> R<usize> {
    match i.to_usize() {
        Some(k) if k < len => Ok(k),
        _ => stuck("index out of bounds"),
    }
}

fn pair(v: IlValue) -> R<(IlValue, IlValue)> {
    match v {
        IlValue::Pair(a, b) => Ok((*a, *b)),
        _ => stuck("expected a pair"),
    }
}

fn bind_pattern(p: &Pattern, v: IlValue, env: &mut Env) -> R<()> {
    match p {
        Pattern::Var(x) => {
            env.insert(x.clone(), v);
            Ok(())
        }
        Pattern::Tuple(a, b) => {
            let (va, vb) = pair(v)?;
            bind_pattern(a, va, env)?;
            bind_pattern(b, vb, env)
        }
    }
}

impl Interp {
    fn tick(&mut self) -> R<()> {
        if self.fuel == 0 {
            return Err(IlFailure::OutOfFuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn block(&mut self, stmts: &[Stmt], env: &mut Env) -> R<Flow> {
        for s in stmts {
            self.tick()?;
            match &s.kind {
                StmtKind::Assign(p, e) => {
                    let v = self.expr(e, env)?;
                    bind_pattern(p, v, env)?;
                }
                StmtKind::AssignIndex(x, i, v) => {
                    let i = self.expr(i, env)?;
                    let v = self.expr(v, env)?;
                    let mut xs = list(env[x].clone())?;
                    let k = index(int(&i)?, xs.len())?;
                    xs[k] = v;
                    env.insert(x.clone(), IlValue::List(xs));
                }
                StmtKind::For { var, lo, hi, inclusive, body } => {
                    let lo = int(&self.expr(lo, env)?)?.clone();
                    let mut hi = int(&self.expr(hi, env)?)?.clone();
                    if *inclusive {
                        hi += 1;
                    }
                    let mut i = lo;
                    while i < hi {
                        self.tick()?;
                        env.insert(var.clone(), IlValue::Int(i.clone()));
                        if let Flow::Return(v) = self.block(body, env)? {
                            return Ok(Flow::Return(v));
                        }
                        i += 1;
                    }
                    env.remove(var);
                }
                StmtKind::Foreach { pat, iter, body } => {
                    let xs = list(self.expr(iter, env)?)?;
                    for x in xs {
                        self.tick()?;
                        bind_pattern(pat, x, env)?;
                        if let Flow::Return(v) = self.block(body, env)? {
                            return Ok(Flow::Return(v));
                        }
                    }
                    for x in pat.vars() {
                        env.remove(&x);
                    }
                }
                StmtKind::While { cond, body } => loop {
                    self.tick()?;
                    if !boolean(&self.expr(cond, env)?)? {
                        break;
                    }
                    if let Flow::Return(v) = self.block(body, env)? {
                        return Ok(Flow::Return(v));
                    }
                },
                StmtKind::If { cond, then_b, else_b } => {
                    let b = boolean(&self.expr(cond, env)?)?;
                    let flow = self.block(if b { then_b } else { else_b }, env)?;
                    if let Flow::Return(v) = flow {
                        return Ok(Flow::Return(v));
                    }
                }
                StmtKind::Return(e) => return Ok(Flow::Return(self.expr(e, env)?)),
            }
        }
        Ok(Flow::Next)
    }

    fn apply(&mut self, f: &IlValue, arg: IlValue) -> R<IlValue> {
        self.tick()?;
        let IlValue::Fun(c) = f else {
            return stuck("applying a non-function");
        };
        let mut env = c.env.clone();
        bind_pattern(&c.param, arg, &mut env)?;
        self.expr(&c.body, &env)
    }

    fn expr(&mut self, e: &Expr, env: &Env) -> R<IlValue> {
        self.tick()?;
        Ok(match e {
            Expr::Int(n) => IlValue::Int(n.clone()),
            Expr::Bool(b) => IlValue::Bool(*b),
            Expr::Unit => IlValue::Unit,
            Expr::Var(x) => match env.get(x) {
                Some(v) => v.clone(),
                None => return stuck("unbound variable"),
            },
            Expr::Tuple(a, b) => IlValue::Pair(Box::new(self.expr(a, env)?), Box::new(self.expr(b, env)?)),
            Expr::List(xs) => IlValue::List(xs.iter().map(|x| self.expr(x, env)).collect::<R<_>>()?),
            Expr::Index(a, i) => {
                let xs = list(self.expr(a, env)?)?;
                let i = self.expr(i, env)?;
                let k = index(int(&i)?, xs.len())?;
                xs.into_iter().nth(k).unwrap()
            }
            Expr::Lambda(p, body) => {
                IlValue::Fun(Rc::new(Closure { param: p.clone(), body: (**body).clone(), env: env.clone() }))
            }
            Expr::If(c, a, b) => {
                if boolean(&self.expr(c, env)?)? {
                    self.expr(a, env)?
                } else {
                    self.expr(b, env)?
                }
            }
            Expr::Unary(UnOp::Neg, a) => IlValue::Int(-int(&self.expr(a, env)?)?.clone()),
            Expr::Unary(UnOp::Not, a) => IlValue::Bool(!boolean(&self.expr(a, env)?)?),
            Expr::Binary(BinOp::And, a, b) => {
                IlValue::Bool(boolean(&self.expr(a, env)?)? && boolean(&self.expr(b, env)?)?)
            }
            Expr::Binary(BinOp::Or, a, b) => {
                IlValue::Bool(boolean(&self.expr(a, env)?)? || boolean(&self.expr(b, env)?)?)
            }
            Expr::Binary(op, a, b) => {
                let x = self.expr(a, env)?;
                let y = self.expr(b, env)?;
                let (x, y) = (int(&x)?, int(&y)?);
                match op {
                    BinOp::Add => IlValue::Int(x + y),
                    BinOp::Sub => IlValue::Int(x - y),
                    BinOp::Mul => IlValue::Int(x * y),
                    BinOp::Div => {
                        if y.is_zero() {
                            return stuck("division by zero");
                        }
                        // BigInt division truncates toward zero.
                        IlValue::Int(x / y)
                    }
                    BinOp::Lt => IlValue::Bool(x < y),
                    BinOp::Gt => IlValue::Bool(x > y),
                    BinOp::Le => IlValue::Bool(x <= y),
                    BinOp::Ge => IlValue::Bool(x >= y),
                    BinOp::Eq => IlValue::Bool(x == y),
                    BinOp::Ne => IlValue::Bool(x != y),
                    BinOp::And | BinOp::Or => unreachable!(),
                }
            }
            Expr::Call(f, args) => self.call(f, args, env)?,
        })
    }

    fn call(&mut self, f: &str, args: &[Expr], env: &Env) -> R<IlValue> {
        if f == "case" {
            let s = self.expr(&args[0], env)?;
            return match s {
                IlValue::Inl(v) => {
                    let g = self.expr(&args[1], env)?;
                    self.apply(&g, *v)
                }
                IlValue::Inr(v) => {
                    let g = self.expr(&args[2], env)?;
                    self.apply(&g, *v)
                }
                _ => stuck("case on a non-sum"),
            };
        }
        if builtin_arity(f).is_none() {
            let g = match env.get(f) {
                Some(g) => g.clone(),
                None => return stuck("unknown function"),
            };
            if args.is_empty() {
                return self.apply(&g, IlValue::Unit);
            }
            let mut acc = g;
            for a in args {
                let v = self.expr(a, env)?;
                acc = self.apply(&acc, v)?;
            }
            return Ok(acc);
        }
        // map evaluates its list before its function and skips the function
        // for an empty list.
        if f == "map" || f == "flatMap" {
            let xs = list(self.expr(&args[1], env)?)?;
            if xs.is_empty() {
                return Ok(IlValue::List(Vec::new()));
            }
            let g = self.expr(&args[0], env)?;
            let mut out = Vec::new();
            for x in xs {
                let y = self.apply(&g, x)?;
                if f == "map" {
                    out.push(y);
                } else {
                    out.extend(list(y)?);
                }
            }
            return Ok(IlValue::List(out));
        }
        let vs: Vec<IlValue> = args.iter().map(|a| self.expr(a, env)).collect::<R<_>>()?;
        let mut vs = vs.into_iter();
        let mut next = || vs.next().unwrap();
        Ok(match f {
            "reduce" | "fold" => {
                let g = next();
                let mut acc = next();
                let xs = list(next())?;
                if !matches!(g, IlValue::Fun(_)) {
                    return stuck("fold with a non-function");
                }
                for x in xs {
                    self.tick()?;
                    acc = self.apply(&g, IlValue::Pair(Box::new(acc), Box::new(x)))?;
                }
                acc
            }
            "iter" => {
                let g = next();
                let mut s = next();
                loop {
                    self.tick()?;
                    match self.apply(&g, s.clone())? {
                        IlValue::Inl(_) => break s,
                        IlValue::Inr(t) => s = *t,
                        _ => return stuck("iter step returned a non-sum"),
                    }
                }
            }
            "zip" => {
                let a = list(next())?;
                let b = list(next())?;
                if a.len() != b.len() {
                    return stuck("zip of unequal lengths");
                }
                IlValue::List(a.into_iter().zip(b).map(|(x, y)| IlValue::Pair(Box::new(x), Box::new(y))).collect())
            }
            "group" => {
                let mut keys: Vec<(IlValue, Vec<IlValue>)> = Vec::new();
                for kv in list(next())? {
                    self.tick()?;
                    let (k, v) = pair(kv)?;
                    match keys.iter_mut().find(|(k2, _)| k2.eq_data(&k)) {
                        Some((_, vs)) => vs.push(v),
                        None => keys.push((k, vec![v])),
                    }
                }
                IlValue::List(
                    keys.into_iter().map(|(k, vs)| IlValue::Pair(Box::new(k), Box::new(IlValue::List(vs)))).collect(),
                )
            }
            "replicate" => {
                let n = int(&next())?.clone();
                let v = next();
                if n.is_negative() {
                    return stuck("negative replicate");
                }
                let n = n.to_usize().ok_or(IlFailure::OutOfFuel)?;
                for _ in 0..n {
                    self.tick()?;
                }
                IlValue::List(vec![v; n])
            }
            "length" => IlValue::Int(BigInt::from(list(next())?.len())),
            "fst" => pair(next())?.0,
            "snd" => pair(next())?.1,
            "range" => {
                let lo = int(&next())?.clone();
                let hi = int(&next())?.clone();
                let mut out = Vec::new();
                let mut i = lo;
                while i < hi {
                    self.tick()?;
                    out.push(IlValue::Int(i.clone()));
                    i += 1;
                }
                IlValue::List(out)
            }
            "concat" => {
                let mut out = Vec::new();
                for xs in list(next())? {
                    out.extend(list(xs)?);
                }
                IlValue::List(out)
            }
            "readk" => {
                let xs = list(next())?;
                let k = next();
                let mut found = IlValue::Inl(Box::new(IlValue::Unit));
                for kv in xs {
                    let (k2, v) = pair(kv)?;
                    if k2.eq_data(&k) {
                        found = IlValue::Inr(Box::new(v));
                        break;
                    }
                }
                found
            }
            "writek" => {
                let mut xs = list(next())?;
                let k = next();
                let v = next();
                let mut hit = false;
                for slot in xs.iter_mut() {
                    let (k2, _) = pair(slot.clone())?;
                    if k2.eq_data(&k) {
                        *slot = IlValue::Pair(Box::new(k2), Box::new(v.clone()));
                        hit = true;
                        break;
                    }
                }
                if !hit {
                    xs.push(IlValue::Pair(Box::new(k), Box::new(v)));
                }
                IlValue::List(xs)
            }
            "inl" => IlValue::Inl(Box::new(next())),
            "inr" => IlValue::Inr(Box::new(next())),
            other => unreachable!("builtin {other}"),
        })
    }
}
