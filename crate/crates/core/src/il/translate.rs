//! IL to FFL. Locals become lambda-bound names; loops carry the variables
//! that stay live as a right-nested tuple.

use std::collections::{BTreeSet, HashMap};

use super::ast::*;
use super::check::typecheck_il;
use super::IlError;
use crate::binding::{free_vars, fresh_name};
use crate::norm::{atomic, inline_lets};
use crate::syntax::{bind, Binder};
use crate::term::{Name, Prim, Term, TermKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LoopMode {
    /// Counted loops become `fold` over `range`.
    #[default]
    Fold,
    /// Counted loops become `iter` with the counter first in the state.
    Iter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TranslateOptions {
    pub for_loops: LoopMode,
    /// Inline single-use lets where that cannot change behavior.
    pub inline: bool,
}

impl Default for TranslateOptions {
    fn default() -> Self {
        TranslateOptions { for_loops: LoopMode::Fold, inline: true }
    }
}

pub fn translate(p: &IlProgram) -> Result<Term, IlError> {
    translate_with(p, TranslateOptions::default())
}

pub fn translate_with(p: &IlProgram, opts: TranslateOptions) -> Result<Term, IlError> {
    typecheck_il(p)?;
    let mut order = HashMap::new();
    for (x, _) in &p.params {
        let n = order.len();
        order.entry(x.clone()).or_insert(n);
    }
    number_assignments(&p.body, &mut order);
    let mut live = Liveness::default();
    live.block(&p.body, &BTreeSet::new());
    let tr = Translator { order, live, opts };
    let mut body = tr.block(&p.body, &Tail::Return)?;
    for (x, _) in p.params.iter().rev() {
        body = Term::lam(x.clone(), body);
    }
    Ok(if opts.inline { inline_lets(&body) } else { body })
}

fn number_assignments(stmts: &[Stmt], order: &mut HashMap<Name, usize>) {
    for s in stmts {
        let mut direct = Vec::new();
        match &s.kind {
            StmtKind::Assign(p, _) => direct = p.vars(),
            StmtKind::AssignIndex(x, _, _) => direct.push(x.clone()),
            StmtKind::For { body, .. } | StmtKind::Foreach { body, .. } | StmtKind::While { body, .. } => {
                number_assignments(body, order)
            }
            StmtKind::If { then_b, else_b, .. } => {
                number_assignments(then_b, order);
                number_assignments(else_b, order);
            }
            StmtKind::Return(_) => {}
        }
        for x in direct {
            let n = order.len();
            order.entry(x).or_insert(n);
        }
    }
}

type Set = BTreeSet<Name>;

/// Backward liveness. Records the live-out set of each compound statement
/// and the live set at each loop head.
#[derive(Default)]
struct Liveness {
    after: HashMap<usize, Set>,
    head: HashMap<usize, Set>,
}

impl Liveness {
    fn block(&mut self, stmts: &[Stmt], out: &Set) -> Set {
        let mut live = out.clone();
        for s in stmts.iter().rev() {
            live = self.stmt(s, &live);
        }
        live
    }

    fn stmt(&mut self, s: &Stmt, out: &Set) -> Set {
        match &s.kind {
            StmtKind::Assign(p, e) => {
                let mut l = out.clone();
                for x in p.vars() {
                    l.remove(&x);
                }
                l.extend(e.free_vars());
                l
            }
            StmtKind::AssignIndex(x, i, v) => {
                let mut l = out.clone();
                l.insert(x.clone());
                l.extend(i.free_vars());
                l.extend(v.free_vars());
                l
            }
            StmtKind::Return(e) => e.free_vars(),
            StmtKind::If { cond, then_b, else_b } => {
                self.after.insert(s.id, out.clone());
                let mut l = self.block(then_b, out);
                l.extend(self.block(else_b, out));
                l.extend(cond.free_vars());
                l
            }
            StmtKind::For { var, lo, hi, body, .. } => {
                let h = self.fix(s.id, out, body, &[var.clone()], &Set::new());
                let mut l = h;
                l.extend(lo.free_vars());
                l.extend(hi.free_vars());
                l
            }
            StmtKind::Foreach { pat, iter, body } => {
                let mut l = self.fix(s.id, out, body, &pat.vars(), &Set::new());
                l.extend(iter.free_vars());
                l
            }
            StmtKind::While { cond, body } => self.fix(s.id, out, body, &[], &cond.free_vars()),
        }
    }

    fn fix(&mut self, id: usize, out: &Set, body: &[Stmt], locals: &[Name], extra: &Set) -> Set {
        self.after.insert(id, out.clone());
        let mut h: Set = out.union(extra).cloned().collect();
        loop {
            let mut next = self.block(body, &h);
            for x in locals {
                next.remove(x);
            }
            next.extend(out.iter().cloned());
            next.extend(extra.iter().cloned());
            if next == h {
                self.head.insert(id, h.clone());
                return h;
            }
            h = next;
        }
    }
}

enum Tail<'a> {
    Return,
    Vars(&'a [Name]),
}

struct Translator {
    order: HashMap<Name, usize>,
    live: Liveness,
    opts: TranslateOptions,
}

fn contains_return(stmts: &[Stmt]) -> bool {
    stmts.iter().any(|s| match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::If { then_b, else_b, .. } => contains_return(then_b) || contains_return(else_b),
        StmtKind::For { body, .. } | StmtKind::Foreach { body, .. } | StmtKind::While { body, .. } => {
            contains_return(body)
        }
        _ => false,
    })
}

/// Right-nested tuple of variables; unit when empty.
fn tuple(vs: &[Name]) -> Term {
    match vs {
        [] => Term::unit(),
        [x] => Term::var(x.clone()),
        [x, rest @ ..] => Term::pair(Term::var(x.clone()), tuple(rest)),
    }
}

fn state_binder(vs: &[Name], avoid: &Term) -> Binder {
    match vs {
        [] => {
            let fv = free_vars(avoid);
            Binder::Name(fresh_name(&Name::from("u"), |c| fv.contains(c)))
        }
        [x] => Binder::Name(x.clone()),
        [x, rest @ ..] => Binder::Tuple(None, Box::new(Binder::Name(x.clone())), Box::new(state_binder(rest, avoid))),
    }
}

fn pattern_binder(p: &Pattern) -> Binder {
    match p {
        Pattern::Var(x) => Binder::Name(x.clone()),
        Pattern::Tuple(a, b) => Binder::Tuple(None, Box::new(pattern_binder(a)), Box::new(pattern_binder(b))),
    }
}

/// `let b = e in body`, written as an applied lambda.
fn let_in(b: &Binder, e: Term, body: Term) -> Term {
    Term::app(bind(b, body), e)
}

impl Translator {
    fn sorted(&self, set: impl IntoIterator<Item = Name>) -> Vec<Name> {
        let mut v: Vec<Name> = set.into_iter().collect::<Set>().into_iter().collect();
        v.sort_by_key(|x| self.order.get(x).copied().unwrap_or(usize::MAX));
        v
    }

    fn loop_state(&self, s: &Stmt, body: &[Stmt]) -> Vec<Name> {
        let mut assigned = Vec::new();
        body.iter().for_each(|b| b.assigned(&mut assigned));
        let head = &self.live.head[&s.id];
        self.sorted(assigned.into_iter().filter(|x| head.contains(x)))
    }

    fn block(&self, stmts: &[Stmt], tail: &Tail) -> Result<Term, IlError> {
        let Some((s, rest)) = stmts.split_first() else {
            return match tail {
                Tail::Vars(vs) => Ok(tuple(vs)),
                Tail::Return => Err(IlError::MissingReturn),
            };
        };
        let line = s.line;
        match &s.kind {
            StmtKind::Return(e) => match tail {
                Tail::Return => Ok(expr_to_term(e)),
                Tail::Vars(_) => Err(IlError::Unsupported { line, msg: "return inside a loop".into() }),
            },
            StmtKind::Assign(p, e) => {
                let rest = self.block(rest, tail)?;
                Ok(let_in(&pattern_binder(p), expr_to_term(e), rest))
            }
            StmtKind::AssignIndex(x, i, v) => {
                let rest = self.block(rest, tail)?;
                let w = Term::prim(Prim::Write, vec![Term::var(x.clone()), expr_to_term(i), expr_to_term(v)]);
                Ok(let_in(&Binder::Name(x.clone()), w, rest))
            }
            StmtKind::If { cond, then_b, else_b } => {
                let c = expr_to_term(cond);
                if matches!(tail, Tail::Return) && (contains_return(then_b) || contains_return(else_b)) {
                    // Each branch continues with its own copy of the rest.
                    let a: Vec<Stmt> = then_b.iter().chain(rest).cloned().collect();
                    let b: Vec<Stmt> = else_b.iter().chain(rest).cloned().collect();
                    let a = if terminates(then_b) { self.block(then_b, tail)? } else { self.block(&a, tail)? };
                    let b = if terminates(else_b) { self.block(else_b, tail)? } else { self.block(&b, tail)? };
                    return Ok(Term::prim(Prim::If, vec![c, a, b]));
                }
                let mut assigned = Vec::new();
                then_b.iter().chain(else_b).for_each(|b| b.assigned(&mut assigned));
                let after = &self.live.after[&s.id];
                let outs = self.sorted(assigned.into_iter().filter(|x| after.contains(x)));
                let a = self.block(then_b, &Tail::Vars(&outs))?;
                let b = self.block(else_b, &Tail::Vars(&outs))?;
                let rest = self.block(rest, tail)?;
                let e = Term::prim(Prim::If, vec![c, a, b]);
                Ok(let_in(&state_binder(&outs, &rest), e, rest))
            }
            StmtKind::For { var, lo, hi, inclusive, body } => {
                let st = self.loop_state(s, body);
                let inner = self.block(body, &Tail::Vars(&st))?;
                let hi_t = if *inclusive { plus_one(hi) } else { expr_to_term(hi) };
                let lo_t = expr_to_term(lo);
                let rest = self.block(rest, tail)?;
                let sb = state_binder(&st, &inner);
                let loop_t = match self.opts.for_loops {
                    LoopMode::Fold => {
                        let f = bind(&Binder::Tuple(None, Box::new(sb), Box::new(Binder::Name(var.clone()))), inner);
                        Term::prim(Prim::Fold, vec![f, tuple(&st), Term::prim(Prim::Range, vec![lo_t, hi_t])])
                    }
                    LoopMode::Iter => {
                        let mut assigned = Vec::new();
                        body.iter().for_each(|b| b.assigned(&mut assigned));
                        let hi_fv = free_vars(&hi_t);
                        let hoist = assigned.iter().any(|x| hi_fv.contains(x)) || hi_fv.contains(var);
                        let (bound, hoisted) = if hoist {
                            let fv = free_vars(&inner);
                            let h = fresh_name(&Name::from("hi"), |c| fv.contains(c) || c == var || hi_fv.contains(c));
                            (Term::var(h.clone()), Some((h, hi_t)))
                        } else {
                            (hi_t, None)
                        };
                        let i = Term::var(var.clone());
                        let step = Term::prim(
                            Prim::If,
                            vec![
                                Term::binop(Prim::Lt, i.clone(), bound),
                                Term::inr(Term::pair(Term::binop(Prim::Add, i, Term::int(1)), inner)),
                                Term::inl(Term::unit()),
                            ],
                        );
                        let f = bind(&Binder::Tuple(None, Box::new(Binder::Name(var.clone())), Box::new(sb)), step);
                        let it = Term::snd(Term::prim(Prim::Iter, vec![f, Term::pair(lo_t, tuple(&st))]));
                        match hoisted {
                            Some((h, e)) => let_in(&Binder::Name(h), e, it),
                            None => it,
                        }
                    }
                };
                Ok(let_in(&state_binder(&st, &rest), loop_t, rest))
            }
            StmtKind::Foreach { pat, iter, body } => {
                let st = self.loop_state(s, body);
                let inner = self.block(body, &Tail::Vars(&st))?;
                let rest = self.block(rest, tail)?;
                let sb = state_binder(&st, &inner);
                let f = bind(&Binder::Tuple(None, Box::new(sb), Box::new(pattern_binder(pat))), inner);
                let loop_t = Term::prim(Prim::Fold, vec![f, tuple(&st), expr_to_term(iter)]);
                Ok(let_in(&state_binder(&st, &rest), loop_t, rest))
            }
            StmtKind::While { cond, body } => {
                let st = self.loop_state(s, body);
                let inner = self.block(body, &Tail::Vars(&st))?;
                let rest = self.block(rest, tail)?;
                let step = Term::prim(Prim::If, vec![expr_to_term(cond), Term::inr(inner), Term::inl(Term::unit())]);
                let f = bind(&state_binder(&st, &step), step);
                let loop_t = Term::prim(Prim::Iter, vec![f, tuple(&st)]);
                Ok(let_in(&state_binder(&st, &rest), loop_t, rest))
            }
        }
    }
}

/// `hi + 1`, folding `x - 1 + 1` to `x` and literals.
fn plus_one(hi: &Expr) -> Term {
    match hi {
        Expr::Binary(BinOp::Sub, x, one) if **one == Expr::Int(1.into()) => expr_to_term(x),
        Expr::Int(k) => Term::int(k + 1),
        e => Term::binop(Prim::Add, expr_to_term(e), Term::int(1)),
    }
}

fn call(p: Prim, args: &[Expr]) -> Term {
    Term::prim(p, args.iter().map(expr_to_term).collect())
}

fn branch(f: &Expr, avoid: &Set) -> (Name, Term) {
    let lam = expr_to_term(f);
    match lam.kind() {
        TermKind::Lam(x, body) => (x.clone(), body.clone()),
        _ => {
            let fv = free_vars(&lam);
            let u = fresh_name(&Name::from("u"), |c| fv.contains(c) || avoid.contains(c));
            (u.clone(), Term::app(lam, Term::var(u)))
        }
    }
}

/// Translates an IL expression. Comparisons that evaluate an operand twice
/// go through a pair so each operand runs once.
pub fn expr_to_term(e: &Expr) -> Term {
    match e {
        Expr::Int(n) => Term::int(n.clone()),
        Expr::Bool(b) => Term::bool(*b),
        Expr::Unit => Term::unit(),
        Expr::Var(x) => Term::var(x.clone()),
        Expr::Index(a, i) => Term::prim(Prim::Read, vec![expr_to_term(a), expr_to_term(i)]),
        Expr::Tuple(a, b) => Term::pair(expr_to_term(a), expr_to_term(b)),
        Expr::List(xs) => Term::list(xs.iter().map(expr_to_term).collect()),
        Expr::Lambda(p, body) => bind(&pattern_binder(p), expr_to_term(body)),
        Expr::If(c, a, b) => Term::prim(Prim::If, vec![expr_to_term(c), expr_to_term(a), expr_to_term(b)]),
        Expr::Unary(UnOp::Neg, a) => Term::binop(Prim::Sub, Term::int(0), expr_to_term(a)),
        Expr::Unary(UnOp::Not, a) => Term::prim(Prim::If, vec![expr_to_term(a), Term::bool(false), Term::bool(true)]),
        Expr::Binary(op, a, b) => binary(*op, a, b),
        Expr::Call(f, args) => match (f.as_str(), args.as_slice()) {
            ("map", _) => call(Prim::Map, args),
            ("flatMap", _) => Term::prim(Prim::Concat, vec![call(Prim::Map, args)]),
            ("reduce" | "fold", _) => call(Prim::Fold, args),
            ("iter", _) => call(Prim::Iter, args),
            ("zip", _) => call(Prim::Zip, args),
            ("group", _) => call(Prim::Group, args),
            ("replicate", _) => call(Prim::Replicate, args),
            ("length", _) => call(Prim::Length, args),
            ("fst", _) => call(Prim::Fst, args),
            ("snd", _) => call(Prim::Snd, args),
            ("range", _) => call(Prim::Range, args),
            ("concat", _) => call(Prim::Concat, args),
            ("readk", _) => call(Prim::ReadAtKey, args),
            ("writek", _) => call(Prim::WriteAtKey, args),
            ("inl", _) => call(Prim::Inl, args),
            ("inr", _) => call(Prim::Inr, args),
            ("case", [s, l, r]) => {
                let s = expr_to_term(s);
                let (x, lb) = branch(l, &Set::new());
                let (y, rb) = branch(r, &Set::new());
                Term::case(s, x, lb, y, rb)
            }
            (_, []) => Term::app(Term::var(f.as_str()), Term::unit()),
            (_, _) => args.iter().fold(Term::var(f.as_str()), |acc, a| Term::app(acc, expr_to_term(a))),
        },
    }
}

fn binary(op: BinOp, a: &Expr, b: &Expr) -> Term {
    let (ta, tb) = (expr_to_term(a), expr_to_term(b));
    let ite = |c, x, y| Term::prim(Prim::If, vec![c, x, y]);
    let (t, f) = (Term::bool(true), Term::bool(false));
    match op {
        BinOp::Add => Term::binop(Prim::Add, ta, tb),
        BinOp::Sub => Term::binop(Prim::Sub, ta, tb),
        BinOp::Mul => Term::binop(Prim::Mul, ta, tb),
        BinOp::Div => Term::binop(Prim::Div, ta, tb),
        BinOp::Lt => Term::binop(Prim::Lt, ta, tb),
        BinOp::Gt => Term::binop(Prim::Gt, ta, tb),
        BinOp::Le => ite(Term::binop(Prim::Gt, ta, tb), f, t),
        BinOp::Ge => ite(Term::binop(Prim::Lt, ta, tb), f, t),
        BinOp::And => ite(ta, tb, f),
        BinOp::Or => ite(ta, t, tb),
        BinOp::Eq | BinOp::Ne => {
            let shared = !(atomic(&ta) && atomic(&tb));
            let q = Name::from("q");
            let (x, y) = if shared { (Term::fst(Term::var(q.clone())), Term::snd(Term::var(q.clone()))) } else { (ta.clone(), tb.clone()) };
            let body = if op == BinOp::Eq {
                ite(Term::binop(Prim::Lt, x.clone(), y.clone()), f.clone(), ite(Term::binop(Prim::Gt, x, y), f, t))
            } else {
                ite(Term::binop(Prim::Lt, x.clone(), y.clone()), t, Term::binop(Prim::Gt, x, y))
            };
            if shared {
                Term::app(Term::lam(q, body), Term::pair(ta, tb))
            } else {
                body
            }
        }
    }
}
