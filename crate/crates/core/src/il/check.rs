use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::translate::expr_to_term;
use super::IlError;
use crate::term::Name;
use crate::types::{typecheck, Type, TypeContext};

pub(super) fn well_formed(p: &IlProgram) -> Result<(), IlError> {
    let mut scope: BTreeSet<Name> = p.params.iter().map(|(x, _)| x.clone()).collect();
    let mut loop_vars = Vec::new();
    block(p, &p.body, &mut scope, &mut loop_vars)?;
    if !terminates(&p.body) {
        return Err(IlError::MissingReturn);
    }
    Ok(())
}

fn expr(p: &IlProgram, line: usize, e: &Expr, scope: &BTreeSet<Name>) -> Result<(), IlError> {
    let mut calls = Vec::new();
    e.calls(&mut calls);
    for f in calls {
        if f == p.name {
            return Err(IlError::Recursion { line, name: f });
        }
        if builtin_arity(&f).is_none() && !scope.contains(f.as_str()) {
            return Err(IlError::UnknownFunction { line, name: f });
        }
    }
    check_arity(line, e)?;
    for x in e.free_vars() {
        if !scope.contains(&x) {
            return Err(IlError::UseBeforeAssign { line, var: x.to_string() });
        }
    }
    Ok(())
}

fn check_arity(line: usize, e: &Expr) -> Result<(), IlError> {
    match e {
        Expr::Call(f, args) => {
            if let Some(n) = builtin_arity(f) {
                if n != args.len() {
                    return Err(IlError::Arity { line, name: f.clone(), expected: n, got: args.len() });
                }
            }
            args.iter().try_for_each(|a| check_arity(line, a))
        }
        Expr::Binary(_, a, b) | Expr::Index(a, b) | Expr::Tuple(a, b) => {
            check_arity(line, a)?;
            check_arity(line, b)
        }
        Expr::Unary(_, a) | Expr::Lambda(_, a) => check_arity(line, a),
        Expr::List(xs) => xs.iter().try_for_each(|x| check_arity(line, x)),
        Expr::If(c, a, b) => {
            check_arity(line, c)?;
            check_arity(line, a)?;
            check_arity(line, b)
        }
        Expr::Int(_) | Expr::Bool(_) | Expr::Unit | Expr::Var(_) => Ok(()),
    }
}

fn assign(line: usize, x: &Name, scope: &mut BTreeSet<Name>, loop_vars: &[Name]) -> Result<(), IlError> {
    if loop_vars.contains(x) {
        return Err(IlError::Unsupported { line, msg: format!("assignment to loop variable `{x}`") });
    }
    scope.insert(x.clone());
    Ok(())
}

fn block(p: &IlProgram, stmts: &[Stmt], scope: &mut BTreeSet<Name>, loop_vars: &mut Vec<Name>) -> Result<(), IlError> {
    for (k, s) in stmts.iter().enumerate() {
        if k > 0 && terminates(&stmts[..k]) {
            return Err(IlError::Unreachable { line: s.line });
        }
        let line = s.line;
        match &s.kind {
            StmtKind::Assign(pat, e) => {
                expr(p, line, e, scope)?;
                let vs = pat.vars();
                let uniq: BTreeSet<_> = vs.iter().collect();
                if uniq.len() != vs.len() {
                    return Err(IlError::Syntax { line, msg: "repeated variable in pattern".into() });
                }
                for x in &vs {
                    assign(line, x, scope, loop_vars)?;
                }
            }
            StmtKind::AssignIndex(x, i, v) => {
                if !scope.contains(x) {
                    return Err(IlError::UseBeforeAssign { line, var: x.to_string() });
                }
                expr(p, line, i, scope)?;
                expr(p, line, v, scope)?;
                assign(line, x, scope, loop_vars)?;
            }
            StmtKind::For { var, lo, hi, body, .. } => {
                expr(p, line, lo, scope)?;
                expr(p, line, hi, scope)?;
                if scope.contains(var) || loop_vars.contains(var) {
                    return Err(IlError::Unsupported { line, msg: format!("loop variable `{var}` shadows a variable") });
                }
                let mut inner = scope.clone();
                inner.insert(var.clone());
                loop_vars.push(var.clone());
                block(p, body, &mut inner, loop_vars)?;
                loop_vars.pop();
            }
            StmtKind::Foreach { pat, iter, body } => {
                expr(p, line, iter, scope)?;
                let vs = pat.vars();
                let mut inner = scope.clone();
                for x in &vs {
                    if scope.contains(x) || loop_vars.contains(x) {
                        return Err(IlError::Unsupported { line, msg: format!("loop variable `{x}` shadows a variable") });
                    }
                    inner.insert(x.clone());
                }
                let n = loop_vars.len();
                loop_vars.extend(vs);
                block(p, body, &mut inner, loop_vars)?;
                loop_vars.truncate(n);
            }
            StmtKind::While { cond, body } => {
                expr(p, line, cond, scope)?;
                let mut inner = scope.clone();
                block(p, body, &mut inner, loop_vars)?;
            }
            StmtKind::If { cond, then_b, else_b } => {
                expr(p, line, cond, scope)?;
                let mut a = scope.clone();
                let mut b = scope.clone();
                block(p, then_b, &mut a, loop_vars)?;
                block(p, else_b, &mut b, loop_vars)?;
                *scope = match (terminates(then_b), terminates(else_b)) {
                    (true, true) => scope.clone(),
                    (true, false) => b,
                    (false, true) => a,
                    (false, false) => a.intersection(&b).cloned().collect(),
                };
            }
            StmtKind::Return(e) => expr(p, line, e, scope)?,
        }
    }
    Ok(())
}

/// Assigns one monomorphic type to every variable, including loop variables
/// and parameters.
pub fn typecheck_il(p: &IlProgram) -> Result<BTreeMap<Name, Type>, IlError> {
    let mut tc = Typer { table: BTreeMap::new(), ret: p.ret.clone() };
    for (x, t) in &p.params {
        tc.table.insert(x.clone(), t.clone());
    }
    tc.block(&p.body)?;
    Ok(tc.table)
}

struct Typer {
    table: BTreeMap<Name, Type>,
    ret: Option<Type>,
}

impl Typer {
    fn ctx(&self) -> TypeContext {
        self.table.iter().map(|(x, t)| (x.clone(), t.clone())).collect()
    }

    fn expr(&self, line: usize, e: &Expr) -> Result<Type, IlError> {
        let t = expr_to_term(e);
        typecheck(&self.ctx(), &t).map_err(|err| IlError::Type { line, msg: err.to_string() })
    }

    fn bind(&mut self, line: usize, x: &Name, t: Type) -> Result<(), IlError> {
        match self.table.get(x) {
            Some(old) if *old != t => Err(IlError::Type {
                line,
                msg: format!("`{x}` has type {old} but is assigned a value of type {t}"),
            }),
            Some(_) => Ok(()),
            None => {
                self.table.insert(x.clone(), t);
                Ok(())
            }
        }
    }

    fn pattern(&mut self, line: usize, pat: &Pattern, t: Type) -> Result<(), IlError> {
        match (pat, t) {
            (Pattern::Var(x), t) => self.bind(line, x, t),
            (Pattern::Tuple(a, b), Type::Prod(ta, tb)) => {
                self.pattern(line, a, *ta)?;
                self.pattern(line, b, *tb)
            }
            (_, t) => Err(IlError::Type { line, msg: format!("cannot destructure a value of type {t}") }),
        }
    }

    fn expect(&self, line: usize, e: &Expr, want: &Type) -> Result<(), IlError> {
        let got = self.expr(line, e)?;
        if got != *want {
            return Err(IlError::Type { line, msg: format!("expected {want}, found {got}") });
        }
        Ok(())
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<(), IlError> {
        for s in stmts {
            let line = s.line;
            match &s.kind {
                StmtKind::Assign(pat, e) => {
                    let t = self.expr(line, e)?;
                    self.pattern(line, pat, t)?;
                }
                StmtKind::AssignIndex(x, i, v) => {
                    self.expect(line, i, &Type::Int)?;
                    let tv = self.expr(line, v)?;
                    self.bind(line, x, Type::list(tv))?;
                }
                StmtKind::For { var, lo, hi, body, .. } => {
                    self.expect(line, lo, &Type::Int)?;
                    self.expect(line, hi, &Type::Int)?;
                    self.bind(line, var, Type::Int)?;
                    self.block(body)?;
                }
                StmtKind::Foreach { pat, iter, body } => {
                    match self.expr(line, iter)? {
                        Type::List(el) => self.pattern(line, pat, *el)?,
                        t => return Err(IlError::Type { line, msg: format!("foreach over non-list type {t}") }),
                    }
                    self.block(body)?;
                }
                StmtKind::While { cond, body } => {
                    self.expect(line, cond, &Type::Bool)?;
                    self.block(body)?;
                }
                StmtKind::If { cond, then_b, else_b } => {
                    self.expect(line, cond, &Type::Bool)?;
                    self.block(then_b)?;
                    self.block(else_b)?;
                }
                StmtKind::Return(e) => {
                    let t = self.expr(line, e)?;
                    match &self.ret {
                        Some(r) if *r != t => {
                            return Err(IlError::Type { line, msg: format!("returns {t} but the function returns {r}") })
                        }
                        Some(_) => {}
                        None => self.ret = Some(t),
                    }
                }
            }
        }
        Ok(())
    }
}
