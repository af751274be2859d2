use num_bigint::BigInt;

use crate::term::Name;
use crate::types::Type;

/// One IL function.
#[derive(Clone, Debug, PartialEq)]
pub struct IlProgram {
    pub name: String,
    pub params: Vec<(Name, Type)>,
    pub ret: Option<Type>,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    /// Source line (1-based).
    pub line: usize,
    /// Unique within a program, assigned in pre-order.
    pub id: usize,
    pub kind: StmtKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Assign(Pattern, Expr),
    AssignIndex(Name, Expr, Expr),
    For {
        var: Name,
        lo: Expr,
        hi: Expr,
        /// `to` bounds are inclusive, `until` bounds exclusive.
        inclusive: bool,
        body: Vec<Stmt>,
    },
    Foreach {
        pat: Pattern,
        iter: Expr,
        body: Vec<Stmt>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    If {
        cond: Expr,
        then_b: Vec<Stmt>,
        else_b: Vec<Stmt>,
    },
    Return(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Var(Name),
    Tuple(Box<Pattern>, Box<Pattern>),
}

impl Pattern {
    pub fn vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<Name>) {
        match self {
            Pattern::Var(x) => out.push(x.clone()),
            Pattern::Tuple(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(BigInt),
    Bool(bool),
    Unit,
    Var(Name),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Tuple(Box<Expr>, Box<Expr>),
    List(Vec<Expr>),
    Call(String, Vec<Expr>),
    Lambda(Pattern, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Free variables (lambda parameters bind).
    pub fn free_vars(&self) -> std::collections::BTreeSet<Name> {
        let mut out = std::collections::BTreeSet::new();
        self.fv(&mut Vec::new(), &mut out);
        out
    }

    fn fv(&self, bound: &mut Vec<Name>, out: &mut std::collections::BTreeSet<Name>) {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Unit => {}
            Expr::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Expr::Binary(_, a, b) | Expr::Index(a, b) | Expr::Tuple(a, b) => {
                a.fv(bound, out);
                b.fv(bound, out);
            }
            Expr::Unary(_, a) => a.fv(bound, out),
            Expr::List(xs) | Expr::Call(_, xs) => xs.iter().for_each(|x| x.fv(bound, out)),
            Expr::Lambda(p, body) => {
                let vs = p.vars();
                let n = bound.len();
                bound.extend(vs);
                body.fv(bound, out);
                bound.truncate(n);
            }
            Expr::If(c, a, b) => {
                c.fv(bound, out);
                a.fv(bound, out);
                b.fv(bound, out);
            }
        }
    }

    /// Names of functions called anywhere inside.
    pub fn calls(&self, out: &mut Vec<String>) {
        match self {
            Expr::Call(f, args) => {
                out.push(f.clone());
                args.iter().for_each(|a| a.calls(out));
            }
            Expr::Binary(_, a, b) | Expr::Index(a, b) | Expr::Tuple(a, b) => {
                a.calls(out);
                b.calls(out);
            }
            Expr::Unary(_, a) | Expr::Lambda(_, a) => a.calls(out),
            Expr::List(xs) => xs.iter().for_each(|x| x.calls(out)),
            Expr::If(c, a, b) => {
                c.calls(out);
                a.calls(out);
                b.calls(out);
            }
            Expr::Int(_) | Expr::Bool(_) | Expr::Unit | Expr::Var(_) => {}
        }
    }
}

/// Builtins callable from IL, with their arities.
pub const BUILTINS: &[(&str, usize)] = &[
    ("map", 2),
    ("flatMap", 2),
    ("reduce", 3),
    ("fold", 3),
    ("iter", 2),
    ("zip", 2),
    ("group", 1),
    ("replicate", 2),
    ("length", 1),
    ("fst", 1),
    ("snd", 1),
    ("range", 2),
    ("concat", 1),
    ("readk", 2),
    ("writek", 3),
    ("inl", 1),
    ("inr", 1),
    ("case", 3),
];

pub fn builtin_arity(name: &str) -> Option<usize> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, a)| *a)
}

impl Stmt {
    /// Variables assigned anywhere in this statement, loop variables and
    /// foreach patterns excluded.
    pub fn assigned(&self, out: &mut Vec<Name>) {
        match &self.kind {
            StmtKind::Assign(p, _) => out.extend(p.vars()),
            StmtKind::AssignIndex(x, _, _) => out.push(x.clone()),
            StmtKind::For { body, .. } | StmtKind::Foreach { body, .. } | StmtKind::While { body, .. } => {
                body.iter().for_each(|s| s.assigned(out))
            }
            StmtKind::If { then_b, else_b, .. } => {
                then_b.iter().chain(else_b).for_each(|s| s.assigned(out))
            }
            StmtKind::Return(_) => {}
        }
    }
}

/// Whether control never falls off the end of the block.
pub fn terminates(block: &[Stmt]) -> bool {
    match block.last().map(|s| &s.kind) {
        Some(StmtKind::Return(_)) => true,
        Some(StmtKind::If { then_b, else_b, .. }) => terminates(then_b) && terminates(else_b),
        _ => false,
    }
}
