//! Simple types and the typechecker.
//!
//! Lambda binders carry no annotations, so checking runs first-order
//! unification over type variables. Variables that no constraint fixes are
//! defaulted to `Int` once inference finishes.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::term::{Name, Path, Prim, Term, TermKind};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Int,
    Bool,
    Unit,
    Prod(Box<Type>, Box<Type>),
    Sum(Box<Type>, Box<Type>),
    Arrow(Box<Type>, Box<Type>),
    List(Box<Type>),
}

impl Type {
    pub fn prod(a: Type, b: Type) -> Type {
        Type::Prod(Box::new(a), Box::new(b))
    }

    pub fn sum(a: Type, b: Type) -> Type {
        Type::Sum(Box::new(a), Box::new(b))
    }

    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    pub fn list(a: Type) -> Type {
        Type::List(Box::new(a))
    }

    /// Splits a curried function type into parameter types and result.
    pub fn uncurry(&self) -> (Vec<&Type>, &Type) {
        let mut params = Vec::new();
        let mut t = self;
        while let Type::Arrow(a, b) = t {
            params.push(&**a);
            t = b;
        }
        (params, t)
    }

    pub fn is_list(&self) -> bool {
        matches!(self, Type::List(_))
    }

    /// Parses `Int`, `Bool`, `Unit`, `List T`, `A * B`, `A + B`, `A -> B`
    /// with the usual precedence (`->` loosest, all right-associative).
    pub fn parse(s: &str) -> Result<Type, String> {
        let toks = type_tokens(s);
        let mut pos = 0;
        let t = parse_arrow(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(format!("unexpected `{}` in type", toks[pos]));
        }
        Ok(t)
    }
}

fn type_tokens(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '-' && cs.get(i + 1) == Some(&'>') {
            out.push("->".into());
            i += 2;
        } else if "()*+,".contains(c) {
            out.push(c.to_string());
            i += 1;
        } else {
            let st = i;
            while i < cs.len() && cs[i].is_alphanumeric() {
                i += 1;
            }
            if st == i {
                out.push(c.to_string());
                i += 1;
            } else {
                out.push(cs[st..i].iter().collect());
            }
        }
    }
    out
}

fn parse_arrow(t: &[String], pos: &mut usize) -> Result<Type, String> {
    let a = parse_sum(t, pos)?;
    if t.get(*pos).map(String::as_str) == Some("->") {
        *pos += 1;
        let b = parse_arrow(t, pos)?;
        return Ok(Type::arrow(a, b));
    }
    Ok(a)
}

fn parse_sum(t: &[String], pos: &mut usize) -> Result<Type, String> {
    let a = parse_prod(t, pos)?;
    if t.get(*pos).map(String::as_str) == Some("+") {
        *pos += 1;
        let b = parse_sum(t, pos)?;
        return Ok(Type::sum(a, b));
    }
    Ok(a)
}

fn parse_prod(t: &[String], pos: &mut usize) -> Result<Type, String> {
    let a = parse_app(t, pos)?;
    if t.get(*pos).map(String::as_str) == Some("*") {
        *pos += 1;
        let b = parse_prod(t, pos)?;
        return Ok(Type::prod(a, b));
    }
    Ok(a)
}

fn parse_app(t: &[String], pos: &mut usize) -> Result<Type, String> {
    let tok = t.get(*pos).ok_or("unexpected end of type")?;
    *pos += 1;
    match tok.as_str() {
        "Int" => Ok(Type::Int),
        "Bool" => Ok(Type::Bool),
        "Unit" => Ok(Type::Unit),
        "List" => Ok(Type::list(parse_app(t, pos)?)),
        "(" => {
            let a = parse_arrow(t, pos)?;
            // `(A, B)` is accepted as a product
            let a = if t.get(*pos).map(String::as_str) == Some(",") {
                *pos += 1;
                let b = parse_arrow(t, pos)?;
                Type::prod(a, b)
            } else {
                a
            };
            if t.get(*pos).map(String::as_str) != Some(")") {
                return Err("expected `)` in type".into());
            }
            *pos += 1;
            Ok(a)
        }
        other => Err(format!("unknown type `{other}`")),
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => write!(f, "Int"),
            Type::Bool => write!(f, "Bool"),
            Type::Unit => write!(f, "Unit"),
            Type::Prod(a, b) => write!(f, "({a} * {b})"),
            Type::Sum(a, b) => write!(f, "({a} + {b})"),
            Type::Arrow(a, b) => write!(f, "({a} -> {b})"),
            Type::List(a) => match **a {
                Type::List(_) => write!(f, "List ({a})"),
                _ => write!(f, "List {a}"),
            },
        }
    }
}

/// Types of free variables. Later entries shadow earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeContext {
    entries: Vec<(Name, Type)>,
}

impl TypeContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, x: impl Into<Name>, t: Type) -> Self {
        self.push(x, t);
        self
    }

    pub fn push(&mut self, x: impl Into<Name>, t: Type) {
        self.entries.push((x.into(), t));
    }

    pub fn get(&self, x: &Name) -> Option<&Type> {
        self.entries.iter().rev().find(|(n, _)| n == x).map(|(_, t)| t)
    }

    pub fn contains(&self, x: &Name) -> bool {
        self.get(x).is_some()
    }

    /// Visible bindings, outermost first, with shadowed entries removed.
    pub fn visible(&self) -> Vec<(Name, Type)> {
        let mut out: Vec<(Name, Type)> = Vec::new();
        for (n, t) in &self.entries {
            out.retain(|(m, _)| m != n);
            out.push((n.clone(), t.clone()));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(Name, Type)> for TypeContext {
    fn from_iter<I: IntoIterator<Item = (Name, Type)>>(iter: I) -> Self {
        TypeContext {
            entries: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{name}` at {path}")]
    UnboundVariable { name: Name, path: Path },
    #[error("type error at {path} (rule `{rule}`): {detail}")]
    Mismatch {
        path: Path,
        rule: &'static str,
        detail: String,
    },
}

impl TypeError {
    pub fn path(&self) -> &Path {
        match self {
            TypeError::UnboundVariable { path, .. } | TypeError::Mismatch { path, .. } => path,
        }
    }
}

/// Inference-time type with unification variables.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
    Unit,
    Prod(Box<Ty>, Box<Ty>),
    Sum(Box<Ty>, Box<Ty>),
    Arrow(Box<Ty>, Box<Ty>),
    List(Box<Ty>),
    Var(usize),
}

impl Ty {
    fn from_type(t: &Type) -> Ty {
        match t {
            Type::Int => Ty::Int,
            Type::Bool => Ty::Bool,
            Type::Unit => Ty::Unit,
            Type::Prod(a, b) => Ty::Prod(Box::new(Ty::from_type(a)), Box::new(Ty::from_type(b))),
            Type::Sum(a, b) => Ty::Sum(Box::new(Ty::from_type(a)), Box::new(Ty::from_type(b))),
            Type::Arrow(a, b) => Ty::Arrow(Box::new(Ty::from_type(a)), Box::new(Ty::from_type(b))),
            Type::List(a) => Ty::List(Box::new(Ty::from_type(a))),
        }
    }
}

fn prod(a: Ty, b: Ty) -> Ty {
    Ty::Prod(Box::new(a), Box::new(b))
}
fn sum(a: Ty, b: Ty) -> Ty {
    Ty::Sum(Box::new(a), Box::new(b))
}
fn arrow(a: Ty, b: Ty) -> Ty {
    Ty::Arrow(Box::new(a), Box::new(b))
}
fn list(a: Ty) -> Ty {
    Ty::List(Box::new(a))
}

/// What a focused inference run records about one position.
struct Focus {
    path: Path,
    env: Option<Vec<(Name, Ty)>>,
    ty: Option<Ty>,
}

#[derive(Default)]
struct Infer {
    subst: Vec<Option<Ty>>,
    metas: BTreeMap<Name, Ty>,
    focus: Option<Focus>,
}

impl Infer {
    fn fresh(&mut self) -> Ty {
        self.subst.push(None);
        Ty::Var(self.subst.len() - 1)
    }

    fn shallow(&self, t: &Ty) -> Ty {
        let mut t = t.clone();
        while let Ty::Var(v) = t {
            match &self.subst[v] {
                Some(u) => t = u.clone(),
                None => break,
            }
        }
        t
    }

    fn occurs(&self, v: usize, t: &Ty) -> bool {
        match self.shallow(t) {
            Ty::Var(w) => v == w,
            Ty::Prod(a, b) | Ty::Sum(a, b) | Ty::Arrow(a, b) => self.occurs(v, &a) || self.occurs(v, &b),
            Ty::List(a) => self.occurs(v, &a),
            _ => false,
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty) -> Result<(), String> {
        let a = self.shallow(a);
        let b = self.shallow(b);
        match (&a, &b) {
            (Ty::Var(x), Ty::Var(y)) if x == y => Ok(()),
            (Ty::Var(x), t) | (t, Ty::Var(x)) => {
                if self.occurs(*x, t) {
                    return Err(format!("infinite type {} ~ {}", self.show(&a), self.show(&b)));
                }
                self.subst[*x] = Some(t.clone());
                Ok(())
            }
            (Ty::Int, Ty::Int) | (Ty::Bool, Ty::Bool) | (Ty::Unit, Ty::Unit) => Ok(()),
            (Ty::Prod(a1, a2), Ty::Prod(b1, b2))
            | (Ty::Sum(a1, a2), Ty::Sum(b1, b2))
            | (Ty::Arrow(a1, a2), Ty::Arrow(b1, b2)) => {
                self.unify(a1, b1)?;
                self.unify(a2, b2)
            }
            (Ty::List(x), Ty::List(y)) => self.unify(x, y),
            _ => Err(format!("expected {}, found {}", self.show(&a), self.show(&b))),
        }
    }

    fn resolve(&self, t: &Ty) -> Type {
        match self.shallow(t) {
            Ty::Int | Ty::Var(_) => Type::Int,
            Ty::Bool => Type::Bool,
            Ty::Unit => Type::Unit,
            Ty::Prod(a, b) => Type::prod(self.resolve(&a), self.resolve(&b)),
            Ty::Sum(a, b) => Type::sum(self.resolve(&a), self.resolve(&b)),
            Ty::Arrow(a, b) => Type::arrow(self.resolve(&a), self.resolve(&b)),
            Ty::List(a) => Type::list(self.resolve(&a)),
        }
    }

    fn show(&self, t: &Ty) -> String {
        match self.shallow(t) {
            Ty::Int => "Int".into(),
            Ty::Bool => "Bool".into(),
            Ty::Unit => "Unit".into(),
            Ty::Var(v) => format!("'t{v}"),
            Ty::Prod(a, b) => format!("({} * {})", self.show(&a), self.show(&b)),
            Ty::Sum(a, b) => format!("({} + {})", self.show(&a), self.show(&b)),
            Ty::Arrow(a, b) => format!("({} -> {})", self.show(&a), self.show(&b)),
            Ty::List(a) => format!("List {}", self.show(&a)),
        }
    }

    fn expect(&mut self, path: &[usize], rule: &'static str, want: &Ty, got: &Ty) -> Result<(), TypeError> {
        self.unify(want, got).map_err(|detail| TypeError::Mismatch {
            path: Path(path.to_vec()),
            rule,
            detail,
        })
    }

    fn infer(&mut self, env: &mut Vec<(Name, Ty)>, t: &Term, path: &mut Vec<usize>) -> Result<Ty, TypeError> {
        let ty = self.infer_node(env, t, path)?;
        if let Some(f) = &mut self.focus {
            if f.path.0 == *path {
                f.env = Some(env.clone());
                f.ty = Some(ty.clone());
            }
        }
        Ok(ty)
    }

    fn child(&mut self, env: &mut Vec<(Name, Ty)>, t: &Term, i: usize, path: &mut Vec<usize>) -> Result<Ty, TypeError> {
        path.push(i);
        let r = self.infer(env, t, path);
        path.pop();
        r
    }

    fn bound_child(
        &mut self,
        env: &mut Vec<(Name, Ty)>,
        x: &Name,
        xt: Ty,
        t: &Term,
        i: usize,
        path: &mut Vec<usize>,
    ) -> Result<Ty, TypeError> {
        env.push((x.clone(), xt));
        let r = self.child(env, t, i, path);
        env.pop();
        r
    }

    fn infer_node(&mut self, env: &mut Vec<(Name, Ty)>, t: &Term, path: &mut Vec<usize>) -> Result<Ty, TypeError> {
        match t.kind() {
            TermKind::Var(x) => env
                .iter()
                .rev()
                .find(|(n, _)| n == x)
                .map(|(_, ty)| ty.clone())
                .ok_or_else(|| TypeError::UnboundVariable {
                    name: x.clone(),
                    path: Path(path.clone()),
                }),
            TermKind::Meta(m) => {
                if let Some(ty) = self.metas.get(m) {
                    return Ok(ty.clone());
                }
                let ty = self.fresh();
                self.metas.insert(m.clone(), ty.clone());
                Ok(ty)
            }
            TermKind::Int(_) => Ok(Ty::Int),
            TermKind::Bool(_) => Ok(Ty::Bool),
            TermKind::Unit => Ok(Ty::Unit),
            TermKind::Lam(x, b) => {
                let a = self.fresh();
                let bt = self.bound_child(env, x, a.clone(), b, 0, path)?;
                Ok(arrow(a, bt))
            }
            TermKind::Case(s, l, lb, r, rb) => {
                let (a, b) = (self.fresh(), self.fresh());
                let st = self.child(env, s, 0, path)?;
                self.expect(path, "case", &sum(a.clone(), b.clone()), &st)?;
                let lt = self.bound_child(env, l, a, lb, 1, path)?;
                let rt = self.bound_child(env, r, b, rb, 2, path)?;
                self.expect(path, "case", &lt, &rt)?;
                Ok(lt)
            }
            TermKind::Prim(p, args) => self.infer_prim(env, *p, args, path),
        }
    }

    fn infer_prim(
        &mut self,
        env: &mut Vec<(Name, Ty)>,
        p: Prim,
        args: &[Term],
        path: &mut Vec<usize>,
    ) -> Result<Ty, TypeError> {
        let mut tys = Vec::with_capacity(args.len());
        for (i, a) in args.iter().enumerate() {
            tys.push(self.child(env, a, i, path)?);
        }
        let rule = p.keyword();
        macro_rules! want {
            ($i:expr, $t:expr) => {{
                let w = $t;
                let got = tys[$i].clone();
                path.push($i);
                let r = self.expect(path, rule, &w, &got);
                path.pop();
                r?;
            }};
        }
        Ok(match p {
            Prim::App => {
                let b = self.fresh();
                want!(0, arrow(tys[1].clone(), b.clone()));
                b
            }
            Prim::Add | Prim::Sub | Prim::Mul | Prim::Div => {
                want!(0, Ty::Int);
                want!(1, Ty::Int);
                Ty::Int
            }
            Prim::Gt | Prim::Lt => {
                want!(0, Ty::Int);
                want!(1, Ty::Int);
                Ty::Bool
            }
            Prim::Pair => prod(tys[0].clone(), tys[1].clone()),
            Prim::Fst | Prim::Snd => {
                let (a, b) = (self.fresh(), self.fresh());
                want!(0, prod(a.clone(), b.clone()));
                if p == Prim::Fst {
                    a
                } else {
                    b
                }
            }
            Prim::Inl => sum(tys[0].clone(), self.fresh()),
            Prim::Inr => sum(self.fresh(), tys[0].clone()),
            Prim::Iter => {
                let a = tys[1].clone();
                want!(0, arrow(a.clone(), sum(Ty::Unit, a.clone())));
                a
            }
            Prim::Fold => {
                let a = tys[1].clone();
                let b = self.fresh();
                want!(0, arrow(prod(a.clone(), b.clone()), a.clone()));
                want!(2, list(b));
                a
            }
            Prim::If => {
                want!(0, Ty::Bool);
                want!(2, tys[1].clone());
                tys[1].clone()
            }
            Prim::Read => {
                let a = self.fresh();
                want!(0, list(a.clone()));
                want!(1, Ty::Int);
                a
            }
            Prim::Write => {
                let a = tys[2].clone();
                want!(0, list(a.clone()));
                want!(1, Ty::Int);
                list(a)
            }
            Prim::ReadAtKey => {
                let (k, v) = (tys[1].clone(), self.fresh());
                want!(0, list(prod(k, v.clone())));
                sum(Ty::Unit, v)
            }
            Prim::WriteAtKey => {
                let kv = list(prod(tys[1].clone(), tys[2].clone()));
                want!(0, kv.clone());
                kv
            }
            Prim::Replicate => {
                want!(0, Ty::Int);
                list(tys[1].clone())
            }
            Prim::Range => {
                want!(0, Ty::Int);
                want!(1, Ty::Int);
                list(Ty::Int)
            }
            Prim::Length => {
                let a = self.fresh();
                want!(0, list(a));
                Ty::Int
            }
            Prim::Map => {
                let (a, b) = (self.fresh(), self.fresh());
                want!(0, arrow(a.clone(), b.clone()));
                want!(1, list(a));
                list(b)
            }
            Prim::Group => {
                let (k, v) = (self.fresh(), self.fresh());
                want!(0, list(prod(k.clone(), v.clone())));
                list(prod(k, list(v)))
            }
            Prim::Zip => {
                let (a, b) = (self.fresh(), self.fresh());
                want!(0, list(a.clone()));
                want!(1, list(b.clone()));
                list(prod(a, b))
            }
            Prim::Concat => {
                let a = self.fresh();
                want!(0, list(list(a.clone())));
                list(a)
            }
            Prim::List => {
                let a = self.fresh();
                for i in 0..tys.len() {
                    want!(i, a.clone());
                }
                list(a)
            }
        })
    }
}

fn initial_env(ctx: &TypeContext) -> Vec<(Name, Ty)> {
    ctx.entries
        .iter()
        .map(|(n, t)| (n.clone(), Ty::from_type(t)))
        .collect()
}

/// Infers the type of `t` under `ctx`.
pub fn typecheck(ctx: &TypeContext, t: &Term) -> Result<Type, TypeError> {
    let mut inf = Infer::default();
    let mut env = initial_env(ctx);
    let ty = inf.infer(&mut env, t, &mut Vec::new())?;
    Ok(inf.resolve(&ty))
}

/// Checks `t` against an expected type.
pub fn check(ctx: &TypeContext, t: &Term, expected: &Type) -> Result<(), TypeError> {
    let mut inf = Infer::default();
    let mut env = initial_env(ctx);
    let ty = inf.infer(&mut env, t, &mut Vec::new())?;
    inf.expect(&[], "check", &Ty::from_type(expected), &ty)
}

/// Typing of a subterm in context: the visible variable types at `path` and
/// the subterm's own type, both taken from a derivation of the whole term.
pub fn context_at(ctx: &TypeContext, t: &Term, path: &Path) -> Result<(TypeContext, Type), TypeError> {
    let mut inf = Infer {
        focus: Some(Focus {
            path: path.clone(),
            env: None,
            ty: None,
        }),
        ..Infer::default()
    };
    let mut env = initial_env(ctx);
    inf.infer(&mut env, t, &mut Vec::new())?;
    let focus = inf.focus.take().expect("focus set above");
    let (Some(fenv), Some(fty)) = (focus.env, focus.ty) else {
        return Err(TypeError::Mismatch {
            path: path.clone(),
            rule: "path",
            detail: "no subterm at this path".into(),
        });
    };
    let out: TypeContext = fenv.iter().map(|(n, ty)| (n.clone(), inf.resolve(ty))).collect();
    Ok((out, inf.resolve(&fty)))
}

/// Jointly types a group of pattern terms that share metavariables. Returns
/// each pattern's type and the type of every metavariable.
pub fn typecheck_patterns(
    ctx: &TypeContext,
    patterns: &[&Term],
) -> Result<(Vec<Type>, BTreeMap<Name, Type>), TypeError> {
    let mut inf = Infer::default();
    let mut tys = Vec::new();
    for p in patterns {
        let mut env = initial_env(ctx);
        tys.push(inf.infer(&mut env, p, &mut Vec::new())?);
    }
    // all patterns of one rule denote the same value
    for w in tys.windows(2) {
        inf.expect(&[], "rule", &w[0], &w[1])?;
    }
    let metas = inf.metas.iter().map(|(n, t)| (n.clone(), inf.resolve(t))).collect();
    Ok((tys.iter().map(|t| inf.resolve(t)).collect(), metas))
}
