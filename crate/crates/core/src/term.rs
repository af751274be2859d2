//! Terms of the functional core language and positions inside them.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;

/// A variable or metavariable name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: impl AsRef<str>) -> Self {
        Name(Arc::from(s.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name(Arc::from(s))
    }
}

impl std::borrow::Borrow<str> for Name {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Fixed-shape constructors. Every primitive carries its operands as an
/// ordered child list; `List` is the only variadic one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Prim {
    App,
    Add,
    Sub,
    Mul,
    /// Truncating integer division. Not part of the original grammar; the
    /// case studies need it.
    Div,
    Gt,
    Lt,
    Pair,
    Fst,
    Snd,
    Inl,
    Inr,
    Iter,
    Fold,
    If,
    Read,
    Write,
    ReadAtKey,
    WriteAtKey,
    Replicate,
    Range,
    Length,
    Map,
    Group,
    Zip,
    Concat,
    List,
}

impl Prim {
    pub const ALL: [Prim; 27] = [
        Prim::App,
        Prim::Add,
        Prim::Sub,
        Prim::Mul,
        Prim::Div,
        Prim::Gt,
        Prim::Lt,
        Prim::Pair,
        Prim::Fst,
        Prim::Snd,
        Prim::Inl,
        Prim::Inr,
        Prim::Iter,
        Prim::Fold,
        Prim::If,
        Prim::Read,
        Prim::Write,
        Prim::ReadAtKey,
        Prim::WriteAtKey,
        Prim::Replicate,
        Prim::Range,
        Prim::Length,
        Prim::Map,
        Prim::Group,
        Prim::Zip,
        Prim::Concat,
        Prim::List,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Prim::App => "app",
            Prim::Add => "add",
            Prim::Sub => "sub",
            Prim::Mul => "mul",
            Prim::Div => "div",
            Prim::Gt => "gt",
            Prim::Lt => "lt",
            Prim::Pair => "pair",
            Prim::Fst => "fst",
            Prim::Snd => "snd",
            Prim::Inl => "inl",
            Prim::Inr => "inr",
            Prim::Iter => "iter",
            Prim::Fold => "fold",
            Prim::If => "if",
            Prim::Read => "read",
            Prim::Write => "write",
            Prim::ReadAtKey => "readk",
            Prim::WriteAtKey => "writek",
            Prim::Replicate => "replicate",
            Prim::Range => "range",
            Prim::Length => "length",
            Prim::Map => "map",
            Prim::Group => "group",
            Prim::Zip => "zip",
            Prim::Concat => "concat",
            Prim::List => "list",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Prim> {
        Prim::ALL.iter().copied().find(|p| p.keyword() == s)
    }

    /// Number of operands, or `None` for the variadic array literal.
    pub fn arity(self) -> Option<usize> {
        Some(match self {
            Prim::List => return None,
            Prim::Fst
            | Prim::Snd
            | Prim::Inl
            | Prim::Inr
            | Prim::Length
            | Prim::Group
            | Prim::Concat => 1,
            Prim::Fold | Prim::If | Prim::Write | Prim::WriteAtKey => 3,
            _ => 2,
        })
    }
}

/// The shape of a term node.
#[derive(Debug, PartialEq, Eq)]
pub enum TermKind {
    Var(Name),
    /// Pattern hole. Only rewrite-rule patterns contain these.
    Meta(Name),
    Lam(Name, Term),
    Int(BigInt),
    Bool(bool),
    Unit,
    /// `case s of inl l => lbody | inr r => rbody`
    Case(Term, Name, Term, Name, Term),
    Prim(Prim, Vec<Term>),
}

/// An immutable, cheaply clonable term.
#[derive(Clone, PartialEq, Eq)]
pub struct Term(Arc<TermKind>);

impl Term {
    pub fn new(kind: TermKind) -> Self {
        Term(Arc::new(kind))
    }

    pub fn kind(&self) -> &TermKind {
        &self.0
    }

    pub fn ptr_eq(a: &Term, b: &Term) -> bool {
        Arc::ptr_eq(&a.0, &b.0)
    }

    pub fn var(name: impl Into<Name>) -> Term {
        Term::new(TermKind::Var(name.into()))
    }

    pub fn meta(name: impl Into<Name>) -> Term {
        Term::new(TermKind::Meta(name.into()))
    }

    pub fn lam(x: impl Into<Name>, body: Term) -> Term {
        Term::new(TermKind::Lam(x.into(), body))
    }

    pub fn int(i: impl Into<BigInt>) -> Term {
        Term::new(TermKind::Int(i.into()))
    }

    pub fn bool(b: bool) -> Term {
        Term::new(TermKind::Bool(b))
    }

    pub fn unit() -> Term {
        Term::new(TermKind::Unit)
    }

    pub fn case(
        scrut: Term,
        l: impl Into<Name>,
        lbody: Term,
        r: impl Into<Name>,
        rbody: Term,
    ) -> Term {
        Term::new(TermKind::Case(scrut, l.into(), lbody, r.into(), rbody))
    }

    pub fn prim(p: Prim, args: Vec<Term>) -> Term {
        debug_assert!(p.arity().map_or(true, |n| n == args.len()));
        Term::new(TermKind::Prim(p, args))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::prim(Prim::App, vec![f, a])
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::prim(Prim::Pair, vec![a, b])
    }

    pub fn fst(p: Term) -> Term {
        Term::prim(Prim::Fst, vec![p])
    }

    pub fn snd(p: Term) -> Term {
        Term::prim(Prim::Snd, vec![p])
    }

    pub fn inl(t: Term) -> Term {
        Term::prim(Prim::Inl, vec![t])
    }

    pub fn inr(t: Term) -> Term {
        Term::prim(Prim::Inr, vec![t])
    }

    pub fn list(items: Vec<Term>) -> Term {
        Term::prim(Prim::List, items)
    }

    pub fn binop(p: Prim, a: Term, b: Term) -> Term {
        Term::prim(p, vec![a, b])
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self.kind() {
            TermKind::Int(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&Name> {
        match self.kind() {
            TermKind::Var(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_prim(&self) -> Option<(Prim, &[Term])> {
        match self.kind() {
            TermKind::Prim(p, args) => Some((*p, args)),
            _ => None,
        }
    }

    /// Children in positional order. Binder names are not children.
    pub fn children(&self) -> Vec<&Term> {
        match self.kind() {
            TermKind::Var(_)
            | TermKind::Meta(_)
            | TermKind::Int(_)
            | TermKind::Bool(_)
            | TermKind::Unit => Vec::new(),
            TermKind::Lam(_, b) => vec![b],
            TermKind::Case(s, _, l, _, r) => vec![s, l, r],
            TermKind::Prim(_, args) => args.iter().collect(),
        }
    }

    pub fn num_children(&self) -> usize {
        match self.kind() {
            TermKind::Lam(..) => 1,
            TermKind::Case(..) => 3,
            TermKind::Prim(_, args) => args.len(),
            _ => 0,
        }
    }

    pub fn child(&self, i: usize) -> Option<&Term> {
        match self.kind() {
            TermKind::Lam(_, b) if i == 0 => Some(b),
            TermKind::Case(s, _, l, _, r) => match i {
                0 => Some(s),
                1 => Some(l),
                2 => Some(r),
                _ => None,
            },
            TermKind::Prim(_, args) => args.get(i),
            _ => None,
        }
    }

    /// The variable bound over child `i`, if that child sits under a binder.
    pub fn binder_of_child(&self, i: usize) -> Option<&Name> {
        match self.kind() {
            TermKind::Lam(x, _) if i == 0 => Some(x),
            TermKind::Case(_, l, _, _, _) if i == 1 => Some(l),
            TermKind::Case(_, _, _, r, _) if i == 2 => Some(r),
            _ => None,
        }
    }

    /// Rebuilds this node with new children, keeping binder names.
    pub fn with_children(&self, mut kids: Vec<Term>) -> Term {
        assert_eq!(kids.len(), self.num_children(), "child count mismatch");
        match self.kind() {
            TermKind::Lam(x, _) => Term::lam(x.clone(), kids.pop().unwrap()),
            TermKind::Case(_, l, _, r, _) => {
                let rb = kids.pop().unwrap();
                let lb = kids.pop().unwrap();
                let s = kids.pop().unwrap();
                Term::case(s, l.clone(), lb, r.clone(), rb)
            }
            TermKind::Prim(p, _) => Term::prim(*p, kids),
            _ => self.clone(),
        }
    }

    /// Same node kind and, for leaves, the same payload; binder names ignored.
    pub fn same_head(&self, other: &Term) -> bool {
        match (self.kind(), other.kind()) {
            (TermKind::Var(a), TermKind::Var(b)) => a == b,
            (TermKind::Meta(a), TermKind::Meta(b)) => a == b,
            (TermKind::Lam(..), TermKind::Lam(..)) => true,
            (TermKind::Int(a), TermKind::Int(b)) => a == b,
            (TermKind::Bool(a), TermKind::Bool(b)) => a == b,
            (TermKind::Unit, TermKind::Unit) => true,
            (TermKind::Case(..), TermKind::Case(..)) => true,
            (TermKind::Prim(p, a), TermKind::Prim(q, b)) => p == q && a.len() == b.len(),
            _ => false,
        }
    }

    pub fn subterm(&self, path: &Path) -> Option<&Term> {
        let mut t = self;
        for &i in &path.0 {
            t = t.child(i)?;
        }
        Some(t)
    }

    /// Replaces the subterm at `path`; `None` if the path does not exist.
    pub fn replace_at(&self, path: &Path, new: Term) -> Option<Term> {
        self.replace_from(&path.0, new)
    }

    fn replace_from(&self, path: &[usize], new: Term) -> Option<Term> {
        match path.split_first() {
            None => Some(new),
            Some((&i, rest)) => {
                let child = self.child(i)?;
                let replaced = child.replace_from(rest, new)?;
                let mut kids: Vec<Term> = self.children().into_iter().cloned().collect();
                kids[i] = replaced;
                Some(self.with_children(kids))
            }
        }
    }

    /// Binder names crossed on the way from the root to `path`, outermost first.
    pub fn binders_along(&self, path: &Path) -> Option<Vec<Name>> {
        let mut t = self;
        let mut out = Vec::new();
        for &i in &path.0 {
            if let Some(x) = t.binder_of_child(i) {
                out.push(x.clone());
            }
            t = t.child(i)?;
        }
        Some(out)
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Term::size).sum::<usize>()
    }

    pub fn contains_meta(&self) -> bool {
        match self.kind() {
            TermKind::Meta(_) => true,
            _ => self.children().into_iter().any(Term::contains_meta),
        }
    }

    /// All subterm paths in pre-order.
    pub fn paths(&self) -> Vec<Path> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn go(t: &Term, cur: &mut Vec<usize>, out: &mut Vec<Path>) {
            out.push(Path(cur.clone()));
            for (i, c) in t.children().into_iter().enumerate() {
                cur.push(i);
                go(c, cur, out);
                cur.pop();
            }
        }
        go(self, &mut cur, &mut out);
        out
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_term(self))
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A position in a term: child indices from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn root() -> Path {
        Path(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parent(&self) -> Option<Path> {
        let mut v = self.0.clone();
        v.pop().map(|_| Path(v))
    }

    pub fn child(&self, i: usize) -> Path {
        let mut v = self.0.clone();
        v.push(i);
        Path(v)
    }

    pub fn is_prefix_of(&self, other: &Path) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Parses `[]`, `0.2.1`, `0,2,1` or `[0,2,1]`.
    pub fn parse(s: &str) -> Option<Path> {
        let s = s.trim();
        let s = s.strip_prefix('[').unwrap_or(s);
        let s = s.strip_suffix(']').unwrap_or(s);
        if s.trim().is_empty() || s.trim() == "root" {
            return Some(Path::root());
        }
        s.split(['.', ','])
            .map(|p| p.trim().parse::<usize>().ok())
            .collect::<Option<Vec<_>>>()
            .map(Path)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "]")
    }
}

impl From<Vec<usize>> for Path {
    fn from(v: Vec<usize>) -> Self {
        Path(v)
    }
}
