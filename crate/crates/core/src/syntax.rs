//! S-expression surface syntax for terms.
//!
//! ```text
//! (lam x body)            (app f a)            (case s l lbody r rbody)
//! (lam (a b) body)        tuple binder, desugared to a pair-taking lambda
//! (lam p@(a b) body)      same, naming the pair binder
//! (list e1 ... en)        ?m  (pattern metavariable)
//! ```
//! `; ...` starts a comment running to the end of the line.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::binding::{free_vars, fresh_name, substitute};
use crate::term::{Name, Prim, Term, TermKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedEof,
    UnexpectedToken(String),
    Unbalanced,
    UnknownConstructor(String),
    Arity {
        keyword: String,
        expected: usize,
        found: usize,
    },
    BadBinder(String),
    TrailingInput,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedEof => write!(f, "unexpected end of input"),
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected token `{t}`"),
            ParseErrorKind::Unbalanced => write!(f, "unbalanced parentheses"),
            ParseErrorKind::UnknownConstructor(c) => write!(f, "unknown constructor `{c}`"),
            ParseErrorKind::Arity {
                keyword,
                expected,
                found,
            } => write!(f, "`{keyword}` takes {expected} operands, found {found}"),
            ParseErrorKind::BadBinder(b) => write!(f, "malformed binder `{b}`"),
            ParseErrorKind::TrailingInput => write!(f, "trailing input after term"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Vec<Spanned> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' | ')' => {
                out.push(Spanned {
                    tok: if c == '(' { Tok::Open } else { Tok::Close },
                    line,
                    col,
                });
                chars.next();
                col += 1;
            }
            _ => {
                let (l0, c0) = (line, col);
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c);
                    chars.next();
                    col += 1;
                }
                out.push(Spanned {
                    tok: Tok::Atom(s),
                    line: l0,
                    col: c0,
                });
            }
        }
    }
    out
}

/// Generic s-expression, used for binder patterns and by other text formats.
#[derive(Debug, Clone)]
enum Sexp {
    Atom(String, usize, usize),
    List(Vec<Sexp>, usize, usize),
}

impl Sexp {
    fn pos(&self) -> (usize, usize) {
        match self {
            Sexp::Atom(_, l, c) | Sexp::List(_, l, c) => (*l, *c),
        }
    }
}

fn err<T>(pos: (usize, usize), kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError {
        line: pos.0,
        col: pos.1,
        kind,
    })
}

fn read_sexps(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let toks = tokenize(text);
    let mut stack: Vec<(Vec<Sexp>, usize, usize)> = Vec::new();
    let mut top = Vec::new();
    for t in toks {
        match t.tok {
            Tok::Open => stack.push((Vec::new(), t.line, t.col)),
            Tok::Close => match stack.pop() {
                Some((items, l, c)) => {
                    let s = Sexp::List(items, l, c);
                    match stack.last_mut() {
                        Some(parent) => parent.0.push(s),
                        None => top.push(s),
                    }
                }
                None => return err((t.line, t.col), ParseErrorKind::Unbalanced),
            },
            Tok::Atom(a) => {
                let s = Sexp::Atom(a, t.line, t.col);
                match stack.last_mut() {
                    Some(parent) => parent.0.push(s),
                    None => top.push(s),
                }
            }
        }
    }
    if let Some((_, l, c)) = stack.pop() {
        return err((l, c), ParseErrorKind::Unbalanced);
    }
    Ok(top)
}

/// Parses exactly one term.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let sexps = read_sexps(text)?;
    match sexps.as_slice() {
        [] => err((1, 1), ParseErrorKind::UnexpectedEof),
        [one] => to_term(one),
        [_, second, ..] => err(second.pos(), ParseErrorKind::TrailingInput),
    }
}

/// Parses a whitespace-separated sequence of terms.
pub fn parse_terms(text: &str) -> Result<Vec<Term>, ParseError> {
    read_sexps(text)?.iter().map(to_term).collect()
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    match cs.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    cs.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

const RESERVED: [&str; 5] = ["lam", "case", "true", "false", "unit"];

fn ident(s: &Sexp) -> Result<Name, ParseError> {
    match s {
        Sexp::Atom(a, ..) if is_ident(a) && !RESERVED.contains(&a.as_str()) => Ok(Name::new(a)),
        Sexp::Atom(a, ..) => err(s.pos(), ParseErrorKind::BadBinder(a.clone())),
        Sexp::List(..) => err(s.pos(), ParseErrorKind::BadBinder("(...)".into())),
    }
}

fn to_term(s: &Sexp) -> Result<Term, ParseError> {
    match s {
        Sexp::Atom(a, ..) => atom(a, s.pos()),
        Sexp::List(items, ..) => {
            let Some((head, rest)) = items.split_first() else {
                return err(s.pos(), ParseErrorKind::UnexpectedToken("()".into()));
            };
            let kw = match head {
                Sexp::Atom(a, ..) => a.as_str(),
                Sexp::List(..) => {
                    return err(head.pos(), ParseErrorKind::UnexpectedToken("(".into()))
                }
            };
            match kw {
                "lam" => {
                    let Some((body, binders)) = rest.split_last() else {
                        return err(s.pos(), ParseErrorKind::UnexpectedEof);
                    };
                    if binders.is_empty() {
                        return err(
                            s.pos(),
                            ParseErrorKind::Arity {
                                keyword: "lam".into(),
                                expected: 2,
                                found: rest.len(),
                            },
                        );
                    }
                    let body = to_term(body)?;
                    lambda(binders, body, s.pos())
                }
                "case" => {
                    if rest.len() != 5 {
                        return err(
                            s.pos(),
                            ParseErrorKind::Arity {
                                keyword: "case".into(),
                                expected: 5,
                                found: rest.len(),
                            },
                        );
                    }
                    Ok(Term::case(
                        to_term(&rest[0])?,
                        ident(&rest[1])?,
                        to_term(&rest[2])?,
                        ident(&rest[3])?,
                        to_term(&rest[4])?,
                    ))
                }
                _ => {
                    let Some(p) = Prim::from_keyword(kw) else {
                        return err(head.pos(), ParseErrorKind::UnknownConstructor(kw.into()));
                    };
                    let args = rest.iter().map(to_term).collect::<Result<Vec<_>, _>>()?;
                    match p.arity() {
                        // `(app f a b)` is curried application
                        Some(2) if p == Prim::App && args.len() > 2 => {
                            let mut it = args.into_iter();
                            let f = it.next().unwrap();
                            Ok(it.fold(f, Term::app))
                        }
                        Some(n) if n != args.len() => err(
                            s.pos(),
                            ParseErrorKind::Arity {
                                keyword: kw.into(),
                                expected: n,
                                found: args.len(),
                            },
                        ),
                        _ => Ok(Term::prim(p, args)),
                    }
                }
            }
        }
    }
}

fn atom(a: &str, pos: (usize, usize)) -> Result<Term, ParseError> {
    match a {
        "true" => return Ok(Term::bool(true)),
        "false" => return Ok(Term::bool(false)),
        "unit" => return Ok(Term::unit()),
        _ => {}
    }
    if let Some(m) = a.strip_prefix('?') {
        if is_ident(m) {
            return Ok(Term::meta(m));
        }
    }
    let digits = a.strip_prefix('-').unwrap_or(a);
    if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
        let i: BigInt = a.parse().expect("validated integer literal");
        return Ok(Term::int(i));
    }
    if is_ident(a) && !RESERVED.contains(&a) {
        return Ok(Term::var(a));
    }
    if Prim::from_keyword(a).is_some() {
        return err(pos, ParseErrorKind::UnexpectedToken(a.into()));
    }
    err(pos, ParseErrorKind::UnexpectedToken(a.into()))
}

/// Tuple binder: a name or a list of exactly two sub-binders.
/// A lambda binder as written: a name or a (possibly named) tuple pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Binder {
    Name(Name),
    Tuple(Option<Name>, Box<Binder>, Box<Binder>),
}

/// Reads binder components from a flat item list, where `p@` followed by a
/// list names the pair binder of that list.
fn binder_seq(items: &[Sexp]) -> Result<Vec<Binder>, ParseError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < items.len() {
        match &items[i] {
            Sexp::Atom(a, l, c) if a.ends_with('@') => {
                let name = ident(&Sexp::Atom(a.trim_end_matches('@').to_string(), *l, *c))?;
                match items.get(i + 1) {
                    Some(Sexp::List(inner, ..)) => {
                        out.push(tuple_binder(Some(name), inner, items[i + 1].pos())?);
                        i += 2;
                    }
                    _ => return err((*l, *c), ParseErrorKind::BadBinder(a.clone())),
                }
            }
            Sexp::Atom(..) => {
                out.push(Binder::Name(ident(&items[i])?));
                i += 1;
            }
            Sexp::List(inner, ..) => {
                out.push(tuple_binder(None, inner, items[i].pos())?);
                i += 1;
            }
        }
    }
    Ok(out)
}

fn tuple_binder(name: Option<Name>, inner: &[Sexp], pos: (usize, usize)) -> Result<Binder, ParseError> {
    let mut parts = binder_seq(inner)?;
    if parts.len() != 2 {
        return err(pos, ParseErrorKind::BadBinder("tuple binders have two components".into()));
    }
    let r = parts.pop().unwrap();
    let l = parts.pop().unwrap();
    Ok(Binder::Tuple(name, Box::new(l), Box::new(r)))
}

fn binder_names(b: &Binder, out: &mut Vec<Name>) {
    match b {
        Binder::Name(n) => out.push(n.clone()),
        Binder::Tuple(named, l, r) => {
            if let Some(n) = named {
                out.push(n.clone());
            }
            binder_names(l, out);
            binder_names(r, out);
        }
    }
}

fn lambda(binder_items: &[Sexp], body: Term, pos: (usize, usize)) -> Result<Term, ParseError> {
    let mut bs = binder_seq(binder_items)?;
    if bs.len() != 1 {
        return err(pos, ParseErrorKind::BadBinder("expected one binder".into()));
    }
    let b = bs.pop().unwrap();
    let mut names = Vec::new();
    binder_names(&b, &mut names);
    let mut seen = std::collections::BTreeSet::new();
    for n in &names {
        if !seen.insert(n.clone()) {
            return err(pos, ParseErrorKind::BadBinder(format!("duplicate `{n}`")));
        }
    }
    Ok(bind(&b, body))
}

/// Builds `λb. body`. Tuple components become projections of one pair
/// variable, named by the pattern or chosen fresh.
pub fn bind(b: &Binder, body: Term) -> Term {
    match b {
        Binder::Name(x) => Term::lam(x.clone(), body),
        Binder::Tuple(named, l, r) => {
            let mut names = Vec::new();
            binder_names(b, &mut names);
            let fv = free_vars(&body);
            let p = named.clone().unwrap_or_else(|| {
                fresh_name(&Name::from("p"), |c| fv.contains(c) || names.contains(c))
            });
            let inner = Binder::Tuple(None, l.clone(), r.clone());
            Term::lam(p.clone(), destructure(body, &inner, &Term::var(p)))
        }
    }
}

fn destructure(body: Term, b: &Binder, access: &Term) -> Term {
    match b {
        Binder::Name(x) => substitute(&body, x, access),
        Binder::Tuple(named, l, r) => {
            let body = match named {
                Some(n) => substitute(&body, n, access),
                None => body,
            };
            let body = destructure(body, l, &Term::fst(access.clone()));
            destructure(body, r, &Term::snd(access.clone()))
        }
    }
}

/// Single-line rendering.
pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(t, &mut out);
    out
}

fn write_term(t: &Term, out: &mut String) {
    match t.kind() {
        TermKind::Var(x) => out.push_str(x.as_str()),
        TermKind::Meta(m) => {
            out.push('?');
            out.push_str(m.as_str());
        }
        TermKind::Int(i) => out.push_str(&i.to_string()),
        TermKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        TermKind::Unit => out.push_str("unit"),
        TermKind::Lam(x, b) => {
            out.push_str("(lam ");
            out.push_str(x.as_str());
            out.push(' ');
            write_term(b, out);
            out.push(')');
        }
        TermKind::Case(s, l, lb, r, rb) => {
            out.push_str("(case ");
            write_term(s, out);
            out.push(' ');
            out.push_str(l.as_str());
            out.push(' ');
            write_term(lb, out);
            out.push(' ');
            out.push_str(r.as_str());
            out.push(' ');
            write_term(rb, out);
            out.push(')');
        }
        TermKind::Prim(p, args) => {
            out.push('(');
            out.push_str(p.keyword());
            for a in args {
                out.push(' ');
                write_term(a, out);
            }
            out.push(')');
        }
    }
}

/// Multi-line rendering that breaks nodes wider than `width` columns.
pub fn pretty(t: &Term, width: usize) -> String {
    let mut out = String::new();
    pretty_into(t, 0, width, &mut out);
    out
}

fn pretty_into(t: &Term, indent: usize, width: usize, out: &mut String) {
    let flat = print_term(t);
    if indent + flat.len() <= width || t.num_children() == 0 {
        out.push_str(&flat);
        return;
    }
    let pad = " ".repeat(indent + 2);
    match t.kind() {
        TermKind::Lam(x, b) => {
            out.push_str(&format!("(lam {x}\n{pad}"));
            pretty_into(b, indent + 2, width, out);
        }
        TermKind::Case(s, l, lb, r, rb) => {
            out.push_str("(case ");
            pretty_into(s, indent + 6, width, out);
            out.push_str(&format!("\n{pad}{l} "));
            pretty_into(lb, indent + 3 + l.as_str().len(), width, out);
            out.push_str(&format!("\n{pad}{r} "));
            pretty_into(rb, indent + 3 + r.as_str().len(), width, out);
        }
        TermKind::Prim(p, args) => {
            out.push('(');
            out.push_str(p.keyword());
            for a in args {
                out.push('\n');
                out.push_str(&pad);
                pretty_into(a, indent + 2, width, out);
            }
        }
        _ => unreachable!("leaves print flat"),
    }
    out.push(')');
}
