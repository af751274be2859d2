//! Line-oriented IL parser.

use num_bigint::BigInt;

use super::ast::*;
use super::IlError;
use crate::term::Name;
use crate::types::Type;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(&'static str),
}

const SYMS: &[&str] = &[
    "<-", "->", "==", "!=", "<=", ">=", "&&", "||", "\\", "(", ")", "[", "]", ",", "+", "-", "*", "/", "<",
    ">", "!", ":",
];

fn lex(line: usize, s: &str) -> Result<Vec<Tok>, IlError> {
    let mut out = Vec::new();
    let b = s.as_bytes();
    let mut i = 0;
    'outer: while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let st = i;
            while i < b.len() && (b[i] as char).is_ascii_digit() {
                i += 1;
            }
            out.push(Tok::Int(s[st..i].parse().unwrap()));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < b.len() && ((b[i] as char).is_alphanumeric() || b[i] == b'_' || b[i] == b'\'') {
                i += 1;
            }
            out.push(Tok::Ident(s[st..i].to_string()));
            continue;
        }
        for sym in SYMS {
            if s[i..].starts_with(sym) {
                out.push(Tok::Sym(sym));
                i += sym.len();
                continue 'outer;
            }
        }
        return Err(IlError::Syntax { line, msg: format!("unexpected character `{c}`") });
    }
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "function", "end", "for", "foreach", "in", "to", "until", "while", "if", "then", "else", "return", "true",
    "false", "unit",
];

struct Cursor {
    toks: Vec<Tok>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, IlError> {
        Err(IlError::Syntax { line: self.line, msg: msg.into() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), IlError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn done(&self) -> Result<(), IlError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => self.err(format!("unexpected trailing token {t:?}")),
        }
    }

    fn ident(&mut self) -> Result<Name, IlError> {
        match self.peek().cloned() {
            Some(Tok::Ident(x)) if !KEYWORDS.contains(&x.as_str()) => {
                self.pos += 1;
                Ok(Name::from(x))
            }
            _ => self.err("expected an identifier"),
        }
    }

    fn pattern(&mut self) -> Result<Pattern, IlError> {
        if self.eat_sym("(") {
            let mut parts = vec![self.pattern()?];
            while self.eat_sym(",") {
                parts.push(self.pattern()?);
            }
            self.expect_sym(")")?;
            Ok(nest_patterns(parts))
        } else {
            Ok(Pattern::Var(self.ident()?))
        }
    }

    fn expr(&mut self) -> Result<Expr, IlError> {
        if self.eat_sym("\\") {
            let p = self.pattern()?;
            self.expect_sym("->")?;
            let body = self.expr()?;
            return Ok(Expr::Lambda(p, Box::new(body)));
        }
        if self.eat_kw("if") {
            let c = self.expr()?;
            if !self.eat_kw("then") {
                return self.err("expected `then`");
            }
            let a = self.expr()?;
            if !self.eat_kw("else") {
                return self.err("expected `else`");
            }
            let b = self.expr()?;
            return Ok(Expr::If(Box::new(c), Box::new(a), Box::new(b)));
        }
        self.or()
    }

    fn or(&mut self) -> Result<Expr, IlError> {
        let mut l = self.and()?;
        while self.eat_sym("||") {
            let r = self.and()?;
            l = Expr::Binary(BinOp::Or, Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn and(&mut self) -> Result<Expr, IlError> {
        let mut l = self.cmp()?;
        while self.eat_sym("&&") {
            let r = self.cmp()?;
            l = Expr::Binary(BinOp::And, Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn cmp(&mut self) -> Result<Expr, IlError> {
        let l = self.additive()?;
        let op = match self.peek() {
            Some(Tok::Sym("<")) => BinOp::Lt,
            Some(Tok::Sym(">")) => BinOp::Gt,
            Some(Tok::Sym("<=")) => BinOp::Le,
            Some(Tok::Sym(">=")) => BinOp::Ge,
            Some(Tok::Sym("==")) => BinOp::Eq,
            Some(Tok::Sym("!=")) => BinOp::Ne,
            _ => return Ok(l),
        };
        self.pos += 1;
        let r = self.additive()?;
        Ok(Expr::Binary(op, Box::new(l), Box::new(r)))
    }

    fn additive(&mut self) -> Result<Expr, IlError> {
        let mut l = self.multiplicative()?;
        loop {
            let op = if self.eat_sym("+") {
                BinOp::Add
            } else if self.eat_sym("-") {
                BinOp::Sub
            } else {
                return Ok(l);
            };
            let r = self.multiplicative()?;
            l = Expr::Binary(op, Box::new(l), Box::new(r));
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, IlError> {
        let mut l = self.unary()?;
        loop {
            let op = if self.eat_sym("*") {
                BinOp::Mul
            } else if self.eat_sym("/") {
                BinOp::Div
            } else {
                return Ok(l);
            };
            let r = self.unary()?;
            l = Expr::Binary(op, Box::new(l), Box::new(r));
        }
    }

    fn unary(&mut self) -> Result<Expr, IlError> {
        if self.eat_sym("-") {
            let e = self.unary()?;
            return Ok(match e {
                Expr::Int(n) => Expr::Int(-n),
                e => Expr::Unary(UnOp::Neg, Box::new(e)),
            });
        }
        if self.eat_sym("!") {
            let e = self.unary()?;
            return Ok(Expr::Unary(UnOp::Not, Box::new(e)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, IlError> {
        let mut e = self.primary()?;
        while self.eat_sym("[") {
            let i = self.expr()?;
            self.expect_sym("]")?;
            e = Expr::Index(Box::new(e), Box::new(i));
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, IlError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Int(n))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                if self.eat_sym(")") {
                    return Ok(Expr::Unit);
                }
                let mut parts = vec![self.expr()?];
                while self.eat_sym(",") {
                    parts.push(self.expr()?);
                }
                self.expect_sym(")")?;
                let mut it = parts.into_iter().rev();
                let mut acc = it.next().unwrap();
                for e in it {
                    acc = Expr::Tuple(Box::new(e), Box::new(acc));
                }
                Ok(acc)
            }
            Some(Tok::Sym("[")) => {
                self.pos += 1;
                let mut items = Vec::new();
                if !self.eat_sym("]") {
                    items.push(self.expr()?);
                    while self.eat_sym(",") {
                        items.push(self.expr()?);
                    }
                    self.expect_sym("]")?;
                }
                Ok(Expr::List(items))
            }
            Some(Tok::Ident(x)) => {
                self.pos += 1;
                match x.as_str() {
                    "true" => return Ok(Expr::Bool(true)),
                    "false" => return Ok(Expr::Bool(false)),
                    "unit" => return Ok(Expr::Unit),
                    _ if KEYWORDS.contains(&x.as_str()) => return self.err(format!("unexpected keyword `{x}`")),
                    _ => {}
                }
                if self.eat_sym("(") {
                    let mut args = Vec::new();
                    if !self.eat_sym(")") {
                        args.push(self.expr()?);
                        while self.eat_sym(",") {
                            args.push(self.expr()?);
                        }
                        self.expect_sym(")")?;
                    }
                    Ok(Expr::Call(x, args))
                } else {
                    Ok(Expr::Var(Name::from(x)))
                }
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of line"),
        }
    }
}

fn nest_patterns(parts: Vec<Pattern>) -> Pattern {
    let mut it = parts.into_iter().rev();
    let mut acc = it.next().unwrap();
    for p in it {
        acc = Pattern::Tuple(Box::new(p), Box::new(acc));
    }
    acc
}

enum Stop {
    End,
    Else,
    ElseIf(Box<Stmt>),
}

struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
    next_id: usize,
}

fn strip_comment(s: &str) -> &str {
    let cut = [s.find('#'), s.find("//")].into_iter().flatten().min();
    match cut {
        Some(i) => &s[..i],
        None => s,
    }
}

fn cursor(line: usize, text: &str) -> Result<Cursor, IlError> {
    Ok(Cursor { toks: lex(line, text)?, pos: 0, line })
}

impl Lines<'_> {
    /// Parses statements until a line starting with one of `stops`; returns
    /// the stop keyword (the stop line is consumed).
    fn block(&mut self, stops: &[&str]) -> Result<(Vec<Stmt>, Stop), IlError> {
        let mut out = Vec::new();
        loop {
            let Some(&(line, text)) = self.lines.get(self.pos) else {
                let last = self.lines.last().map(|l| l.0).unwrap_or(0);
                return Err(IlError::Syntax { line: last, msg: "missing `end`".into() });
            };
            let mut c = cursor(line, text)?;
            for stop in stops {
                if c.is_kw(stop) {
                    self.pos += 1;
                    c.pos += 1;
                    if *stop == "end" {
                        c.done()?;
                    }
                    if *stop == "else" && c.peek().is_some() {
                        // `else if c` opens a nested conditional that shares this `end`.
                        if !c.eat_kw("if") {
                            return c.err("expected `if` or end of line after `else`");
                        }
                        let id = self.fresh();
                        let cond = c.expr()?;
                        c.eat_kw("then");
                        c.done()?;
                        let (then_b, stop2) = self.block(&["else", "end"])?;
                        let else_b = self.else_branch(stop2)?;
                        let nested = Stmt { line, id, kind: StmtKind::If { cond, then_b, else_b } };
                        return Ok((out, Stop::ElseIf(Box::new(nested))));
                    }
                    let stop = if *stop == "end" { Stop::End } else { Stop::Else };
                    return Ok((out, stop));
                }
            }
            self.pos += 1;
            out.push(self.stmt(line, c)?);
        }
    }

    fn else_branch(&mut self, stop: Stop) -> Result<Vec<Stmt>, IlError> {
        Ok(match stop {
            Stop::End => Vec::new(),
            Stop::Else => self.block(&["end"])?.0,
            Stop::ElseIf(s) => vec![*s],
        })
    }

    fn fresh(&mut self) -> usize {
        self.next_id += 1;
        self.next_id - 1
    }

    fn stmt(&mut self, line: usize, mut c: Cursor) -> Result<Stmt, IlError> {
        let id = self.fresh();
        let kind = if c.eat_kw("return") {
            let e = c.expr()?;
            c.done()?;
            StmtKind::Return(e)
        } else if c.eat_kw("for") {
            let var = c.ident()?;
            if !c.eat_sym("<-") && !c.eat_kw("in") {
                return c.err("expected `<-` after the loop variable");
            }
            let lo = c.expr()?;
            let inclusive = if c.eat_kw("to") {
                true
            } else if c.eat_kw("until") {
                false
            } else {
                return c.err("expected `to` or `until`");
            };
            let hi = c.expr()?;
            c.done()?;
            let (body, _) = self.block(&["end"])?;
            StmtKind::For { var, lo, hi, inclusive, body }
        } else if c.eat_kw("foreach") {
            let pat = c.pattern()?;
            if !c.eat_kw("in") && !c.eat_sym("<-") {
                return c.err("expected `in`");
            }
            let iter = c.expr()?;
            c.done()?;
            let (body, _) = self.block(&["end"])?;
            StmtKind::Foreach { pat, iter, body }
        } else if c.eat_kw("while") {
            let cond = c.expr()?;
            c.done()?;
            let (body, _) = self.block(&["end"])?;
            StmtKind::While { cond, body }
        } else if c.eat_kw("if") {
            let cond = c.expr()?;
            c.eat_kw("then");
            c.done()?;
            let (then_b, stop) = self.block(&["else", "end"])?;
            let else_b = self.else_branch(stop)?;
            StmtKind::If { cond, then_b, else_b }
        } else {
            // Assignment forms.
            let save = c.pos;
            let pat = if c.is_sym("(") { c.pattern().ok() } else { None };
            if let Some(pat) = pat.filter(|_| c.is_sym("<-")) {
                c.pos += 1;
                let e = c.expr()?;
                c.done()?;
                StmtKind::Assign(pat, e)
            } else {
                c.pos = save;
                let x = c.ident()?;
                if c.eat_sym("[") {
                    let i = c.expr()?;
                    c.expect_sym("]")?;
                    c.expect_sym("<-")?;
                    let v = c.expr()?;
                    c.done()?;
                    StmtKind::AssignIndex(x, i, v)
                } else {
                    c.expect_sym("<-")?;
                    let e = c.expr()?;
                    c.done()?;
                    StmtKind::Assign(Pattern::Var(x), e)
                }
            }
        };
        Ok(Stmt { line, id, kind })
    }
}

/// Splits a parameter list on top-level commas.
fn split_params(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if !s[start..].trim().is_empty() || !out.is_empty() {
        out.push(&s[start..]);
    }
    out
}

fn header(line: usize, text: &str) -> Result<(String, Vec<(Name, Type)>, Option<Type>), IlError> {
    let syntax = |msg: String| IlError::Syntax { line, msg };
    let rest = text
        .trim()
        .strip_prefix("function")
        .filter(|r| r.starts_with(char::is_whitespace))
        .ok_or_else(|| syntax("expected `function Name(params)`".into()))?;
    let open = rest.find('(').ok_or_else(|| syntax("expected `(`".into()))?;
    let name = rest[..open].trim().to_string();
    if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
        return Err(syntax(format!("bad function name `{name}`")));
    }
    let mut depth = 0;
    let mut close = None;
    for (i, ch) in rest[open..].char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    close = Some(open + i);
                    break;
                }
            }
            _ => {}
        }
    }
    let close = close.ok_or_else(|| syntax("unbalanced parentheses".into()))?;
    let mut params = Vec::new();
    for p in split_params(&rest[open + 1..close]) {
        let (x, t) = p.split_once(':').ok_or_else(|| syntax(format!("parameter `{}` needs a type", p.trim())))?;
        let x = x.trim();
        if x.is_empty() || !x.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(syntax(format!("bad parameter name `{x}`")));
        }
        let t = Type::parse(t.trim()).map_err(|e| syntax(format!("bad type: {e}")))?;
        if params.iter().any(|(n, _): &(Name, Type)| n.as_str() == x) {
            return Err(syntax(format!("duplicate parameter `{x}`")));
        }
        params.push((Name::from(x), t));
    }
    let tail = rest[close + 1..].trim();
    let ret = if tail.is_empty() {
        None
    } else {
        let t = tail.strip_prefix("->").ok_or_else(|| syntax("expected `-> Type`".into()))?;
        Some(Type::parse(t.trim()).map_err(|e| syntax(format!("bad return type: {e}")))?)
    };
    Ok((name, params, ret))
}

/// Parses one IL function and checks it is well formed: no recursion or
/// unknown calls, every variable assigned before use and every path
/// ending in `return`.
pub fn parse_il(text: &str) -> Result<IlProgram, IlError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l).trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let Some(&(hline, htext)) = lines.first() else {
        return Err(IlError::Syntax { line: 1, msg: "empty program".into() });
    };
    let (name, params, ret) = header(hline, htext)?;
    let mut ls = Lines { lines, pos: 1, next_id: 0 };
    let (body, _) = ls.block(&["end"])?;
    if let Some(&(line, _)) = ls.lines.get(ls.pos) {
        return Err(IlError::Syntax { line, msg: "text after the closing `end`".into() });
    }
    let p = IlProgram { name, params, ret, body };
    super::check::well_formed(&p)?;
    Ok(p)
}
