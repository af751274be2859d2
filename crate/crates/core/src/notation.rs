//! Mathematical notation for terms: `λ(x,y).x+y` instead of the
//! s-expression form.
//!
//! A lambda whose parameter is only ever projected is shown with a tuple
//! pattern; its components get short names not used elsewhere in the term.

use std::collections::{BTreeSet, HashMap};

use crate::term::{Name, Prim, Term, TermKind};

const POOL: [&str; 10] = ["x", "y", "z", "w", "u", "v", "a", "b", "c", "d"];

/// Renders `t` in infix notation with tuple patterns.
pub fn render_math(t: &Term) -> String {
    let mut taken = BTreeSet::new();
    all_names(t, &mut taken);
    let mut r = Renderer {
        taken,
        env: HashMap::new(),
    };
    r.term(t, 0)
}

/// Renders a diff result pair as `(P, Q)`, each side named independently.
pub fn render_pair(p: &Term, q: &Term) -> String {
    format!("({}, {})", render_math(p), render_math(q))
}

fn all_names(t: &Term, out: &mut BTreeSet<Name>) {
    match t.kind() {
        TermKind::Var(x) => {
            out.insert(x.clone());
        }
        TermKind::Lam(x, _) => {
            out.insert(x.clone());
        }
        TermKind::Case(_, l, _, r, _) => {
            out.insert(l.clone());
            out.insert(r.clone());
        }
        _ => {}
    }
    for c in t.children() {
        all_names(c, out);
    }
}

#[derive(Clone, Debug)]
enum Shape {
    Leaf(Option<Name>),
    Node(Box<Shape>, Box<Shape>),
}

impl Shape {
    /// Inserts a projection path; `false` means the uses cannot form a
    /// pattern (a component is used both whole and projected).
    fn insert(&mut self, path: &[bool]) -> bool {
        let Some((first, rest)) = path.split_first() else {
            return match self {
                Shape::Leaf(n) => {
                    n.get_or_insert_with(|| Name::from(""));
                    true
                }
                Shape::Node(..) => false,
            };
        };
        if let Shape::Leaf(None) = self {
            *self = Shape::Node(Box::new(Shape::Leaf(None)), Box::new(Shape::Leaf(None)));
        }
        match self {
            Shape::Node(l, r) => {
                if *first {
                    r.insert(rest)
                } else {
                    l.insert(rest)
                }
            }
            Shape::Leaf(_) => false,
        }
    }

    fn name_leaves(&mut self, next: &mut dyn FnMut() -> Name) {
        match self {
            Shape::Leaf(Some(n)) => *n = next(),
            Shape::Leaf(None) => {}
            Shape::Node(l, r) => {
                l.name_leaves(next);
                r.name_leaves(next);
            }
        }
    }

    fn leaf(&self, path: &[bool]) -> Option<&Name> {
        match (self, path) {
            (Shape::Leaf(n), []) => n.as_ref(),
            (Shape::Node(l, r), [first, rest @ ..]) => {
                if *first {
                    r.leaf(rest)
                } else {
                    l.leaf(rest)
                }
            }
            _ => None,
        }
    }

    fn show(&self) -> String {
        match self {
            Shape::Leaf(Some(n)) => n.to_string(),
            Shape::Leaf(None) => "_".into(),
            Shape::Node(l, r) => format!("({},{})", l.show(), r.show()),
        }
    }
}

/// Splits a projection chain into its base variable and the path from the
/// variable outwards (`false` = fst).
fn projection(t: &Term) -> Option<(&Name, Vec<bool>)> {
    let mut path = Vec::new();
    let mut cur = t;
    loop {
        match cur.kind() {
            TermKind::Var(x) if !path.is_empty() => {
                path.reverse();
                return Some((x, path));
            }
            TermKind::Prim(Prim::Fst, a) => {
                path.push(false);
                cur = &a[0];
            }
            TermKind::Prim(Prim::Snd, a) => {
                path.push(true);
                cur = &a[0];
            }
            _ => return None,
        }
    }
}

/// The pattern shape of `p` in `body`, if every use is a projection.
fn pattern_of(body: &Term, p: &Name) -> Option<Shape> {
    fn go(t: &Term, p: &Name, shape: &mut Shape) -> bool {
        if let Some((x, path)) = projection(t) {
            if x == p {
                return shape.insert(&path);
            }
        }
        match t.kind() {
            TermKind::Var(x) => x != p,
            TermKind::Lam(x, b) => x == p || go(b, p, shape),
            TermKind::Case(s, l, lb, r, rb) => {
                go(s, p, shape) && (l == p || go(lb, p, shape)) && (r == p || go(rb, p, shape))
            }
            _ => t.children().iter().all(|c| go(c, p, shape)),
        }
    }
    let mut shape = Shape::Leaf(None);
    if go(body, p, &mut shape) && matches!(shape, Shape::Node(..)) {
        Some(shape)
    } else {
        None
    }
}

struct Renderer {
    taken: BTreeSet<Name>,
    env: HashMap<Name, Shape>,
}

fn infix(p: Prim) -> Option<(&'static str, u8)> {
    match p {
        Prim::Lt => Some(("<", 1)),
        Prim::Gt => Some((">", 1)),
        Prim::Add => Some(("+", 2)),
        Prim::Sub => Some(("-", 2)),
        Prim::Mul => Some(("*", 3)),
        Prim::Div => Some(("/", 3)),
        _ => None,
    }
}

impl Renderer {
    fn fresh(&mut self) -> Name {
        let mut i = 0usize;
        loop {
            let n = if i < POOL.len() {
                Name::from(POOL[i])
            } else {
                Name::from(format!("x{}", i - POOL.len() + 1))
            };
            if !self.taken.contains(&n) {
                self.taken.insert(n.clone());
                return n;
            }
            i += 1;
        }
    }

    fn paren(s: String, wrap: bool) -> String {
        if wrap {
            format!("({s})")
        } else {
            s
        }
    }

    /// Renders a subterm under a scope where `x` is rebound plainly.
    fn scoped(&mut self, x: &Name, shape: Option<Shape>, body: &Term) -> String {
        let saved = self.env.remove(x);
        if let Some(s) = shape {
            self.env.insert(x.clone(), s);
        }
        let out = self.term(body, 0);
        self.env.remove(x);
        if let Some(s) = saved {
            self.env.insert(x.clone(), s);
        }
        out
    }

    fn term(&mut self, t: &Term, prec: u8) -> String {
        if let Some((x, path)) = projection(t) {
            if let Some(n) = self.env.get(x).and_then(|s| s.leaf(&path)) {
                return n.to_string();
            }
        }
        match t.kind() {
            TermKind::Var(x) => x.to_string(),
            TermKind::Meta(m) => format!("?{m}"),
            TermKind::Int(i) if i.sign() == num_bigint::Sign::Minus => Self::paren(i.to_string(), prec > 0),
            TermKind::Int(i) => i.to_string(),
            TermKind::Bool(b) => b.to_string(),
            TermKind::Unit => "()".into(),
            TermKind::Lam(x, b) => {
                let s = match pattern_of(b, x) {
                    Some(mut shape) => {
                        shape.name_leaves(&mut || self.fresh());
                        let head = shape.show();
                        format!("λ{head}.{}", self.scoped(x, Some(shape), b))
                    }
                    None => format!("λ{x}.{}", self.scoped(x, None, b)),
                };
                Self::paren(s, prec > 0)
            }
            TermKind::Case(s, l, lb, r, rb) => {
                let scrut = self.term(s, 0);
                let left = self.scoped(l, None, lb);
                let right = self.scoped(r, None, rb);
                Self::paren(format!("case {scrut} of inl {l} ⇒ {left} | inr {r} ⇒ {right}"), prec > 0)
            }
            TermKind::Prim(p, args) => self.prim(*p, args, prec),
        }
    }

    fn prim(&mut self, p: Prim, args: &[Term], prec: u8) -> String {
        if let Some((op, lvl)) = infix(p) {
            let a = self.term(&args[0], lvl);
            let b = self.term(&args[1], lvl + 1);
            return Self::paren(format!("{a}{op}{b}"), prec > lvl);
        }
        match p {
            Prim::Pair => format!("({}, {})", self.term(&args[0], 0), self.term(&args[1], 0)),
            Prim::List => {
                let items: Vec<String> = args.iter().map(|a| self.term(a, 0)).collect();
                format!("[{}]", items.join(", "))
            }
            Prim::Read => format!("{}[{}]", self.term(&args[0], 4), self.term(&args[1], 0)),
            Prim::App => format!("{}({})", self.term(&args[0], 4), self.term(&args[1], 0)),
            Prim::If => Self::paren(
                format!(
                    "if {} then {} else {}",
                    self.term(&args[0], 0),
                    self.term(&args[1], 0),
                    self.term(&args[2], 0)
                ),
                prec > 0,
            ),
            _ => {
                let items: Vec<String> = args.iter().map(|a| self.term(a, 0)).collect();
                format!("{}({})", p.keyword(), items.join(", "))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn m(s: &str) -> String {
        render_math(&parse_term(s).unwrap())
    }

    #[test]
    fn tuple_patterns_and_infix() {
        assert_eq!(m("(lam (x y) (add x y))"), "λ(x,y).x+y");
        assert_eq!(m("(lam (a b) (add b a))"), "λ(x,y).y+x");
        assert_eq!(m("(lam (a (b c)) (mul a c))"), "λ(x,(_,y)).x*y");
    }

    #[test]
    fn whole_uses_keep_the_binder() {
        assert_eq!(m("(lam p (pair (snd p) p))"), "λp.(snd(p), p)");
    }

    #[test]
    fn precedence() {
        assert_eq!(m("(sub x (sub y z))"), "x-(y-z)");
        assert_eq!(m("(mul (add x 1) y)"), "(x+1)*y");
        assert_eq!(m("(fold (lam (s e) (add s e)) 0 xs)"), "fold(λ(x,y).x+y, 0, xs)");
    }

    #[test]
    fn names_avoid_the_term() {
        assert_eq!(m("(lam (a b) (add x (add a b)))"), "λ(y,z).x+(y+z)");
    }
}
