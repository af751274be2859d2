//! Random well-typed terms over a small type universe.

use rand::rngs::SmallRng;
use rand::{RngExt, SeedableRng};

use ffl_core::{Name, Prim, Term, Type};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ty {
    Int,
    Bool,
    Ints,
    Pair,
    Fun,
}

impl Ty {
    pub const ALL: [Ty; 5] = [Ty::Int, Ty::Bool, Ty::Ints, Ty::Pair, Ty::Fun];

    pub fn to_type(self) -> Type {
        match self {
            Ty::Int => Type::Int,
            Ty::Bool => Type::Bool,
            Ty::Ints => Type::list(Type::Int),
            Ty::Pair => Type::prod(Type::Int, Type::Int),
            Ty::Fun => Type::arrow(Type::Int, Type::Int),
        }
    }
}

/// Binder names; few on purpose, so shadowing and capture are common.
const BINDERS: [&str; 3] = ["v", "w", "y"];

pub struct Gen {
    pub rng: SmallRng,
    env: Vec<(Name, Ty)>,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: SmallRng::seed_from_u64(seed),
            env: Vec::new(),
        }
    }

    /// Makes `x` available as a free variable of the generated terms.
    pub fn with_free(mut self, x: &str, ty: Ty) -> Gen {
        self.env.push((x.into(), ty));
        self
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.random_range(lo..=hi)
    }

    pub fn ty(&mut self) -> Ty {
        Ty::ALL[self.below(Ty::ALL.len())]
    }

    fn var_of(&mut self, ty: Ty) -> Option<Term> {
        // innermost binding of each name wins
        let mut seen: Vec<&Name> = Vec::new();
        let mut vis: Vec<Name> = Vec::new();
        for (x, t) in self.env.iter().rev() {
            if !seen.contains(&x) {
                seen.push(x);
                if *t == ty {
                    vis.push(x.clone());
                }
            }
        }
        if vis.is_empty() {
            None
        } else {
            let i = self.below(vis.len());
            Some(Term::var(vis[i].clone()))
        }
    }

    fn binder(&mut self) -> Name {
        BINDERS[self.below(BINDERS.len())].into()
    }

    /// `λx.body` with `x : arg` in scope for the body.
    pub fn lam(&mut self, arg: Ty, body: Ty, depth: u32) -> Term {
        let x = self.binder();
        self.env.push((x.clone(), arg));
        let b = self.term(body, depth);
        self.env.pop();
        Term::lam(x, b)
    }

    pub fn term(&mut self, ty: Ty, depth: u32) -> Term {
        if depth == 0 || self.below(4) == 0 {
            return self.leaf(ty);
        }
        let d = depth - 1;
        match ty {
            Ty::Int => match self.below(11) {
                0 => {
                    let op = [Prim::Add, Prim::Sub, Prim::Mul, Prim::Div][self.below(4)];
                    Term::binop(op, self.term(Ty::Int, d), self.term(Ty::Int, d))
                }
                1 => Term::prim(Prim::If, vec![self.term(Ty::Bool, d), self.term(Ty::Int, d), self.term(Ty::Int, d)]),
                2 => Term::fst(self.term(Ty::Pair, d)),
                3 => Term::snd(self.term(Ty::Pair, d)),
                4 => Term::app(self.term(Ty::Fun, d), self.term(Ty::Int, d)),
                5 => Term::prim(Prim::Read, vec![self.term(Ty::Ints, d), self.term(Ty::Int, d)]),
                6 => Term::prim(Prim::Length, vec![self.term(Ty::Ints, d)]),
                7 => {
                    let f = self.lam(Ty::Pair, Ty::Int, d);
                    Term::prim(Prim::Fold, vec![f, self.term(Ty::Int, d), self.term(Ty::Ints, d)])
                }
                8 => Term::fst(self.iter(d)),
                9 => {
                    let x = self.binder();
                    let scrut = Term::prim(Prim::ReadAtKey, vec![self.assoc(d), self.term(Ty::Int, d)]);
                    let none = self.term(Ty::Int, d);
                    self.env.push((x.clone(), Ty::Int));
                    let some = self.term(Ty::Int, d);
                    self.env.pop();
                    Term::case(scrut, "u", none, x, some)
                }
                _ => self.leaf(ty),
            },
            Ty::Bool => {
                let op = [Prim::Lt, Prim::Gt][self.below(2)];
                Term::binop(op, self.term(Ty::Int, d), self.term(Ty::Int, d))
            }
            Ty::Ints => match self.below(6) {
                0 => Term::prim(Prim::Map, vec![self.term(Ty::Fun, d), self.term(Ty::Ints, d)]),
                1 => Term::prim(Prim::Range, vec![self.term(Ty::Int, d), self.term(Ty::Int, d)]),
                2 => Term::prim(Prim::Replicate, vec![self.term(Ty::Int, d), self.term(Ty::Int, d)]),
                3 => Term::prim(Prim::Write, vec![self.term(Ty::Ints, d), self.term(Ty::Int, d), self.term(Ty::Int, d)]),
                4 => {
                    let n = self.below(4);
                    Term::list((0..n).map(|_| self.term(Ty::Int, d)).collect())
                }
                _ => Term::prim(
                    Prim::Map,
                    vec![self.lam(Ty::Pair, Ty::Int, d), Term::prim(Prim::Zip, vec![self.term(Ty::Ints, d), self.term(Ty::Ints, d)])],
                ),
            },
            Ty::Pair => match self.below(3) {
                0 => self.iter(d),
                _ => Term::pair(self.term(Ty::Int, d), self.term(Ty::Int, d)),
            },
            Ty::Fun => self.lam(Ty::Int, Ty::Int, d),
        }
    }

    /// `iter` over an `Int × Int` state; may diverge.
    fn iter(&mut self, d: u32) -> Term {
        let x = self.binder();
        self.env.push((x.clone(), Ty::Pair));
        let cond = self.term(Ty::Bool, d);
        let next = self.term(Ty::Pair, d);
        self.env.pop();
        let body = Term::prim(Prim::If, vec![cond, Term::inr(next), Term::inl(Term::unit())]);
        Term::prim(Prim::Iter, vec![Term::lam(x, body), self.term(Ty::Pair, d)])
    }

    /// A small association list of `Int × Int` pairs.
    fn assoc(&mut self, d: u32) -> Term {
        let n = self.below(3);
        Term::list((0..n).map(|_| Term::pair(self.term(Ty::Int, d), self.term(Ty::Int, d))).collect())
    }

    fn leaf(&mut self, ty: Ty) -> Term {
        if self.below(3) == 0 {
            if let Some(v) = self.var_of(ty) {
                return v;
            }
        }
        match ty {
            Ty::Int => Term::int(self.int_in(-2, 2)),
            Ty::Bool => Term::bool(self.below(2) == 0),
            Ty::Ints => {
                let n = self.below(4);
                Term::list((0..n).map(|_| Term::int(self.int_in(-2, 2))).collect())
            }
            Ty::Pair => Term::pair(Term::int(self.int_in(-2, 2)), Term::int(self.int_in(-2, 2))),
            Ty::Fun => {
                let x = self.binder();
                let body = match self.below(4) {
                    0 => Term::var(x.clone()),
                    1 => Term::binop(Prim::Add, Term::var(x.clone()), Term::int(1)),
                    2 => Term::binop(Prim::Mul, Term::var(x.clone()), Term::int(2)),
                    _ => Term::int(self.int_in(-2, 2)),
                };
                Term::lam(x, body)
            }
        }
    }
}
