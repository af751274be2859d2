//! Finite input domains for the bounded oracle.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

use crate::binding::free_vars;
use crate::eval::{Fuel, Outcome, Program, Val, DEFAULT_FUEL};
use crate::premise::Premise;
use crate::term::{Name, Prim, Term};
use crate::types::Type;

/// Domain of one named parameter, overriding the type-directed default.
#[derive(Clone, Debug)]
pub enum ParamDomain {
    /// Integers in `lo..=hi`.
    Ints(i64, i64),
    /// Integer lists with elements in `lo..=hi` and at most `max_len` items.
    IntLists { lo: i64, hi: i64, max_len: usize },
    /// Every simple directed graph (no self loops) with 1 to `n` nodes, as
    /// adjacency lists of successor indices.
    Graphs(usize),
    /// An explicit list of closed value terms.
    Values(Vec<Term>),
    /// Computed from the other parameters, e.g. `(length xs)`.
    Derived(Term),
}

impl fmt::Display for ParamDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamDomain::Ints(a, b) => write!(f, "ints {a}..{b}"),
            ParamDomain::IntLists { lo, hi, max_len } => write!(f, "lists {lo}..{hi} {max_len}"),
            ParamDomain::Graphs(n) => write!(f, "graphs {n}"),
            ParamDomain::Values(vs) => {
                write!(f, "values")?;
                for v in vs {
                    write!(f, " {v}")?;
                }
                Ok(())
            }
            ParamDomain::Derived(t) => write!(f, "derived {t}"),
        }
    }
}

/// Enumeration bounds shared by every oracle call of one proof.
#[derive(Clone, Debug)]
pub struct InputGrid {
    pub int_lo: i64,
    pub int_hi: i64,
    pub max_len: usize,
    /// Element domains of lists are cut to this many values unless the
    /// element type is `Int`, `Bool` or `Unit`.
    pub elem_cap: usize,
    pub fuel: Fuel,
    /// Maximum number of tuples scanned per oracle call.
    pub budget: u64,
    /// Per-parameter overrides, by name.
    pub domains: BTreeMap<Name, ParamDomain>,
    /// Preconditions on the parameters; tuples violating them are skipped.
    pub assumptions: Vec<Premise>,
}

impl Default for InputGrid {
    fn default() -> Self {
        InputGrid {
            int_lo: -2,
            int_hi: 2,
            max_len: 3,
            elem_cap: 8,
            fuel: DEFAULT_FUEL,
            budget: 1_000_000,
            domains: BTreeMap::new(),
            assumptions: Vec::new(),
        }
    }
}

impl InputGrid {
    pub fn with_ints(mut self, lo: i64, hi: i64) -> Self {
        self.int_lo = lo;
        self.int_hi = hi;
        self
    }

    pub fn with_len(mut self, n: usize) -> Self {
        self.max_len = n;
        self
    }

    pub fn with_fuel(mut self, fuel: Fuel) -> Self {
        self.fuel = fuel;
        self
    }

    pub fn with_domain(mut self, x: impl Into<Name>, d: ParamDomain) -> Self {
        self.domains.insert(x.into(), d);
        self
    }

    pub fn assuming(mut self, p: Premise) -> Self {
        self.assumptions.push(p);
        self
    }

    /// Short description used in verdict evidence.
    pub fn describe(&self) -> String {
        let mut s = format!("ints {}..{}, len <= {}", self.int_lo, self.int_hi, self.max_len);
        for (x, d) in &self.domains {
            s.push_str(&format!(", {x}: {d}"));
        }
        s
    }
}

/// Integers of a range, small magnitudes first: 0, 1, -1, 2, -2, ...
pub fn int_order(lo: i64, hi: i64) -> Vec<i64> {
    let mut v: Vec<i64> = (lo..=hi).collect();
    v.sort_by_key(|&i| (i.unsigned_abs(), i < 0));
    v
}

/// All lists over `elems` of length `0..=max_len`, shorter first and the
/// first position varying fastest.
pub fn lists_over(elems: &[Val], max_len: usize) -> Vec<Val> {
    let mut out = vec![Val::list(Vec::new())];
    let mut layer: Vec<Vec<Val>> = vec![Vec::new()];
    for _ in 0..max_len {
        if elems.is_empty() {
            break;
        }
        let mut next = Vec::with_capacity(layer.len() * elems.len());
        for e in elems {
            for prefix in &layer {
                let mut v = Vec::with_capacity(prefix.len() + 1);
                v.push(e.clone());
                v.extend(prefix.iter().cloned());
                next.push(v);
            }
        }
        // reorder so the first position varies fastest
        next.sort_by(|a, b| cmp_rev_index(a, b, elems));
        out.extend(next.iter().map(|v| Val::list(v.clone())));
        layer = next;
    }
    out
}

fn cmp_rev_index(a: &[Val], b: &[Val], elems: &[Val]) -> std::cmp::Ordering {
    let idx = |v: &Val| elems.iter().position(|e| e.same(v)).unwrap_or(usize::MAX);
    for k in (0..a.len()).rev() {
        let o = idx(&a[k]).cmp(&idx(&b[k]));
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// Adjacency lists of all simple digraphs with `1..=n` nodes.
pub fn graphs_upto(n: usize) -> Vec<Val> {
    let mut out = Vec::new();
    for nodes in 1..=n {
        let edges: Vec<(usize, usize)> = (0..nodes)
            .flat_map(|a| (0..nodes).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        for mask in 0u64..(1u64 << edges.len()) {
            let mut adj = vec![Vec::new(); nodes];
            for (k, (a, b)) in edges.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    adj[*a].push(Val::Int(*b as i64));
                }
            }
            out.push(Val::list(adj.into_iter().map(Val::list).collect()));
        }
    }
    out
}

/// Type-directed value enumeration with memoization per type.
pub struct Enumerator<'g> {
    grid: &'g InputGrid,
    memo: HashMap<Type, Rc<Vec<Val>>>,
}

impl<'g> Enumerator<'g> {
    pub fn new(grid: &'g InputGrid) -> Self {
        Enumerator {
            grid,
            memo: HashMap::new(),
        }
    }

    pub fn values(&mut self, ty: &Type) -> Rc<Vec<Val>> {
        if let Some(v) = self.memo.get(ty) {
            return v.clone();
        }
        let vals = self.compute(ty);
        let rc = Rc::new(vals);
        self.memo.insert(ty.clone(), rc.clone());
        rc
    }

    fn compute(&mut self, ty: &Type) -> Vec<Val> {
        match ty {
            Type::Int => int_order(self.grid.int_lo, self.grid.int_hi).into_iter().map(Val::Int).collect(),
            Type::Bool => vec![Val::Bool(false), Val::Bool(true)],
            Type::Unit => vec![Val::Unit],
            Type::Prod(a, b) => {
                let (xs, ys) = (self.values(a), self.values(b));
                let mut out = Vec::with_capacity(xs.len() * ys.len());
                for y in ys.iter() {
                    for x in xs.iter() {
                        out.push(Val::pair(x.clone(), y.clone()));
                    }
                }
                out
            }
            Type::Sum(a, b) => {
                let mut out: Vec<Val> = self.values(a).iter().cloned().map(Val::inl).collect();
                out.extend(self.values(b).iter().cloned().map(Val::inr));
                out
            }
            Type::List(e) => {
                let elems = self.values(e);
                let small = matches!(**e, Type::Int | Type::Bool | Type::Unit);
                let cap = if small { elems.len() } else { elems.len().min(self.grid.elem_cap) };
                lists_over(&elems[..cap], self.grid.max_len)
            }
            Type::Arrow(a, b) => self
                .function_pool(a, b)
                .iter()
                .filter_map(Val::from_term)
                .collect(),
        }
    }

    /// Small closed functions of type `a -> b`: identity, successor,
    /// doubling, negation, projections and constants.
    pub fn function_pool(&mut self, a: &Type, b: &Type) -> Vec<Term> {
        let x = || Term::var("x");
        let mut pool = Vec::new();
        if a == b {
            pool.push(Term::lam("x", x()));
        }
        if *a == Type::Int && *b == Type::Int {
            pool.push(Term::lam("x", Term::binop(Prim::Add, x(), Term::int(1))));
            pool.push(Term::lam("x", Term::binop(Prim::Mul, x(), Term::int(2))));
            pool.push(Term::lam("x", Term::binop(Prim::Sub, Term::int(0), x())));
        }
        if let Type::Prod(l, r) = a {
            if **l == *b {
                pool.push(Term::lam("x", Term::fst(x())));
            }
            if **r == *b {
                pool.push(Term::lam("x", Term::snd(x())));
            }
            if **l == Type::Int && **r == Type::Int && *b == Type::Int {
                pool.push(Term::lam("x", Term::binop(Prim::Add, Term::fst(x()), Term::snd(x()))));
            }
        }
        if *a == Type::Int && *b == Type::Bool {
            pool.push(Term::lam("x", Term::binop(Prim::Lt, x(), Term::int(1))));
        }
        for c in self.values(b).iter().take(2) {
            let t = c.to_term();
            if free_vars(&t).is_empty() {
                pool.push(Term::lam("x", t));
            }
        }
        pool
    }
}

/// One enumerated input variable.
#[derive(Clone, Debug)]
pub struct ScopeVar {
    pub name: Name,
    pub ty: Type,
    /// Overrides the type-directed domain.
    pub domain: Option<ParamDomain>,
}

/// The cross product of the independent variables' domains, filtered by
/// assumptions, with derived variables computed per tuple.
pub struct TupleSpace {
    pub names: Vec<Name>,
    independent: Vec<(usize, Rc<Vec<Val>>)>,
    derived: Vec<(usize, Program)>,
    filters: Vec<(Premise, Vec<Program>)>,
    fuel: Fuel,
}

impl TupleSpace {
    pub fn new(vars: &[ScopeVar], grid: &InputGrid, assumptions: &[Premise]) -> TupleSpace {
        let mut en = Enumerator::new(grid);
        let names: Vec<Name> = vars.iter().map(|v| v.name.clone()).collect();
        let mut independent = Vec::new();
        let mut derived = Vec::new();
        for (i, v) in vars.iter().enumerate() {
            let vals = match &v.domain {
                None => en.values(&v.ty),
                Some(ParamDomain::Ints(a, b)) => Rc::new(int_order(*a, *b).into_iter().map(Val::Int).collect()),
                Some(ParamDomain::IntLists { lo, hi, max_len }) => {
                    let elems: Vec<Val> = int_order(*lo, *hi).into_iter().map(Val::Int).collect();
                    Rc::new(lists_over(&elems, *max_len))
                }
                Some(ParamDomain::Graphs(n)) => Rc::new(graphs_upto(*n)),
                Some(ParamDomain::Values(ts)) => Rc::new(ts.iter().filter_map(Val::from_term).collect()),
                Some(ParamDomain::Derived(t)) => {
                    derived.push((i, Program::compile(t, &names)));
                    continue;
                }
            };
            independent.push((i, vals));
        }
        let filters = assumptions
            .iter()
            .filter(|p| !matches!(p, Premise::CouplingHolds { .. }))
            .map(|p| {
                let progs = p.terms().into_iter().map(|t| Program::compile(t, &names)).collect();
                (p.clone(), progs)
            })
            .collect();
        TupleSpace {
            names,
            independent,
            derived,
            filters,
            fuel: grid.fuel,
        }
    }

    /// Number of raw tuples before filtering.
    pub fn raw_count(&self) -> u128 {
        self.independent.iter().map(|(_, v)| v.len() as u128).product()
    }

    /// Visits tuples in order (first variable fastest) until `visit`
    /// returns `false` or `limit` raw tuples have been scanned. Returns the
    /// number of raw tuples scanned.
    pub fn for_each(&self, limit: u64, visit: &mut dyn FnMut(&[Val]) -> bool) -> u64 {
        if self.independent.iter().any(|(_, v)| v.is_empty()) {
            return 0;
        }
        let n = self.names.len();
        let mut idx = vec![0usize; self.independent.len()];
        let mut tuple = vec![Val::Unit; n];
        let mut scanned = 0u64;
        loop {
            if scanned >= limit {
                return scanned;
            }
            scanned += 1;
            for (k, (slot, vals)) in self.independent.iter().enumerate() {
                tuple[*slot] = vals[idx[k]].clone();
            }
            let mut ok = true;
            for (slot, prog) in &self.derived {
                match prog.run(&tuple, self.fuel) {
                    Outcome::Value(v) => tuple[*slot] = v,
                    _ => ok = false,
                }
            }
            if ok && self.admits(&tuple) && !visit(&tuple) {
                return scanned;
            }
            // odometer step
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return scanned;
                }
                idx[k] += 1;
                if idx[k] < self.independent[k].1.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    fn admits(&self, tuple: &[Val]) -> bool {
        self.filters.iter().all(|(p, progs)| {
            let outs: Vec<Outcome> = progs.iter().map(|pr| pr.run(tuple, self.fuel)).collect();
            premise_holds(p, &outs)
        })
    }
}

/// Whether a premise holds given the outcomes of its terms.
pub fn premise_holds(p: &Premise, outs: &[Outcome]) -> bool {
    match p {
        Premise::EqualLength(..) => match (outs[0].value(), outs[1].value()) {
            (Some(a), Some(b)) => match (a.as_list(), b.as_list()) {
                (Some(a), Some(b)) => a.len() == b.len(),
                _ => false,
            },
            _ => false,
        },
        Premise::NotStuck(_) => outs[0].value().is_some(),
        Premise::ValueEqual(..) => match (outs[0].value(), outs[1].value()) {
            (Some(a), Some(b)) => a.same(b),
            _ => false,
        },
        Premise::CouplingHolds { .. } => true,
    }
}
