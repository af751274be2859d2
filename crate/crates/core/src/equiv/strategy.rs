//! The proof strategy: diff, local methods, premises and widening.

use std::collections::BTreeSet;
use std::fmt;

use crate::binding::{alpha_equal, free_vars};
use crate::eval::{Outcome, Program};
use crate::norm::normalize;
use crate::premise::Premise;
use crate::rewrite::{
    apply_rule, approximate_match, discharge_all, find_rule, instantiate_reduced, Direction, RewriteRule,
};
use crate::term::{Name, Path, Prim, Term, TermKind};
use crate::types::{context_at, typecheck, Type, TypeContext};

use super::coupling::{fold_trace, iter_trace, max_steps, states_equal, summarize, Applier, Trace};
use super::diff::{align_binders, congruence_lift, diff, DiffResult};
use super::grid::{premise_holds, InputGrid, ParamDomain, ScopeVar, TupleSpace};
use super::oracle::{apply_fresh_args, oracle, Counterexample, Evidence, Inconclusive, Verdict};
use super::premises::add_missing_premises;

/// Guidance for one proof.
#[derive(Clone, Debug)]
pub enum Hint {
    /// Try a catalog rule (by id, name or form label) at a path of the
    /// left program, or wherever the diff lands if no path is given.
    Rule { rule: String, direction: Option<Direction>, at: Option<Path> },
    /// Relate the loops at a path with a coupling predicate.
    Couple { predicate: Term, at: Option<Path> },
}

impl Hint {
    fn at(&self) -> Option<&Path> {
        match self {
            Hint::Rule { at, .. } | Hint::Couple { at, .. } => at.as_ref(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PremiseStatus {
    Open,
    Discharged { at: Path, how: String },
    /// A wider check succeeded without needing the premise.
    Subsumed { at: Path },
}

#[derive(Clone, Debug)]
pub struct PremiseRecord {
    pub premise: Premise,
    /// Check path (scope) the premise's variables refer to.
    pub introduced_at: Path,
    pub status: PremiseStatus,
}

#[derive(Clone, Debug)]
pub struct ReportStep {
    pub level: Path,
    pub method: String,
    pub outcome: String,
}

#[derive(Clone, Debug, Default)]
pub struct ProofReport {
    pub diff_path: Option<Path>,
    pub steps: Vec<ReportStep>,
    pub premises: Vec<PremiseRecord>,
    pub widenings: usize,
    pub oracle_calls: usize,
}

impl ProofReport {
    fn step(&mut self, level: &Path, method: impl Into<String>, outcome: impl Into<String>) {
        self.steps.push(ReportStep {
            level: level.clone(),
            method: method.into(),
            outcome: outcome.into(),
        });
    }

    pub fn open_premises(&self) -> Vec<Premise> {
        self.premises
            .iter()
            .filter(|r| r.status == PremiseStatus::Open)
            .map(|r| r.premise.clone())
            .collect()
    }

    pub fn discharged(&self) -> impl Iterator<Item = &PremiseRecord> {
        self.premises
            .iter()
            .filter(|r| matches!(r.status, PremiseStatus::Discharged { .. }))
    }
}

impl fmt::Display for ProofReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.diff_path {
            Some(p) => writeln!(f, "diff {p}")?,
            None => writeln!(f, "diff identical")?,
        }
        for s in &self.steps {
            writeln!(f, "step {} {}: {}", s.level, s.method, s.outcome)?;
        }
        for r in &self.premises {
            match &r.status {
                PremiseStatus::Open => writeln!(f, "premise {} from {}: open", r.premise, r.introduced_at)?,
                PremiseStatus::Discharged { at, how } => writeln!(
                    f,
                    "premise {} from {}: discharged at {at} ({how})",
                    r.premise, r.introduced_at
                )?,
                PremiseStatus::Subsumed { at } => {
                    writeln!(f, "premise {} from {}: not needed at {at}", r.premise, r.introduced_at)?
                }
            }
        }
        writeln!(f, "widenings {} oracle-calls {}", self.widenings, self.oracle_calls)
    }
}

/// Shared state of one proof.
struct Prover<'a> {
    p: &'a Term,
    q: Term,
    grid: &'a InputGrid,
    /// Parameters bound by the leading lambdas of both programs.
    root: Vec<(Name, Type)>,
    /// Path of the body under the leading lambdas.
    body: Path,
    report: ProofReport,
}

/// Result of the local methods at one level.
enum Local {
    Proven(Evidence),
    /// Holds if these premises hold (scoped at the level's check path).
    Conditional(Evidence, Vec<Premise>),
    Failed(Verdict),
}

impl<'a> Prover<'a> {
    /// Records a premise unless an identical one is still pending.
    fn add_premise(&mut self, pending: &mut Vec<usize>, premise: Premise, at: &Path) {
        let dup = pending.iter().any(|&i| {
            let r = &self.report.premises[i];
            r.status == PremiseStatus::Open && r.premise == premise
        });
        if !dup {
            pending.push(self.report.premises.len());
            self.report.premises.push(PremiseRecord {
                premise,
                introduced_at: at.clone(),
                status: PremiseStatus::Open,
            });
        }
    }

    fn sub(&self, c: &Path) -> (Term, Term) {
        (
            self.p.subterm(c).expect("level path in p").clone(),
            self.q.subterm(c).expect("level path in q").clone(),
        )
    }

    /// Moves below lambdas both sides share, so a function-valued level is
    /// checked through its binders.
    fn check_path(&self, level: &Path) -> Path {
        let mut c = level.clone();
        loop {
            let (a, b) = (self.p.subterm(&c), self.q.subterm(&c));
            match (a.map(Term::kind), b.map(Term::kind)) {
                (Some(TermKind::Lam(x, _)), Some(TermKind::Lam(y, _))) if x == y => c = c.child(0),
                _ => return c,
            }
        }
    }

    /// Input variables at `c`: visible variables free in either side or in
    /// `extra`, with root-parameter domains where the name is not shadowed.
    fn scope(&self, c: &Path, extra: &[&Term]) -> (Vec<ScopeVar>, Vec<Premise>, Type) {
        let (ctx, ty) = context_at(&TypeContext::new(), self.p, c).expect("typed program");
        let binders = self.p.binders_along(c).unwrap_or_default();
        let k = self.root.len().min(binders.len());
        let unshadowed = |x: &Name| self.root.iter().any(|(r, _)| r == x) && !binders[k..].contains(x);
        let (pt, qt) = self.sub(c);
        let mut wanted: BTreeSet<Name> = free_vars(&pt);
        wanted.extend(free_vars(&qt));
        for t in extra {
            wanted.extend(free_vars(t));
        }
        // derived parameters need their sources
        let mut changed = true;
        while changed {
            changed = false;
            for x in wanted.clone() {
                if let (true, Some(ParamDomain::Derived(t))) = (unshadowed(&x), self.grid.domains.get(&x)) {
                    for y in free_vars(t) {
                        changed |= wanted.insert(y);
                    }
                }
            }
        }
        let vars: Vec<ScopeVar> = ctx
            .visible()
            .into_iter()
            .filter(|(x, _)| wanted.contains(x))
            .map(|(x, t)| ScopeVar {
                domain: if unshadowed(&x) { self.grid.domains.get(&x).cloned() } else { None },
                name: x,
                ty: t,
            })
            .collect();
        let names: BTreeSet<&Name> = vars.iter().map(|v| &v.name).collect();
        let assumptions = self
            .grid
            .assumptions
            .iter()
            .filter(|a| {
                a.terms()
                    .iter()
                    .all(|t| free_vars(t).iter().all(|x| names.contains(x) && unshadowed(x)))
            })
            .cloned()
            .collect();
        (vars, assumptions, ty)
    }

    fn oracle_on(&mut self, c: &Path, pt: &Term, qt: &Term, premises: &[Premise]) -> Verdict {
        let (mut vars, mut filters, ty) = self.scope(c, &[]);
        let (pt, qt) = apply_fresh_args(pt, qt, &ty, &mut vars);
        filters.extend(premises.iter().cloned());
        self.report.oracle_calls += 1;
        oracle(&pt, &qt, &vars, self.grid, &filters)
    }

    fn oracle_at(&mut self, c: &Path, premises: &[Premise]) -> Verdict {
        let (pt, qt) = self.sub(c);
        self.oracle_on(c, &pt, &qt, premises)
    }

    /// Checks `premise` (about the scope at `scope`) every time either
    /// program reaches `scope` while running the level `c` on its grid.
    fn discharge_at(&mut self, c: &Path, premise: &Premise, scope: &Path) -> Result<u64, String> {
        let rel = Path(scope.0[c.len()..].to_vec());
        let terms: Vec<Term> = premise.terms().into_iter().cloned().collect();
        let inner = self.p.binders_along(scope).unwrap_or_default();
        let outer = self.p.binders_along(c).unwrap_or_default();
        let local: BTreeSet<&Name> = inner[outer.len()..].iter().collect();
        let needed: Vec<Term> = terms
            .iter()
            .flat_map(free_vars)
            .filter(|x| !local.contains(x))
            .map(Term::var)
            .collect();
        let needed_refs: Vec<&Term> = needed.iter().collect();
        let (mut vars, filters, ty) = self.scope(c, &needed_refs);
        let (pt, qt) = self.sub(c);
        let nargs = ty.uncurry().0.len();
        let (pt, qt) = apply_fresh_args(&pt, &qt, &ty, &mut vars);
        let mut at = Path(vec![0; nargs]);
        at.0.extend(rel.0.iter().copied());
        let space = TupleSpace::new(&vars, self.grid, &filters);
        if space.raw_count() > self.grid.budget as u128 {
            return Err(format!("{} tuples exceed the budget", space.raw_count()));
        }
        let mut hits = 0u64;
        let mut failure: Option<String> = None;
        for t in [&pt, &qt] {
            let prog = Program::compile(t, &space.names);
            let Some(probe) = prog.probe(&at, &terms, self.grid.fuel) else {
                return Err("probe position missing".into());
            };
            space.for_each(u64::MAX, &mut |tuple| {
                let mut on_hit = |outs: &[Outcome]| {
                    hits += 1;
                    if failure.is_none() && !premise_holds(premise, outs) {
                        failure = Some(format!("fails at {}", super::oracle::show_inputs(
                            &space.names.iter().cloned().zip(tuple.iter().map(|v| v.to_term())).collect::<Vec<_>>(),
                        )));
                    }
                };
                prog.run_probed(tuple, self.grid.fuel, &probe, &mut on_hit);
                failure.is_none()
            });
            if let Some(f) = failure.take() {
                return Err(f);
            }
        }
        Ok(hits)
    }

    fn close(&mut self, c: &Path, a: &Term, b: &Term) -> bool {
        if alpha_equal(a, b) || alpha_equal(&normalize(a), &normalize(b)) {
            return true;
        }
        self.oracle_on(c, a, b, &[]).is_equivalent()
    }

    /// The rewrite workflow: find a candidate instantiation relating both
    /// sides, confirm each side against its instance, then discharge the
    /// side conditions.
    fn try_rule(&mut self, c: &Path, rule: &RewriteRule, form: Option<usize>, dir: Option<Direction>, deeper: Option<Path>) -> Option<Local> {
        let (pt, qt) = self.sub(c);
        let (_, assumptions, _) = self.scope(c, &[]);
        let dirs = match dir {
            Some(d) => vec![d],
            None => vec![Direction::LeftToRight, Direction::RightToLeft],
        };
        if let Some(rel) = deeper {
            for d in &dirs {
                if let Ok((out, residual)) = apply_rule(rule, *d, &pt, &rel, &assumptions) {
                    if alpha_equal(&normalize(&out), &normalize(&qt)) {
                        return Some(self.rule_result(rule, *d, residual));
                    }
                }
            }
            return None;
        }
        for (i, f) in rule.forms.iter().enumerate() {
            if form.is_some_and(|k| k != i) {
                continue;
            }
            for d in &dirs {
                let Ok(s) = approximate_match(f, *d, &pt, &qt) else { continue };
                let (src, dst) = d.patterns(f);
                let (Ok(a), Ok(b)) = (instantiate_reduced(src, &s), instantiate_reduced(dst, &s)) else { continue };
                if !self.close(c, &a, &pt) || !self.close(c, &b, &qt) {
                    continue;
                }
                match discharge_all(f, &s, &assumptions) {
                    Ok(residual) => return Some(self.rule_result(rule, *d, residual)),
                    Err(e) => {
                        self.report.step(c, format!("rule {}", rule.id()), e.to_string());
                    }
                }
            }
        }
        None
    }

    fn rule_result(&self, rule: &RewriteRule, d: Direction, residual: Vec<Premise>) -> Local {
        let ev = Evidence {
            method: format!("rule {} {}", rule.id(), d.as_str()),
            detail: rule.name.to_string(),
            tuples: 0,
        };
        if residual.is_empty() {
            Local::Proven(ev)
        } else {
            Local::Conditional(ev, residual)
        }
    }

    /// Peels `app(λx.body, e)` lets and returns the loop underneath with
    /// the lets it sits in.
    fn peel(t: &Term) -> (Vec<(Name, Term)>, Term) {
        let mut lets = Vec::new();
        let mut t = t.clone();
        loop {
            let next = match t.as_prim() {
                Some((Prim::App, [f, e])) => match f.kind() {
                    TermKind::Lam(x, body) => Some((x.clone(), e.clone(), body.clone())),
                    _ => None,
                },
                _ => None,
            };
            match next {
                Some((x, e, body)) => {
                    lets.push((x, e));
                    t = body;
                }
                None => return (lets, t),
            }
        }
    }

    fn wrap(lets: &[(Name, Term)], t: &Term) -> Term {
        lets.iter()
            .rev()
            .fold(t.clone(), |acc, (x, e)| Term::app(Term::lam(x.clone(), acc), e.clone()))
    }

    fn try_coupling(&mut self, c: &Path, pred: &Term) -> Verdict {
        let (pt, qt) = self.sub(c);
        let (lp, lo) = Self::peel(&pt);
        let (lq, hi) = Self::peel(&qt);
        let parts = |lets: &[(Name, Term)], t: &Term| -> Option<(Prim, Vec<Term>)> {
            match t.as_prim() {
                Some((p @ (Prim::Fold | Prim::Iter), args)) => {
                    Some((p, args.iter().map(|a| Self::wrap(lets, a)).collect()))
                }
                _ => None,
            }
        };
        let (Some((k1, a)), Some((k2, b))) = (parts(&lp, &lo), parts(&lq, &hi)) else {
            return Verdict::Inconclusive(Inconclusive::NotCouplable("no fold/iter pair at this level".into()));
        };
        if k1 != k2 {
            return Verdict::Inconclusive(Inconclusive::NotCouplable("loop kinds differ".into()));
        }
        let (vars, filters, _) = self.scope(c, &[]);
        let space = TupleSpace::new(&vars, self.grid, &filters);
        if space.raw_count() > self.grid.budget as u128 {
            return Verdict::Inconclusive(Inconclusive::Budget {
                scanned: 0,
                total: space.raw_count(),
            });
        }
        let comp = |ts: &[Term]| -> Vec<Program> { ts.iter().map(|t| Program::compile(t, &space.names)).collect() };
        let (pa, pb) = (comp(&a), comp(&b));
        let Some(cv) = crate::eval::Val::from_term(pred) else {
            return Verdict::Inconclusive(Inconclusive::NotCouplable("predicate is not a closed function".into()));
        };
        let ap = Applier::new(self.grid.fuel);
        let mut traces = Vec::new();
        let mut all_equal = true;
        let fuel = self.grid.fuel;
        space.for_each(u64::MAX, &mut |tuple| {
            let run = |ps: &[Program]| -> Option<Vec<crate::eval::Val>> {
                ps.iter().map(|p| p.run(tuple, fuel).value().cloned()).collect()
            };
            let (Some(x), Some(y)) = (run(&pa), run(&pb)) else {
                traces.push(Trace::Shape("loop components do not evaluate".into()));
                return false;
            };
            let tr = if k1 == Prim::Fold {
                match (x[2].as_list(), y[2].as_list()) {
                    (Some(xs), Some(ys)) => fold_trace(&ap, &x[0], &y[0], x[1].clone(), y[1].clone(), xs, ys, &cv),
                    _ => Trace::Shape("fold input is not an array".into()),
                }
            } else {
                iter_trace(&ap, &x[0], &y[0], x[1].clone(), y[1].clone(), &cv, max_steps(self.grid))
            };
            all_equal &= states_equal(&tr);
            let keep_going = matches!(tr, Trace::Holds { .. } | Trace::BothStuck { .. });
            traces.push(tr);
            keep_going
        });
        let v = summarize(traces);
        match v {
            Verdict::Equivalent(mut e) if all_equal => {
                e.detail.push_str("; final states coincide");
                Verdict::Equivalent(e)
            }
            Verdict::Equivalent(e) => Verdict::Inconclusive(Inconclusive::NotCouplable(format!(
                "{}, but the final states differ",
                e.detail
            ))),
            other => other,
        }
    }

    /// Alpha, hinted rule, hinted coupling, then the oracle.
    fn local(&mut self, level: &Path, c: &Path, hints: &mut Vec<Hint>) -> Local {
        let (pt, qt) = self.sub(c);
        if alpha_equal(&pt, &qt) {
            return Local::Proven(Evidence {
                method: "alpha".into(),
                detail: "alpha-equal".into(),
                tuples: 0,
            });
        }
        let body = self.body.clone();
        let applies = |h: &Hint| match h.at() {
            None => true,
            Some(h) => h == level || c.is_prefix_of(h) || (*c == body && h.is_prefix_of(&body)),
        };
        let mut k = 0;
        while k < hints.len() {
            if !applies(&hints[k]) {
                k += 1;
                continue;
            }
            match hints[k].clone() {
                Hint::Rule { rule, direction, at } => {
                    let Some((r, form)) = find_rule(&rule) else {
                        self.report.step(c, format!("rule {rule}"), "unknown rule");
                        hints.remove(k);
                        continue;
                    };
                    let deeper = at
                        .filter(|h| h != level && h != c && c.is_prefix_of(h))
                        .map(|h| Path(h.0[c.len()..].to_vec()));
                    match self.try_rule(c, r, form, direction, deeper) {
                        Some(res) => {
                            hints.remove(k);
                            return res;
                        }
                        None => {
                            self.report.step(c, format!("rule {}", r.id()), "no applicable instance");
                            k += 1;
                        }
                    }
                }
                Hint::Couple { predicate, at } => {
                    if at.as_ref().is_some_and(|h| h != level && h != c && !h.is_prefix_of(&body)) {
                        k += 1;
                        continue;
                    }
                    let v = self.try_coupling(c, &predicate);
                    match v {
                        Verdict::Equivalent(e) => {
                            hints.remove(k);
                            return Local::Proven(e);
                        }
                        other => {
                            self.report.step(c, "coupling", other.to_string());
                            k += 1;
                        }
                    }
                }
            }
        }
        let v = self.oracle_at(c, &[]);
        match v {
            Verdict::Equivalent(e) => Local::Proven(e),
            other => Local::Failed(other),
        }
    }

    fn lift(&mut self, level: &Path, ev: Evidence) -> Verdict {
        let v = Verdict::Equivalent(ev);
        if level.is_root() {
            return v;
        }
        congruence_lift(v.clone(), self.p, &self.q, level).unwrap_or(v)
    }
}

/// Tries to show `p` and `q` equivalent on the grid, following the diff
/// outward until some local method succeeds. Free variables are treated
/// as parameters; paths in hints and in the report refer to the terms as
/// given.
pub fn prove_equivalent(p: &Term, q: &Term, hints: &[Hint], grid: &InputGrid) -> (Verdict, ProofReport) {
    let mut open: BTreeSet<Name> = free_vars(p);
    open.extend(free_vars(q));
    if open.is_empty() {
        return prove_closed(p, q, hints, grid);
    }
    let close = |t: &Term| open.iter().rev().fold(t.clone(), |acc, x| Term::lam(x.clone(), acc));
    let w = open.len();
    let shift = |h: &Path| {
        let mut v = vec![0; w];
        v.extend(h.0.iter().copied());
        Path(v)
    };
    let hints: Vec<Hint> = hints
        .iter()
        .map(|h| match h.clone() {
            Hint::Rule { rule, direction, at } => Hint::Rule { rule, direction, at: at.as_ref().map(shift) },
            Hint::Couple { predicate, at } => Hint::Couple { predicate, at: at.as_ref().map(shift) },
        })
        .collect();
    let (v, mut report) = prove_closed(&close(p), &close(q), &hints, grid);
    let unshift = |h: &mut Path| {
        let k = w.min(h.0.len());
        h.0.drain(..k);
    };
    if let Some(d) = report.diff_path.as_mut() {
        unshift(d);
    }
    for s in &mut report.steps {
        unshift(&mut s.level);
    }
    for r in &mut report.premises {
        unshift(&mut r.introduced_at);
        if let PremiseStatus::Discharged { at, .. } | PremiseStatus::Subsumed { at } = &mut r.status {
            unshift(at);
        }
    }
    (v, report)
}

fn prove_closed(p: &Term, q: &Term, hints: &[Hint], grid: &InputGrid) -> (Verdict, ProofReport) {
    let mut report = ProofReport::default();
    let ctx = TypeContext::new();
    let (tp, tq) = match (typecheck(&ctx, p), typecheck(&ctx, q)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            return (Verdict::Inconclusive(Inconclusive::TypeMismatch(e.to_string())), report);
        }
    };
    if tp != tq {
        let msg = format!("{tp} vs {tq}");
        return (Verdict::Inconclusive(Inconclusive::TypeMismatch(msg)), report);
    }
    let q = align_binders(p, q);
    let start = match diff(p, &q) {
        DiffResult::Identical => {
            report.step(&Path::root(), "alpha", "identical up to binder names");
            let ev = Evidence {
                method: "alpha".into(),
                detail: "identical up to binder names".into(),
                tuples: 0,
            };
            return (Verdict::Equivalent(ev), report);
        }
        DiffResult::Differ { path, .. } => path,
    };
    report.diff_path = Some(start.clone());

    // leading lambdas shared by both programs are the parameters
    let (arg_tys, _) = tp.uncurry();
    let mut root = Vec::new();
    let mut body = Path::root();
    let (mut a, mut b) = (p, &q);
    while let (TermKind::Lam(x, pb), TermKind::Lam(y, qb)) = (a.kind(), b.kind()) {
        if x != y || root.len() == arg_tys.len() {
            break;
        }
        root.push((x.clone(), arg_tys[root.len()].clone()));
        body = body.child(0);
        a = pb;
        b = qb;
    }
    let mut level = if start.len() < body.len() { body.clone() } else { start };

    let mut pr = Prover {
        p,
        q: q.clone(),
        grid,
        root,
        body: body.clone(),
        report,
    };
    let mut hints = hints.to_vec();
    let mut pending: Vec<usize> = Vec::new(); // indices into report.premises
    let mut last: Option<Verdict> = None;
    let mut prev_c: Option<Path> = None;

    loop {
        let c = pr.check_path(&level);
        if prev_c.as_ref() != Some(&c) {
            // premises from narrower scopes, checked on traces of this level
            let open: Vec<usize> = pending
                .iter()
                .copied()
                .filter(|&i| pr.report.premises[i].status == PremiseStatus::Open)
                .collect();
            let mut all = !open.is_empty();
            for i in &open {
                let rec = pr.report.premises[*i].clone();
                if !c.is_prefix_of(&rec.introduced_at) || (rec.introduced_at == c && c != pr.body) {
                    all = false;
                    continue;
                }
                match pr.discharge_at(&c, &rec.premise, &rec.introduced_at) {
                    Ok(hits) => {
                        pr.report.premises[*i].status = PremiseStatus::Discharged {
                            at: c.clone(),
                            how: format!("holds at all {hits} evaluations of its scope"),
                        };
                        pr.report.step(&c, "discharge", format!("{} holds on traces", rec.premise));
                    }
                    Err(why) => {
                        all = false;
                        pr.report.step(&c, "discharge", format!("{}: {why}", rec.premise));
                    }
                }
            }
            if all {
                let v = pr.oracle_at(&c, &[]);
                pr.report.step(&c, "oracle", v.to_string());
                match v {
                    Verdict::Equivalent(_) | Verdict::Inconclusive(Inconclusive::Budget { .. }) => {
                        let ev = Evidence {
                            method: "premises".into(),
                            detail: format!("local equivalence with premises discharged at {c}"),
                            tuples: 0,
                        };
                        let out = pr.lift(&level, ev);
                        return (out, pr.report);
                    }
                    Verdict::NotEquivalent(cex) if c == pr.body => {
                        return (Verdict::NotEquivalent(cex), pr.report);
                    }
                    other => last = Some(other),
                }
            } else {
                match pr.local(&level, &c, &mut hints) {
                    Local::Proven(ev) => {
                        pr.report.step(&c, ev.method.clone(), ev.detail.clone());
                        for i in &pending {
                            if pr.report.premises[*i].status == PremiseStatus::Open {
                                pr.report.premises[*i].status = PremiseStatus::Subsumed { at: c.clone() };
                            }
                        }
                        let out = pr.lift(&level, ev);
                        return (out, pr.report);
                    }
                    Local::Conditional(ev, ps) => {
                        pr.report.step(&c, ev.method.clone(), format!("{} under {} premise(s)", ev.detail, ps.len()));
                        for prem in ps {
                            pr.add_premise(&mut pending, prem, &c);
                        }
                        if c == pr.body {
                            // the parameters' own assumptions are the only context left
                            prev_c = None;
                            continue;
                        }
                    }
                    Local::Failed(v) => {
                        pr.report.step(&c, "oracle", v.to_string());
                        if let Verdict::NotEquivalent(cex) = &v {
                            if c == pr.body || level.is_root() {
                                return (v, pr.report);
                            }
                            let found = missing_premises(&mut pr, &c, cex);
                            if !found.is_empty() {
                                let names: Vec<String> = found.iter().map(|p| p.to_string()).collect();
                                pr.report.step(&c, "premises", format!("holds under {}", names.join(", ")));
                            }
                            for prem in found {
                                pr.add_premise(&mut pending, prem, &c);
                            }
                        }
                        last = Some(v);
                    }
                }
            }
        }
        prev_c = Some(c);
        if level.len() <= pr.body.len() {
            break;
        }
        level = level.parent().expect("non-root level");
        pr.report.widenings += 1;
    }
    let open = pr.report.open_premises();
    let v = if !open.is_empty() {
        Verdict::Inconclusive(Inconclusive::OpenPremises(open))
    } else {
        match last {
            Some(Verdict::Inconclusive(r)) => Verdict::Inconclusive(r),
            _ => Verdict::Inconclusive(Inconclusive::Budget { scanned: 0, total: 0 }),
        }
    };
    (v, pr.report)
}

fn missing_premises(pr: &mut Prover<'_>, c: &Path, cex: &Counterexample) -> Vec<Premise> {
    let (vars, _, _) = pr.scope(c, &[]);
    let scope: Vec<(Name, Type)> = vars.iter().map(|v| (v.name.clone(), v.ty.clone())).collect();
    add_missing_premises(cex, &scope, &mut |ps| pr.oracle_at(c, ps).is_equivalent())
}
