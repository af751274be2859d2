use ffl_core::equiv::{prove_equivalent, InputGrid, ParamDomain, PremiseStatus, Verdict};
use ffl_core::il::{parse_il, translate};
use ffl_core::premise::Premise;
use ffl_core::{Prim, Term};

use crate::fixture;

fn il(rel: &str) -> Term {
    translate(&parse_il(&fixture(rel)).unwrap()).unwrap()
}

pub fn run() -> Result<String, String> {
    let p = il("premise/loop_read.il");
    let q = il("premise/loop_zipped.il");
    let grid = InputGrid::default()
        .with_domain("n", ParamDomain::Derived(Term::prim(Prim::Length, vec![Term::var("xs")])))
        .assuming(Premise::EqualLength(Term::var("xs"), Term::var("ys")));
    let (v, report) = prove_equivalent(&p, &q, &[], &grid);
    let shown = format!("{v}\n{report}");
    if !matches!(v, Verdict::Equivalent(_)) {
        return Err(shown);
    }
    let [rec] = report.premises.as_slice() else {
        return Err(format!("expected exactly one premise\n{shown}"));
    };
    if !matches!(rec.premise, Premise::EqualLength(..)) {
        return Err(format!("premise is not EqualLength\n{shown}"));
    }
    // the local oracle must have refuted the pair before the premise appeared
    let refuted = report
        .steps
        .iter()
        .position(|s| s.level == rec.introduced_at && s.method == "oracle" && s.outcome.starts_with("NotEquivalent"));
    let added = report
        .steps
        .iter()
        .position(|s| s.level == rec.introduced_at && s.method == "premises");
    match (refuted, added) {
        (Some(a), Some(b)) if a < b => {}
        _ => return Err(format!("premise not introduced after a refutation\n{shown}")),
    }
    let PremiseStatus::Discharged { at, .. } = &rec.status else {
        return Err(format!("premise not discharged\n{shown}"));
    };
    if !(at.is_prefix_of(&rec.introduced_at) && at.len() < rec.introduced_at.len()) {
        return Err(format!("discharged at {at}, not above {}\n{shown}", rec.introduced_at));
    }
    Ok(format!(
        "{} introduced at {}, discharged at {at}",
        rec.premise, rec.introduced_at
    ))
}
