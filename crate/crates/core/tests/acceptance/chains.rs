use ffl_core::chain::{verify_chain, ChainManifest};
use ffl_core::equiv::{graphs_upto, lists_over};
use ffl_core::eval::{run_program, EvalResult, Val};
use ffl_core::il::interp::{run_il, IlFailure, IlValue};
use ffl_core::il::{parse_il, translate, IlProgram};
use ffl_core::Term;

use crate::fixture_path;

const FUEL: u64 = 1_000_000;

/// Outcome reduced to what both interpreters can report.
#[derive(Debug, PartialEq)]
enum Obs {
    Value(String),
    Stuck,
    Fuel,
}

fn observe_il(p: &IlProgram, args: &[Term]) -> Obs {
    let args: Vec<IlValue> = args.iter().map(|t| IlValue::from_term(t).unwrap()).collect();
    match run_il(p, &args, FUEL) {
        Ok(v) => Obs::Value(v.to_term().expect("first-order result").to_string()),
        Err(IlFailure::Stuck(_)) => Obs::Stuck,
        Err(IlFailure::OutOfFuel) => Obs::Fuel,
    }
}

fn observe_ffl(t: &Term, args: &[Term]) -> Obs {
    match run_program(t, args, FUEL) {
        EvalResult::Value(v) => Obs::Value(v.to_string()),
        EvalResult::Stuck { .. } => Obs::Stuck,
        EvalResult::OutOfFuel => Obs::Fuel,
    }
}

/// Verifies the chain, then runs both endpoints through the IL interpreter
/// and through their translations on every input tuple.
fn case_study(dir: &str, count: usize, inputs: &[Vec<Term>]) -> Result<String, String> {
    let m = ChainManifest::load(&fixture_path(&format!("{dir}/{dir}.chain"))).map_err(|e| e.to_string())?;
    if m.programs.len() != count {
        return Err(format!("{dir}: {} programs, expected {count}", m.programs.len()));
    }
    let report = verify_chain(&m).map_err(|e| e.to_string())?;
    if report.overall() != "Equivalent" {
        return Err(format!("{dir}:\n{report}"));
    }
    let ends: Vec<IlProgram> = [&m.programs[0], &m.programs[count - 1]]
        .iter()
        .map(|e| parse_il(&std::fs::read_to_string(&e.file).unwrap()).unwrap())
        .collect();
    let translated: Vec<Term> = ends.iter().map(|p| translate(p).unwrap()).collect();
    let mut values = 0;
    for args in inputs {
        let first = observe_il(&ends[0], args);
        let all = [
            observe_il(&ends[1], args),
            observe_ffl(&translated[0], args),
            observe_ffl(&translated[1], args),
        ];
        if first == Obs::Fuel || all.iter().any(|o| *o != first) {
            let shown: Vec<String> = args.iter().map(|a| a.to_string()).collect();
            return Err(format!("{dir} on ({}): IL {first:?} vs {all:?}", shown.join(", ")));
        }
        if matches!(first, Obs::Value(_)) {
            values += 1;
        }
    }
    Ok(format!(
        "{dir}: {count} programs, chain Equivalent; endpoints agree with the IL on {} inputs ({values} values)",
        inputs.len()
    ))
}

pub fn run() -> Result<String, String> {
    let mut pr_inputs = Vec::new();
    for g in graphs_upto(4) {
        let links = g.to_term();
        let num = Term::int(g.as_list().unwrap().len() as i64);
        for n in 0..=2 {
            pr_inputs.push(vec![links.clone(), num.clone(), Term::int(n)]);
        }
    }
    let pr = case_study("pagerank", 6, &pr_inputs)?;

    let elems: Vec<Val> = (0..=3).map(Val::Int).collect();
    let mut km_inputs = Vec::new();
    for pts in lists_over(&elems, 6) {
        for k in 1..=2 {
            for n in 0..=2 {
                km_inputs.push(vec![pts.to_term(), Term::int(k), Term::int(n)]);
            }
        }
    }
    let km = case_study("kmeans", 9, &km_inputs)?;
    Ok(format!("{pr}\n{km}"))
}
