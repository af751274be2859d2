use ffl_core::chain::{verify_chain, ChainManifest};
use ffl_core::eval::{run_program, EvalResult};
use ffl_core::il::interp::{run_il, IlValue};
use ffl_core::il::{parse_il, translate_with, LoopMode, TranslateOptions};
use ffl_core::Term;

use crate::{fixture, fixture_path};

/// Every integer list of length `n` over `lo..=hi`.
pub fn lists_of_len(n: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|l| {
                (lo..=hi).map(move |x| {
                    let mut l = l.clone();
                    l.push(x);
                    l
                })
            })
            .collect();
    }
    out
}

fn ints(xs: &[i64]) -> Term {
    Term::list(xs.iter().map(|&x| Term::int(x)).collect())
}

pub fn run() -> Result<String, String> {
    let mut checked = 0usize;
    for file in ["sum/sum_arrays.il", "sum/sum_arrays_zipped.il"] {
        let prog = parse_il(&fixture(file)).map_err(|e| format!("{file}: {e}"))?;
        let translations: Vec<Term> = [LoopMode::Fold, LoopMode::Iter]
            .into_iter()
            .map(|m| translate_with(&prog, TranslateOptions { for_loops: m, ..Default::default() }))
            .collect::<Result<_, _>>()
            .map_err(|e| format!("{file}: {e}"))?;
        for n in 0..=3 {
            let lists = lists_of_len(n, -2, 2);
            for xs in &lists {
                for ys in &lists {
                    let terms = [ints(xs), ints(ys), Term::int(n as i64)];
                    let il_args: Vec<IlValue> = terms.iter().map(|t| IlValue::from_term(t).unwrap()).collect();
                    let want = run_il(&prog, &il_args, 100_000)
                        .map_err(|e| format!("{file} {xs:?} {ys:?}: interpreter failed: {e:?}"))?
                        .to_term()
                        .ok_or("interpreter result is not first-order")?;
                    for t in &translations {
                        let got = run_program(t, &terms, 100_000);
                        if got != EvalResult::Value(want.clone()) {
                            return Err(format!("{file} on {xs:?} {ys:?}: IL gives {want}, translation gives {got}"));
                        }
                        checked += 1;
                    }
                }
            }
        }
    }
    let m = ChainManifest::load(&fixture_path("sum/sum.chain")).map_err(|e| e.to_string())?;
    let report = verify_chain(&m).map_err(|e| e.to_string())?;
    if report.overall() != "Equivalent" {
        return Err(format!("sum chain: {report}"));
    }
    Ok(format!("{checked} translated runs agree with the interpreter\nsum chain Equivalent"))
}
