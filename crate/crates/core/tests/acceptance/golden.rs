use ffl_core::binding::alpha_equal;
use ffl_core::eval::{eval, EvalResult, DEFAULT_FUEL};
use ffl_core::syntax::parse_term;

use crate::fixture;

pub fn run() -> Result<String, String> {
    let text = fixture("golden/semantics.txt");
    let mut cases = 0;
    let mut failures = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (term, want) = line
            .split_once("=>")
            .ok_or_else(|| format!("line {}: missing =>", no + 1))?;
        let t = parse_term(term).map_err(|e| format!("line {}: {e}", no + 1))?;
        let got = eval(&t, DEFAULT_FUEL);
        let want = want.trim();
        let ok = match (&got, want) {
            (EvalResult::OutOfFuel, "out-of-fuel") => true,
            (EvalResult::Stuck { reason, .. }, w) if w.starts_with("stuck:") => reason.as_str() == &w[6..],
            (EvalResult::Value(v), w) => parse_term(w).map(|w| alpha_equal(v, &w)).unwrap_or(false),
            _ => false,
        };
        cases += 1;
        if !ok {
            failures.push(format!("line {}: {} gave {got}, expected {want}", no + 1, term.trim()));
        }
    }
    if cases < 40 {
        return Err(format!("only {cases} golden cases"));
    }
    if failures.is_empty() {
        Ok(format!("{cases} cases"))
    } else {
        Err(failures.join("\n"))
    }
}
