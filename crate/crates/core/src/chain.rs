//! Chains of programs checked pairwise.
//!
//! A manifest is line oriented. `#` starts a comment. Sections:
//!
//! ```text
//! [grid]
//! int = -2..2
//! len = 3
//! fuel = 200000
//! budget = 1000000
//! domain n = derived (length xs)
//! domain g = graphs 4
//! domain pts = lists 0..3 6
//! domain k = ints 1..2
//! assume equal-length xs ys
//!
//! [program]
//! file = sum_arrays.il        # lang defaults from the extension
//!
//! [step]                      # hints for the step into the next program
//! hint = R7:ltr@0.0.0
//! couple = same_array.ffl@0.0.0
//! premise = equal-length xs ys
//!
//! [program]
//! file = sum_arrays_zipped.il
//! ```

use std::fmt;
use std::path::{Path as FsPath, PathBuf};

use thiserror::Error;

use crate::equiv::{prove_equivalent, Hint, InputGrid, ParamDomain, ProofReport, Verdict};
use crate::il::{parse_il, translate, IlError};
use crate::premise::Premise;
use crate::rewrite::{find_rule, Direction};
use crate::syntax::{parse_term, parse_terms, ParseError};
use crate::term::{Path, Term};
use crate::types::{typecheck, Type, TypeContext};

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("manifest line {line}: {msg}")]
    Manifest { line: usize, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Il { path: String, source: IlError },
    #[error("{path}: {source}")]
    Ffl { path: String, source: ParseError },
    #[error("{path}: type error: {msg}")]
    Type { path: String, msg: String },
    #[error("signature mismatch between {left} ({left_ty}) and {right} ({right_ty})")]
    Signature {
        left: String,
        right: String,
        left_ty: Type,
        right_ty: Type,
    },
    #[error("a chain needs at least two programs")]
    TooShort,
}

impl ChainError {
    pub fn is_io(&self) -> bool {
        matches!(self, ChainError::Io { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lang {
    Il,
    Ffl,
}

impl Lang {
    pub fn from_path(p: &FsPath) -> Lang {
        match p.extension().and_then(|e| e.to_str()) {
            Some("il") => Lang::Il,
            _ => Lang::Ffl,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProgramEntry {
    pub file: PathBuf,
    pub lang: Lang,
}

/// Hints for the step from program `i` to program `i + 1`.
#[derive(Clone, Debug, Default)]
pub struct StepHints {
    pub hints: Vec<HintSpec>,
    /// Extra assumptions on the parameters for this step only.
    pub premises: Vec<Premise>,
}

/// A hint as written; coupling predicates are loaded with the programs.
#[derive(Clone, Debug)]
pub enum HintSpec {
    Rule { rule: String, direction: Option<Direction>, at: Option<Path> },
    Couple { file: PathBuf, at: Option<Path> },
}

#[derive(Clone, Debug)]
pub struct ChainManifest {
    pub programs: Vec<ProgramEntry>,
    /// `steps[i]` belongs between `programs[i]` and `programs[i + 1]`.
    pub steps: Vec<StepHints>,
    pub grid: InputGrid,
}

/// Splits `RULE[:ltr|:rtl][@PATH]`.
pub fn parse_rule_hint(s: &str) -> Result<HintSpec, String> {
    let (head, at) = split_at_path(s)?;
    let (rule, dir) = match head.split_once(':') {
        Some((r, "ltr")) => (r, Some(Direction::LeftToRight)),
        Some((r, "rtl")) => (r, Some(Direction::RightToLeft)),
        Some((_, d)) => return Err(format!("unknown direction `{d}`")),
        None => (head, None),
    };
    if find_rule(rule).is_none() {
        return Err(format!("unknown rule `{rule}`"));
    }
    Ok(HintSpec::Rule {
        rule: rule.to_string(),
        direction: dir,
        at,
    })
}

/// Splits `FILE[@PATH]`.
pub fn parse_couple_hint(s: &str, base: &FsPath) -> Result<HintSpec, String> {
    let (file, at) = split_at_path(s)?;
    Ok(HintSpec::Couple { file: base.join(file), at })
}

fn split_at_path(s: &str) -> Result<(&str, Option<Path>), String> {
    match s.rsplit_once('@') {
        Some((h, p)) => {
            let path = Path::parse(p).ok_or_else(|| format!("bad path `{p}`"))?;
            Ok((h.trim(), Some(path)))
        }
        None => Ok((s.trim(), None)),
    }
}

/// `equal-length A B`, `not-stuck T` or `value-equal A B`, with terms in
/// s-expression syntax.
pub fn parse_premise(s: &str) -> Result<Premise, String> {
    let s = s.trim();
    let (kind, rest) = s.split_once(char::is_whitespace).ok_or("premise needs terms")?;
    let ts = parse_terms(rest).map_err(|e| e.to_string())?;
    match (kind, ts.as_slice()) {
        ("equal-length", [a, b]) => Ok(Premise::EqualLength(a.clone(), b.clone())),
        ("value-equal", [a, b]) => Ok(Premise::ValueEqual(a.clone(), b.clone())),
        ("not-stuck", [a]) => Ok(Premise::NotStuck(a.clone())),
        _ => Err(format!("unknown premise `{s}`")),
    }
}

fn parse_range(s: &str) -> Option<(i64, i64)> {
    let (a, b) = s.trim().split_once("..")?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

/// `graphs N`, `ints A..B`, `lists A..B N`, `derived TERM`, `values T...`.
pub fn parse_domain(s: &str) -> Result<ParamDomain, String> {
    let s = s.trim();
    let (kind, rest) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
    let rest = rest.trim();
    let bad = || format!("bad domain `{s}`");
    match kind {
        "graphs" => rest.parse().map(ParamDomain::Graphs).map_err(|_| bad()),
        "ints" => parse_range(rest).map(|(a, b)| ParamDomain::Ints(a, b)).ok_or_else(bad),
        "lists" => {
            let (r, n) = rest.split_once(char::is_whitespace).ok_or_else(bad)?;
            let (lo, hi) = parse_range(r).ok_or_else(bad)?;
            let max_len = n.trim().parse().map_err(|_| bad())?;
            Ok(ParamDomain::IntLists { lo, hi, max_len })
        }
        "derived" => parse_term(rest).map(ParamDomain::Derived).map_err(|e| e.to_string()),
        "values" => parse_terms(rest).map(ParamDomain::Values).map_err(|e| e.to_string()),
        _ => Err(bad()),
    }
}

impl ChainManifest {
    /// Parses manifest text; relative file names resolve against `base`.
    pub fn parse(text: &str, base: &FsPath) -> Result<ChainManifest, ChainError> {
        #[derive(PartialEq)]
        enum Sec {
            None,
            Grid,
            Program,
            Step,
        }
        let mut sec = Sec::None;
        let mut programs: Vec<ProgramEntry> = Vec::new();
        let mut steps: Vec<StepHints> = Vec::new();
        let mut grid = InputGrid::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| ChainError::Manifest { line, msg };
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            match l {
                "[grid]" => {
                    sec = Sec::Grid;
                    continue;
                }
                "[program]" => {
                    sec = Sec::Program;
                    continue;
                }
                "[step]" => {
                    if programs.is_empty() {
                        return Err(err("[step] before the first [program]".into()));
                    }
                    if steps.len() >= programs.len() {
                        return Err(err("two [step] sections in a row".into()));
                    }
                    steps.resize_with(programs.len(), StepHints::default);
                    sec = Sec::Step;
                    continue;
                }
                _ if l.starts_with('[') => return Err(err(format!("unknown section {l}"))),
                _ => {}
            }
            match sec {
                Sec::Grid => {
                    if let Some(rest) = l.strip_prefix("domain ") {
                        let (name, d) = rest.split_once('=').ok_or_else(|| err("expected `domain NAME = ...`".into()))?;
                        grid.domains.insert(name.trim().into(), parse_domain(d).map_err(err)?);
                    } else if let Some(rest) = l.strip_prefix("assume ") {
                        grid.assumptions.push(parse_premise(rest).map_err(err)?);
                    } else {
                        let (k, v) = kv(l).ok_or_else(|| err(format!("expected key = value, got `{l}`")))?;
                        let num = |v: &str| v.parse::<u64>().map_err(|_| err(format!("bad number `{v}`")));
                        match k {
                            "int" => {
                                let (a, b) = parse_range(v).ok_or_else(|| err(format!("bad range `{v}`")))?;
                                grid.int_lo = a;
                                grid.int_hi = b;
                            }
                            "len" => grid.max_len = num(v)? as usize,
                            "fuel" => grid.fuel = num(v)?,
                            "budget" => grid.budget = num(v)?,
                            "elem-cap" => grid.elem_cap = num(v)? as usize,
                            _ => return Err(err(format!("unknown grid key `{k}`"))),
                        }
                    }
                }
                Sec::Program => {
                    let (k, v) = kv(l).ok_or_else(|| err(format!("expected key = value, got `{l}`")))?;
                    match k {
                        "file" => {
                            if steps.len() < programs.len() {
                                steps.resize_with(programs.len(), StepHints::default);
                            }
                            let file = base.join(v);
                            programs.push(ProgramEntry {
                                lang: Lang::from_path(&file),
                                file,
                            });
                        }
                        "lang" => {
                            let p = programs.last_mut().ok_or_else(|| err("`lang` before `file`".into()))?;
                            p.lang = match v {
                                "il" => Lang::Il,
                                "ffl" => Lang::Ffl,
                                _ => return Err(err(format!("unknown language `{v}`"))),
                            };
                        }
                        _ => return Err(err(format!("unknown program key `{k}`"))),
                    }
                }
                Sec::Step => {
                    let (k, v) = kv(l).ok_or_else(|| err(format!("expected key = value, got `{l}`")))?;
                    let st = steps.last_mut().expect("step section opened");
                    match k {
                        "hint" => st.hints.push(parse_rule_hint(v).map_err(err)?),
                        "couple" => st.hints.push(parse_couple_hint(v, base).map_err(err)?),
                        "premise" => st.premises.push(parse_premise(v).map_err(err)?),
                        _ => return Err(err(format!("unknown step key `{k}`"))),
                    }
                }
                Sec::None => return Err(err("content outside a section".into())),
            }
        }
        if programs.len() < 2 {
            return Err(ChainError::TooShort);
        }
        steps.resize_with(programs.len() - 1, StepHints::default);
        Ok(ChainManifest { programs, steps, grid })
    }

    pub fn load(path: &FsPath) -> Result<ChainManifest, ChainError> {
        let text = read(path)?;
        let base = path.parent().unwrap_or(FsPath::new("."));
        ChainManifest::parse(&text, base)
    }
}

fn kv(l: &str) -> Option<(&str, &str)> {
    let (k, v) = l.split_once('=')?;
    Some((k.trim(), v.trim()))
}

pub fn read(path: &FsPath) -> Result<String, ChainError> {
    std::fs::read_to_string(path).map_err(|source| ChainError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a program file, translating IL to FFL.
pub fn load_program(path: &FsPath, lang: Lang) -> Result<Term, ChainError> {
    let text = read(path)?;
    let shown = path.display().to_string();
    match lang {
        Lang::Ffl => parse_term(&text).map_err(|source| ChainError::Ffl { path: shown, source }),
        Lang::Il => {
            let p = parse_il(&text).map_err(|source| ChainError::Il { path: shown.clone(), source })?;
            translate(&p).map_err(|source| ChainError::Il { path: shown, source })
        }
    }
}

/// Turns hint specs into strategy hints, loading predicate files.
pub fn resolve_hints(specs: &[HintSpec]) -> Result<Vec<Hint>, ChainError> {
    specs
        .iter()
        .map(|h| match h {
            HintSpec::Rule { rule, direction, at } => Ok(Hint::Rule {
                rule: rule.clone(),
                direction: *direction,
                at: at.clone(),
            }),
            HintSpec::Couple { file, at } => Ok(Hint::Couple {
                predicate: load_program(file, Lang::Ffl)?,
                at: at.clone(),
            }),
        })
        .collect()
}

pub struct StepReport {
    pub from: String,
    pub to: String,
    pub verdict: Verdict,
    pub report: ProofReport,
}

pub struct ChainReport {
    pub signature: Type,
    pub steps: Vec<StepReport>,
}

impl ChainReport {
    /// Equivalent iff every step is; NotEquivalent if any step is.
    pub fn overall(&self) -> &'static str {
        if self.steps.iter().any(|s| s.verdict.is_not_equivalent()) {
            "NotEquivalent"
        } else if self.steps.iter().all(|s| s.verdict.is_equivalent()) {
            "Equivalent"
        } else {
            "Inconclusive"
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.overall() {
            "Equivalent" => 0,
            "NotEquivalent" => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for ChainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "signature {}", self.signature)?;
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "step {} {} -> {}: {}", i + 1, s.from, s.to, s.verdict)?;
            for line in s.report.to_string().lines() {
                writeln!(f, "  {line}")?;
            }
        }
        writeln!(f, "chain {}", self.overall())
    }
}

fn display_name(p: &FsPath) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Translates and typechecks every program, then proves each adjacent
/// pair equivalent with its hints.
pub fn verify_chain(m: &ChainManifest) -> Result<ChainReport, ChainError> {
    if m.programs.len() < 2 {
        return Err(ChainError::TooShort);
    }
    let mut terms = Vec::new();
    let mut sig: Option<(String, Type)> = None;
    for e in &m.programs {
        let t = load_program(&e.file, e.lang)?;
        let name = display_name(&e.file);
        let ty = typecheck(&TypeContext::new(), &t).map_err(|err| ChainError::Type {
            path: e.file.display().to_string(),
            msg: err.to_string(),
        })?;
        match &sig {
            None => sig = Some((name.clone(), ty)),
            Some((first, fty)) if *fty != ty => {
                return Err(ChainError::Signature {
                    left: first.clone(),
                    right: name,
                    left_ty: fty.clone(),
                    right_ty: ty,
                })
            }
            _ => {}
        }
        terms.push((name, t));
    }
    let hints: Vec<Vec<Hint>> = m.steps.iter().map(|s| resolve_hints(&s.hints)).collect::<Result<_, _>>()?;
    let mut steps = Vec::new();
    for i in 0..terms.len() - 1 {
        let mut grid = m.grid.clone();
        grid.assumptions.extend(m.steps[i].premises.iter().cloned());
        let (v, report) = prove_equivalent(&terms[i].1, &terms[i + 1].1, &hints[i], &grid);
        steps.push(StepReport {
            from: terms[i].0.clone(),
            to: terms[i + 1].0.clone(),
            verdict: v,
            report,
        });
    }
    Ok(ChainReport {
        signature: sig.expect("at least two programs").1,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_sections() {
        let text = "
# two programs
[grid]
int = -1..1
len = 2
domain n = derived (length xs)
assume equal-length xs ys

[program]
file = a.il
[step]
hint = R7:ltr@0.0.0
premise = not-stuck xs
[program]
file = b.ffl
";
        let m = ChainManifest::parse(text, FsPath::new("/tmp")).unwrap();
        assert_eq!(m.programs.len(), 2);
        assert_eq!(m.programs[0].lang, Lang::Il);
        assert_eq!(m.programs[1].lang, Lang::Ffl);
        assert_eq!((m.grid.int_lo, m.grid.int_hi, m.grid.max_len), (-1, 1, 2));
        assert_eq!(m.steps.len(), 1);
        assert_eq!(m.steps[0].hints.len(), 1);
        assert_eq!(m.steps[0].premises.len(), 1);
        assert_eq!(m.grid.assumptions.len(), 1);
    }

    #[test]
    fn manifest_errors_carry_lines() {
        let e = ChainManifest::parse("[grid]\nint = x\n", FsPath::new(".")).unwrap_err();
        assert!(matches!(e, ChainError::Manifest { line: 2, .. }));
        let e = ChainManifest::parse("[program]\nfile = a.il\n[step]\nhint = R99\n", FsPath::new(".")).unwrap_err();
        assert!(matches!(e, ChainError::Manifest { line: 4, .. }));
        assert!(matches!(
            ChainManifest::parse("[program]\nfile = a.il\n", FsPath::new(".")),
            Err(ChainError::TooShort)
        ));
    }

    #[test]
    fn hint_syntax() {
        let HintSpec::Rule { rule, direction, at } = parse_rule_hint("fold-to-map:rtl@0.1").unwrap() else { panic!() };
        assert_eq!(rule, "fold-to-map");
        assert_eq!(direction, Some(Direction::RightToLeft));
        assert_eq!(at, Some(Path(vec![0, 1])));
        assert!(parse_rule_hint("R4").is_ok());
        assert!(parse_rule_hint("R4:sideways").is_err());
    }

    #[test]
    fn domains() {
        assert!(matches!(parse_domain("graphs 4"), Ok(ParamDomain::Graphs(4))));
        assert!(matches!(parse_domain("lists 0..3 6"), Ok(ParamDomain::IntLists { lo: 0, hi: 3, max_len: 6 })));
        assert!(matches!(parse_domain("ints 1..2"), Ok(ParamDomain::Ints(1, 2))));
        assert!(parse_domain("derived (length xs)").is_ok());
        assert!(parse_domain("cubes 3").is_err());
    }
}
