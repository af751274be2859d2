//! `ffl`: translate, run and compare FFL programs.

use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use ffl_core::chain::{
    load_program, parse_couple_hint, parse_domain, parse_premise, parse_rule_hint, read, resolve_hints,
    verify_chain, ChainError, ChainManifest, Lang,
};
use ffl_core::equiv::{diff, prove_equivalent, DiffResult, InputGrid};
use ffl_core::eval::{eval, EvalResult, DEFAULT_FUEL};
use ffl_core::il::{parse_il, translate_with, typecheck_il, LoopMode, TranslateOptions};
use ffl_core::notation::{render_math, render_pair};
use ffl_core::rewrite::catalog;
use ffl_core::syntax::pretty;
use ffl_core::{Prim, Term, TypeContext};

const EX_USAGE: u8 = 64;
const EX_DATAERR: u8 = 65;
const EX_NOINPUT: u8 = 66;
const EX_CANTCREAT: u8 = 73;

#[derive(Parser)]
#[command(name = "ffl", version, about = "Equivalence checking for FFL programs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Translate an IL program to FFL.
    Translate {
        file: PathBuf,
        #[arg(short, long)]
        o: Option<PathBuf>,
        /// How counted loops are translated.
        #[arg(long, value_enum, default_value_t = Loops::Fold)]
        loops: Loops,
    },
    /// Print the type of a program.
    Typecheck { file: PathBuf },
    /// Evaluate a program applied to the given arguments.
    Eval {
        file: PathBuf,
        /// An FFL term file passed as the next argument.
        #[arg(long = "arg")]
        args: Vec<PathBuf>,
        #[arg(long, env = "FFL_FUEL", default_value_t = DEFAULT_FUEL)]
        fuel: u64,
    },
    /// Show the smallest differing subterms of two programs.
    Diff { left: PathBuf, right: PathBuf },
    /// Check two programs for equivalence.
    Check {
        left: PathBuf,
        right: PathBuf,
        /// Rewrite rule hint, `RULE[:ltr|:rtl][@PATH]`.
        #[arg(long = "hint")]
        hints: Vec<String>,
        /// Coupling predicate hint, `PRED.ffl[@PATH]`.
        #[arg(long = "couple")]
        couples: Vec<String>,
        /// Parameter domain, `NAME=SPEC` (e.g. `n=derived (length xs)`).
        #[arg(long = "domain")]
        domains: Vec<String>,
        /// Assumed premise, e.g. `equal-length xs ys`.
        #[arg(long = "assume")]
        assumptions: Vec<String>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the rewrite rule catalogue.
    Rules,
    /// Verify every step of a chain manifest.
    VerifyChain {
        manifest: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Loops {
    Fold,
    Iter,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, env = "FFL_FUEL")]
    fuel: Option<u64>,
    /// Integer range, `A..B`.
    #[arg(long = "bound-int")]
    bound_int: Option<String>,
    /// Maximum list length.
    #[arg(long = "bound-len")]
    bound_len: Option<usize>,
}

impl GridArgs {
    fn apply(&self, mut g: InputGrid) -> Result<InputGrid, Failure> {
        if let Some(f) = self.fuel {
            g.fuel = f;
        }
        if let Some(r) = &self.bound_int {
            let (a, b) = r
                .split_once("..")
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .ok_or_else(|| Failure::usage(format!("bad --bound-int `{r}`, expected A..B")))?;
            g.int_lo = a;
            g.int_hi = b;
        }
        if let Some(n) = self.bound_len {
            g.max_len = n;
        }
        Ok(g)
    }
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: String) -> Failure {
        Failure { code: EX_USAGE, msg }
    }
}

impl From<ChainError> for Failure {
    fn from(e: ChainError) -> Failure {
        let code = if e.is_io() { EX_NOINPUT } else { EX_DATAERR };
        Failure { code, msg: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EX_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("ffl: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn program(path: &FsPath) -> Result<Term, Failure> {
    Ok(load_program(path, Lang::from_path(path))?)
}

fn emit(text: &str, out: Option<&FsPath>) -> Result<(), Failure> {
    print!("{text}");
    match out {
        Some(p) => emit_file(text, p),
        None => Ok(()),
    }
}

fn run(cmd: Cmd) -> Result<u8, Failure> {
    match cmd {
        Cmd::Translate { file, o, loops } => {
            let text = read(&file)?;
            let shown = file.display().to_string();
            let il_err = |source| Failure::from(ChainError::Il { path: shown.clone(), source });
            let p = parse_il(&text).map_err(il_err)?;
            let opts = TranslateOptions {
                for_loops: match loops {
                    Loops::Fold => LoopMode::Fold,
                    Loops::Iter => LoopMode::Iter,
                },
                ..TranslateOptions::default()
            };
            let t = translate_with(&p, opts).map_err(il_err)?;
            let out = format!("{}\n", pretty(&t, 80));
            match o {
                Some(path) => emit_file(&out, &path)?,
                None => print!("{out}"),
            }
            Ok(0)
        }
        Cmd::Typecheck { file } => {
            if Lang::from_path(&file) == Lang::Il {
                let text = read(&file)?;
                let shown = file.display().to_string();
                let p = parse_il(&text).map_err(|source| ChainError::Il { path: shown.clone(), source })?;
                typecheck_il(&p).map_err(|source| ChainError::Il { path: shown, source })?;
            }
            let t = program(&file)?;
            let ty = ffl_core::types::typecheck(&TypeContext::new(), &t).map_err(|e| Failure {
                code: EX_DATAERR,
                msg: format!("{}: type error: {e}", file.display()),
            })?;
            println!("{ty}");
            Ok(0)
        }
        Cmd::Eval { file, args, fuel } => {
            let mut t = program(&file)?;
            for a in &args {
                let v = load_program(a, Lang::Ffl)?;
                t = Term::prim(Prim::App, vec![t, v]);
            }
            let r = eval(&t, fuel);
            println!("{r}");
            Ok(match r {
                EvalResult::Value(_) => 0,
                EvalResult::Stuck { .. } => 3,
                EvalResult::OutOfFuel => 4,
            })
        }
        Cmd::Diff { left, right } => {
            let (p, q) = (program(&left)?, program(&right)?);
            match diff(&p, &q) {
                DiffResult::Identical => println!("identical"),
                DiffResult::Differ { left, right, path } => {
                    println!("path {path}");
                    println!("{}", render_pair(&left, &right));
                    println!("left  {left}");
                    println!("right {right}");
                }
            }
            Ok(0)
        }
        Cmd::Check {
            left,
            right,
            hints,
            couples,
            domains,
            assumptions,
            grid,
            out,
        } => {
            let (p, q) = (program(&left)?, program(&right)?);
            let mut specs = Vec::new();
            for h in &hints {
                specs.push(parse_rule_hint(h).map_err(Failure::usage)?);
            }
            for c in &couples {
                specs.push(parse_couple_hint(c, FsPath::new("")).map_err(Failure::usage)?);
            }
            let hints = resolve_hints(&specs)?;
            let mut g = grid.apply(InputGrid::default())?;
            for d in &domains {
                let (name, spec) = d
                    .split_once('=')
                    .ok_or_else(|| Failure::usage(format!("bad --domain `{d}`, expected NAME=SPEC")))?;
                g.domains.insert(name.trim().into(), parse_domain(spec).map_err(Failure::usage)?);
            }
            for a in &assumptions {
                g.assumptions.push(parse_premise(a).map_err(Failure::usage)?);
            }
            let (v, report) = prove_equivalent(&p, &q, &hints, &g);
            emit(&format!("{v}\n{report}"), out.as_deref())?;
            Ok(v.exit_code() as u8)
        }
        Cmd::Rules => {
            for r in catalog() {
                println!("{} {}: {}", r.id(), r.name, r.summary);
                for f in &r.forms {
                    println!("  {}: {}", f.label, render_math(&f.left));
                    println!("    => {}", render_math(&f.right));
                    if !f.side.is_empty() {
                        let side: Vec<String> = f.side.iter().map(|c| c.to_string()).collect();
                        println!("    if {}", side.join(", "));
                    }
                }
            }
            Ok(0)
        }
        Cmd::VerifyChain { manifest, grid, out } => {
            let mut m = ChainManifest::load(&manifest)?;
            m.grid = grid.apply(m.grid)?;
            let report = verify_chain(&m)?;
            emit(&report.to_string(), out.as_deref())?;
            Ok(report.exit_code() as u8)
        }
    }
}

fn emit_file(text: &str, path: &FsPath) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure {
        code: EX_CANTCREAT,
        msg: format!("{}: {e}", path.display()),
    })
}
