//! The imperative source language: parsing, checking, translation to FFL
//! and a direct reference interpreter.

pub mod ast;
mod check;
pub mod interp;
mod parse;
mod translate;

pub use ast::IlProgram;
pub use check::typecheck_il;
pub use parse::parse_il;
pub use translate::{expr_to_term, translate, translate_with, LoopMode, TranslateOptions};

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum IlError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: `{var}` is used before it is assigned")]
    UseBeforeAssign { line: usize, var: String },
    #[error("line {line}: recursive call to `{name}`")]
    Recursion { line: usize, name: String },
    #[error("line {line}: unknown function `{name}`")]
    UnknownFunction { line: usize, name: String },
    #[error("line {line}: `{name}` expects {expected} arguments, got {got}")]
    Arity { line: usize, name: String, expected: usize, got: usize },
    #[error("some control path does not end in `return`")]
    MissingReturn,
    #[error("line {line}: unreachable statement")]
    Unreachable { line: usize },
    #[error("line {line}: type error: {msg}")]
    Type { line: usize, msg: String },
    #[error("line {line}: unsupported construct: {msg}")]
    Unsupported { line: usize, msg: String },
}
