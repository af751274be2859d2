//! Core library for the FFL language: terms, typing, evaluation, the IL
//! frontend, rewrite rules and the equivalence engine.

pub mod binding;
pub mod chain;
pub mod equiv;
pub mod eval;
pub mod il;
pub mod norm;
pub mod notation;
pub mod premise;
pub mod rewrite;
pub mod syntax;
pub mod term;
pub mod types;

pub use term::{Name, Path, Prim, Term, TermKind};
pub use types::{Type, TypeContext, TypeError};
