//! Surface syntax: lexer, parser, elaborator and printer for `.ocat` files.

use std::fmt;

use thiserror::Error;

use crate::computad::Diagnostic;

pub mod elab;
pub mod lexer;
pub mod parser;
pub mod print;

pub use elab::{elaborate, load, Binding, Elaborated, Event, Options};
pub use parser::{parse, Decl, Expr, ExprKind, SourceFile, TypeExpr};
pub use print::{print_cell, print_computad, print_program, Printer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{span}: {kind}")]
pub struct SurfaceError {
    pub span: Span,
    pub kind: SurfaceErrorKind,
}

impl SurfaceError {
    pub fn new(span: Span, kind: SurfaceErrorKind) -> SurfaceError {
        SurfaceError { span, kind }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SurfaceErrorKind {
    #[error("lexical error: {0}")]
    Lexical(String),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("`{0}` is already defined")]
    Duplicate(String),
    #[error("context mismatch: {0}")]
    Context(String),
    #[error("{0}")]
    Kernel(Diagnostic),
    #[error("cell of dimension {dim} exceeds the limit {max}")]
    MaxDim { dim: usize, max: usize },
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("{0}")]
    Invalid(String),
}
