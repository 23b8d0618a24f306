//! The command language: lexer, parser, pretty-printer and evaluator.

pub mod ast;
mod eval;
pub mod lexer;
pub mod parser;
pub mod pretty;

use serde::Serialize;
use thiserror::Error;

use crate::rng::SimRng;
use crate::world::SimState;

pub use ast::Program;
pub use eval::{check, execute, Value};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;
pub use pretty::pretty;

/// Byte range in the source plus the 1-based line/column of its start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Lex,
    Parse,
    Check,
    Runtime,
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[error("{}:{}: {message}", span.line, span.col)]
pub struct ConsoleError {
    pub phase: Phase,
    pub message: String,
    pub span: Span,
}

impl ConsoleError {
    fn new(phase: Phase, message: impl Into<String>, span: Span) -> Self {
        Self {
            phase,
            message: message.into(),
            span,
        }
    }

    pub fn lex(message: impl Into<String>, span: Span) -> Self {
        Self::new(Phase::Lex, message, span)
    }

    pub fn parse(message: impl Into<String>, span: Span) -> Self {
        Self::new(Phase::Parse, message, span)
    }

    pub fn check(message: impl Into<String>, span: Span) -> Self {
        Self::new(Phase::Check, message, span)
    }

    pub fn runtime(message: impl Into<String>, span: Span) -> Self {
        Self::new(Phase::Runtime, message, span)
    }
}

/// Tokenizes, parses and context-checks `src` against the current world.
pub fn compile(state: &SimState, src: &str) -> Result<Program, ConsoleError> {
    let program = parse(&tokenize(src)?)?;
    check(state, &program)?;
    Ok(program)
}

/// Compiles and runs `src` in observer context with the next console
/// substream. Returns the values of bare expressions.
pub fn run(state: &mut SimState, src: &str) -> Result<Vec<Value>, ConsoleError> {
    let program = compile(state, src)?;
    let mut rng: SimRng = state.console_rng();
    execute(state, &program, &mut rng)
}
