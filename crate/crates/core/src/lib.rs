//! Array abstraction by witness variables: rewrites programs that loop over
//! one-dimensional arrays into loop-free, array-free programs whose safety
//! implies the safety of the original.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod ast;
pub mod emit;
pub mod error;
pub mod lexer;
pub mod oracle;
pub mod parser;
pub mod precision;
pub mod printer;
pub mod scale;
pub mod transform;
pub mod validate;

pub use ast::{Expr, Loc, Program, Stmt, StmtKind};
pub use emit::{emit_verifiable, lift_verifiable, EmitConfig, NdStyle};
pub use error::{EmitError, ParseError, TransformError};
pub use parser::parse;
pub use printer::print_program;
