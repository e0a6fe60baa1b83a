use alloc::string::String;
use core::fmt;

use crate::ast::Loc;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl ParseError {
    pub fn new(line: u32, col: u32, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransformError {
    /// A construct of the output language appeared in an input program.
    Unsupported { loc: Option<Loc>, what: String },
}

impl fmt::Display for TransformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformError::Unsupported { loc: Some(loc), what } => {
                write!(f, "unsupported construct at {loc}: {what}")
            }
            TransformError::Unsupported { loc: None, what } => {
                write!(f, "unsupported construct: {what}")
            }
        }
    }
}

impl core::error::Error for TransformError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrecisionError {
    AssertionNotFound(Loc),
    AssertionNotInLoop(Loc),
}

impl fmt::Display for PrecisionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrecisionError::AssertionNotFound(l) => write!(f, "no assertion at {l}"),
            PrecisionError::AssertionNotInLoop(l) => {
                write!(f, "assertion at {l} is not inside a loop; no precision claim is made")
            }
        }
    }
}

impl core::error::Error for PrecisionError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmitError {
    NotOutputGrammar(String),
}

impl fmt::Display for EmitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmitError::NotOutputGrammar(why) => {
                write!(f, "program is not array-free and loop-free: {why}")
            }
        }
    }
}

impl core::error::Error for EmitError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    /// More statements were executed than `max_steps` allows.
    BudgetExceeded {
        steps: u64,
    },
    NonConstantBound {
        loop_loc: Loc,
    },
    IndexOutOfBounds {
        loc: Loc,
        array: String,
        index: i64,
    },
    Overflow {
        loc: Loc,
    },
    UnknownVariable {
        name: String,
    },
    Unsupported {
        loc: Loc,
        what: String,
    },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::BudgetExceeded { steps } => {
                write!(f, "enumeration budget exceeded after {steps} steps")
            }
            OracleError::NonConstantBound { loop_loc } => {
                write!(f, "loop at {loop_loc} has no constant bound")
            }
            OracleError::IndexOutOfBounds { loc, array, index } => {
                write!(f, "{array}[{index}] out of bounds at {loc}")
            }
            OracleError::Overflow { loc } => write!(f, "integer overflow at {loc}"),
            OracleError::UnknownVariable { name } => write!(f, "undeclared variable `{name}`"),
            OracleError::Unsupported { loc, what } => write!(f, "cannot interpret {what} at {loc}"),
        }
    }
}

impl core::error::Error for OracleError {}
