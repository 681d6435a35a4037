//! A small XPath dialect.
//!
//! Supported: location paths over the child, attribute, parent (`..`) and
//! self (`.`) axes with name, prefixed-name and `*` tests; `|` unions;
//! `=`, `and`, `or`; string and number literals; parentheses; and the
//! functions `count`, `local-name`, `last` and `position`. Anything else is
//! a syntax error. Prefixes are resolved when an expression is compiled.

use std::fmt;

use thiserror::Error;

mod ast;
mod eval;
mod lexer;
mod parser;
mod pattern;

pub use ast::{Expr, Function, LocationPath, NameTest, Step};
pub use eval::{evaluate, DocView, EvalContext, NodeId, NodeKind, XPathValue};
pub use parser::compile_expr;
pub use pattern::{match_pattern, Pattern, PatternPath, Specificity};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum XPathError {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unbound namespace prefix \"{0}\"")]
    UnboundPrefix(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("not a valid pattern: {0}")]
    InvalidPattern(String),
}

/// An XPath number. Integers compare exactly; anything else falls back to
/// IEEE doubles.
#[derive(Clone, Copy, Debug)]
pub enum Number {
    Int(i128),
    Float(f64),
}

impl Number {
    pub fn as_f64(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Float(f) => f,
        }
    }

    /// XPath `number()` applied to a string.
    pub fn parse(s: &str) -> Number {
        let t = s.trim_matches(|c: char| matches!(c, ' ' | '\t' | '\n' | '\r'));
        let digits = t.strip_prefix('-').unwrap_or(t);
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            if let Ok(i) = t.parse::<i128>() {
                return Number::Int(i);
            }
        }
        let valid = {
            let (int, frac) = match digits.split_once('.') {
                Some((i, f)) => (i, Some(f)),
                None => (digits, None),
            };
            let int_ok = int.bytes().all(|b| b.is_ascii_digit());
            let frac_ok = frac.is_none_or(|f| f.bytes().all(|b| b.is_ascii_digit()));
            int_ok && frac_ok && !(int.is_empty() && frac.is_none_or(str::is_empty))
        };
        if valid {
            Number::Float(t.parse::<f64>().unwrap_or(f64::NAN))
        } else {
            Number::Float(f64::NAN)
        }
    }

    pub fn is_truthy(self) -> bool {
        match self {
            Number::Int(i) => i != 0,
            Number::Float(f) => f != 0.0 && !f.is_nan(),
        }
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => a == b,
            _ => self.as_f64() == other.as_f64(),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Number::Int(i) => write!(f, "{i}"),
            Number::Float(x) if x.is_nan() => f.write_str("NaN"),
            Number::Float(x) if x.is_infinite() => f.write_str(if x > 0.0 { "Infinity" } else { "-Infinity" }),
            Number::Float(x) if x.fract() == 0.0 && x.abs() < 1e18 => write!(f, "{}", x as i64),
            Number::Float(x) => write!(f, "{x}"),
        }
    }
}
