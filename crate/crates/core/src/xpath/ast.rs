use std::fmt;

use super::Number;
use crate::xml::QName;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Path(LocationPath),
    Union(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Equals(Box<Expr>, Box<Expr>),
    Call(Function, Vec<Expr>),
    Number(Number),
    Literal(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocationPath {
    pub absolute: bool,
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Child(NameTest),
    Attribute(NameTest),
    Parent,
    SelfNode,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NameTest {
    Any,
    Name(QName),
}

impl NameTest {
    pub fn matches(&self, name: &QName) -> bool {
        match self {
            NameTest::Any => true,
            NameTest::Name(n) => n == name,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Function {
    Count,
    LocalName,
    Last,
    Position,
}

impl Function {
    pub fn name(self) -> &'static str {
        match self {
            Function::Count => "count",
            Function::LocalName => "local-name",
            Function::Last => "last",
            Function::Position => "position",
        }
    }

    pub(crate) fn lookup(name: &str) -> Option<Function> {
        Some(match name {
            "count" => Function::Count,
            "local-name" => Function::LocalName,
            "last" => Function::Last,
            "position" => Function::Position,
            _ => return None,
        })
    }

    pub(crate) fn arity(self) -> std::ops::RangeInclusive<usize> {
        match self {
            Function::Count => 1..=1,
            Function::LocalName => 0..=1,
            Function::Last | Function::Position => 0..=0,
        }
    }
}

impl Expr {
    /// True when the expression is a path or a union of paths.
    pub fn is_path_only(&self) -> bool {
        match self {
            Expr::Path(_) => true,
            Expr::Union(a, b) => a.is_path_only() && b.is_path_only(),
            _ => false,
        }
    }

    fn is_binary(&self) -> bool {
        matches!(self, Expr::Union(..) | Expr::Or(..) | Expr::And(..) | Expr::Equals(..))
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    if e.is_binary() {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

// Printed form recompiles to an equal AST under the same prefix bindings.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, op, b) = match self {
            Expr::Path(p) => return write!(f, "{p}"),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{arg}")?;
                }
                return f.write_str(")");
            }
            Expr::Number(n) => return write!(f, "{n}"),
            Expr::Literal(s) => {
                return if s.contains('"') {
                    write!(f, "'{s}'")
                } else {
                    write!(f, "\"{s}\"")
                }
            }
            Expr::Union(a, b) => (a, " | ", b),
            Expr::Or(a, b) => (a, " or ", b),
            Expr::And(a, b) => (a, " and ", b),
            Expr::Equals(a, b) => (a, " = ", b),
        };
        write_operand(f, a)?;
        f.write_str(op)?;
        write_operand(f, b)
    }
}

impl fmt::Display for LocationPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.absolute {
            f.write_str("/")?;
        }
        for (i, step) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{step}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Child(t) => write!(f, "{t}"),
            Step::Attribute(t) => write!(f, "@{t}"),
            Step::Parent => f.write_str(".."),
            Step::SelfNode => f.write_str("."),
        }
    }
}

impl fmt::Display for NameTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NameTest::Any => f.write_str("*"),
            NameTest::Name(q) => write!(f, "{}", q.lexical()),
        }
    }
}
