//! A template-rule transform engine.
//!
//! Supported instructions: `template` (with `match` and `mode`),
//! `apply-templates`, `copy-of`, `text`, `variable`, `choose`/`when`/
//! `otherwise` and `output`. Whitespace-only text in template and variable
//! bodies is dropped unless it sits inside `xsl:text`.

use thiserror::Error;

use crate::xpath::{Expr, Pattern, XPathError};

mod compile;
mod engine;

pub use compile::load_stylesheet;
pub use engine::{transform, transform_traced, AmbiguityWarning, RuleSelection, TransformTrace};

pub const XSL_NS: &str = "http://www.w3.org/1999/XSL/Transform";

#[derive(Clone, Debug, PartialEq, Error)]
pub enum XsltError {
    #[error("line {line}: unsupported instruction \"{name}\"")]
    UnsupportedInstruction { name: String, line: usize },
    #[error("line {line}: {message}")]
    Invalid { message: String, line: usize },
    #[error("line {line}: variable \"${name}\" is not declared")]
    UndeclaredVariable { name: String, line: usize },
    #[error("line {line}: {source}")]
    XPath { source: XPathError, line: usize },
    #[error("evaluation failed: {0}")]
    Evaluation(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputMethod {
    Text,
    Xml,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stylesheet {
    pub templates: Vec<TemplateRule>,
    /// Global variables in declaration order.
    pub variables: Vec<VariableDecl>,
    pub output_method: OutputMethod,
    /// Recorded but has no effect on text output.
    pub output_indent: bool,
}

impl Stylesheet {
    pub fn templates_in_mode<'a>(&'a self, mode: Option<&'a str>) -> impl Iterator<Item = &'a TemplateRule> + 'a {
        self.templates.iter().filter(move |t| t.mode.as_deref() == mode)
    }

    /// Distinct modes used by template rules, `None` being the default mode.
    pub fn modes(&self) -> Vec<Option<&str>> {
        let mut modes: Vec<Option<&str>> = Vec::new();
        for t in &self.templates {
            if !modes.contains(&t.mode.as_deref()) {
                modes.push(t.mode.as_deref());
            }
        }
        modes
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TemplateRule {
    pub pattern: Pattern,
    pub mode: Option<String>,
    pub body: Vec<Instruction>,
    pub line: usize,
}

impl TemplateRule {
    /// Names of variables declared anywhere in the body.
    pub fn local_variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        collect_locals(&self.body, &mut out);
        out
    }
}

fn collect_locals<'a>(body: &'a [Instruction], out: &mut Vec<&'a str>) {
    for i in body {
        match i {
            Instruction::Variable(v) => out.push(&v.name),
            Instruction::Choose { branches, otherwise } => {
                for (_, b) in branches {
                    collect_locals(b, out);
                }
                if let Some(b) = otherwise {
                    collect_locals(b, out);
                }
            }
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariableDecl {
    pub name: String,
    pub value: VariableValue,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum VariableValue {
    Select(Expr),
    /// Body instantiated into a text fragment.
    Content(Vec<Instruction>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum CopySource {
    Expr(Expr),
    Variable(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    /// Non-whitespace text written directly in a body.
    LiteralText(String),
    /// Content of `xsl:text`, kept verbatim.
    Text(String),
    ApplyTemplates {
        select: Option<Expr>,
        mode: Option<String>,
    },
    CopyOf(CopySource),
    Choose {
        branches: Vec<(Expr, Vec<Instruction>)>,
        otherwise: Option<Vec<Instruction>>,
    },
    Variable(VariableDecl),
}
