use std::fmt;

use super::ast::{Expr, LocationPath, NameTest, Step};
use super::eval::{DocView, NodeId, NodeKind};
use super::XPathError;

/// A match pattern: a union of location paths using only child and
/// attribute steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Pattern {
    pub branches: Vec<PatternPath>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternPath {
    pub path: LocationPath,
}

/// Rank used to pick between rules matching the same node. Longer chains
/// rank above shorter ones, then name tests above `*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Specificity {
    pub steps: usize,
    pub named_steps: usize,
}

impl Pattern {
    pub fn from_expr(expr: &Expr) -> Result<Pattern, XPathError> {
        let mut branches = Vec::new();
        collect_branches(expr, &mut branches)?;
        Ok(Pattern { branches })
    }

    pub fn matches(&self, view: &DocView<'_>, node: NodeId) -> bool {
        self.best_match(view, node).is_some()
    }

    /// Specificity of the most specific branch matching `node`.
    pub fn best_match(&self, view: &DocView<'_>, node: NodeId) -> Option<Specificity> {
        self.branches
            .iter()
            .filter(|b| b.matches(view, node))
            .map(PatternPath::specificity)
            .max()
    }
}

fn collect_branches(expr: &Expr, out: &mut Vec<PatternPath>) -> Result<(), XPathError> {
    match expr {
        Expr::Union(a, b) => {
            collect_branches(a, out)?;
            collect_branches(b, out)
        }
        Expr::Path(p) => {
            for (i, step) in p.steps.iter().enumerate() {
                match step {
                    Step::Child(_) => {}
                    Step::Attribute(_) if i + 1 == p.steps.len() => {}
                    Step::Attribute(_) => {
                        return Err(XPathError::InvalidPattern(format!(
                            "attribute step must be last in \"{p}\""
                        )))
                    }
                    Step::Parent | Step::SelfNode => {
                        return Err(XPathError::InvalidPattern(format!(
                            "\"{step}\" is not allowed in patterns"
                        )))
                    }
                }
            }
            out.push(PatternPath { path: p.clone() });
            Ok(())
        }
        other => Err(XPathError::InvalidPattern(format!(
            "\"{other}\" is not a location path"
        ))),
    }
}

impl PatternPath {
    pub fn specificity(&self) -> Specificity {
        Specificity {
            steps: self.path.steps.len() + usize::from(self.path.absolute),
            named_steps: self
                .path
                .steps
                .iter()
                .filter(|s| matches!(s, Step::Child(NameTest::Name(_)) | Step::Attribute(NameTest::Name(_))))
                .count(),
        }
    }

    /// Matches right to left: the node against the last step, its parent
    /// against the one before, and so on.
    pub fn matches(&self, view: &DocView<'_>, node: NodeId) -> bool {
        let mut current = node;
        for step in self.path.steps.iter().rev() {
            let ok = match (step, view.kind(current)) {
                (Step::Child(test), NodeKind::Element(e)) => test.matches(&e.name),
                (Step::Attribute(test), NodeKind::Attribute(a)) => test.matches(&a.name),
                _ => false,
            };
            if !ok {
                return false;
            }
            match view.parent(current) {
                Some(p) => current = p,
                None => return false,
            }
        }
        if self.path.absolute {
            current == view.root() && (!self.path.steps.is_empty() || node == view.root())
        } else {
            true
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.branches.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{}", b.path)?;
        }
        Ok(())
    }
}

/// Tests `node` against a path-only expression used as a pattern.
pub fn match_pattern(pattern: &Expr, view: &DocView<'_>, node: NodeId) -> Result<bool, XPathError> {
    Ok(Pattern::from_expr(pattern)?.matches(view, node))
}
