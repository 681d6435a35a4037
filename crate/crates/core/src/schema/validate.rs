use std::collections::HashMap;
use std::fmt;

use super::{collapse_whitespace, ElementDecl, Schema};
use crate::xml::{QName, XmlDocument, XmlElement, XSI_NS};
use crate::xpath::{evaluate, DocView, EvalContext, NodeId, NodeKind, XPathValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    RootMismatch,
    UnexpectedElement,
    MissingElement,
    MaxOccurs,
    UnexpectedText,
    UnexpectedAttribute,
    MissingAttribute,
    Lexical,
    Length,
    MaxExclusive,
    MaxInclusive,
    MinInclusive,
    Enumeration,
    Unique,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::RootMismatch => "root-mismatch",
            ViolationKind::UnexpectedElement => "unexpected-element",
            ViolationKind::MissingElement => "missing-element",
            ViolationKind::MaxOccurs => "max-occurs",
            ViolationKind::UnexpectedText => "unexpected-text",
            ViolationKind::UnexpectedAttribute => "unexpected-attribute",
            ViolationKind::MissingAttribute => "missing-attribute",
            ViolationKind::Lexical => "lexical",
            ViolationKind::Length => "length",
            ViolationKind::MaxExclusive => "maxExclusive",
            ViolationKind::MaxInclusive => "maxInclusive",
            ViolationKind::MinInclusive => "minInclusive",
            ViolationKind::Enumeration => "enumeration",
            ViolationKind::Unique => "unique",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub kind: ViolationKind,
    pub message: String,
    pub line: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.path, self.kind, self.message)
    }
}

/// All violations found in a document, in document order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn of_kind(&self, kind: ViolationKind) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.kind == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Outcome of matching child element names against a content sequence.
pub(crate) struct SequenceMatch {
    /// Particle index assigned to each child, `None` when rejected.
    pub assigned: Vec<Option<usize>>,
    pub problems: Vec<SequenceProblem>,
}

pub(crate) enum SequenceProblem {
    /// Particle `particle` occurs `found` times, below its minimum.
    Missing {
        particle: usize,
        found: u32,
    },
    /// Child `child` would exceed its particle's maxOccurs.
    TooMany {
        child: usize,
        particle: usize,
    },
    Unexpected {
        child: usize,
    },
}

/// Greedy left-to-right assignment. Each child goes to the first particle at
/// or after the current one that accepts its name.
pub(crate) fn match_sequence(content: &[ElementDecl], children: &[&QName]) -> SequenceMatch {
    let mut assigned = Vec::with_capacity(children.len());
    let mut problems = Vec::new();
    let mut current = 0;
    let mut count = 0u32;
    let full = |p: &ElementDecl, n: u32| p.max_occurs.is_some_and(|m| n >= m);

    for (ci, name) in children.iter().enumerate() {
        let start = if current < content.len() && full(&content[current], count) {
            current + 1
        } else {
            current
        };
        let found = (start..content.len()).find(|&k| content[k].name == **name);
        match found {
            Some(k) => {
                if k > current {
                    for (p, decl) in content.iter().enumerate().take(k).skip(current) {
                        let n = if p == current { count } else { 0 };
                        if n < decl.min_occurs {
                            problems.push(SequenceProblem::Missing { particle: p, found: n });
                        }
                    }
                    current = k;
                    count = 0;
                }
                count += 1;
                assigned.push(Some(k));
            }
            None => {
                if current < content.len() && content[current].name == **name {
                    problems.push(SequenceProblem::TooMany {
                        child: ci,
                        particle: current,
                    });
                } else {
                    problems.push(SequenceProblem::Unexpected { child: ci });
                }
                assigned.push(None);
            }
        }
    }
    for (p, decl) in content.iter().enumerate().skip(current) {
        let n = if p == current { count } else { 0 };
        if n < decl.min_occurs {
            problems.push(SequenceProblem::Missing { particle: p, found: n });
        }
    }
    SequenceMatch { assigned, problems }
}

/// Copy of `doc` in which every absent attribute with a declared default
/// carries it.
pub fn apply_defaults(schema: &Schema, doc: &XmlDocument) -> XmlDocument {
    let mut out = doc.clone();
    if let Some(decl) = schema.global(&doc.root.name) {
        default_element(schema, decl, &mut out.root);
    }
    out
}

fn default_element(schema: &Schema, decl: &ElementDecl, e: &mut XmlElement) {
    let Some(ct) = schema.complex(decl.type_id) else {
        return;
    };
    for a in &ct.attributes {
        if let Some(d) = &a.default {
            if e.attribute_ns(&QName::local(a.name.clone())).is_none() {
                e.set_attribute(QName::local(a.name.clone()), d.clone());
            }
        }
    }
    if ct.simple_content_base.is_some() {
        return;
    }
    let names: Vec<QName> = e.elements().map(|c| c.name.clone()).collect();
    let refs: Vec<&QName> = names.iter().collect();
    let m = match_sequence(&ct.content, &refs);
    for (child, slot) in e.elements_mut().zip(m.assigned) {
        if let Some(p) = slot {
            default_element(schema, &ct.content[p], child);
        }
    }
}

/// Validates `doc`, collecting every violation. Attribute defaults are
/// applied first so identity constraints see defaulted values.
pub fn validate(schema: &Schema, doc: &XmlDocument) -> ValidationReport {
    let defaulted = apply_defaults(schema, doc);
    let view = DocView::new(&defaulted);
    let mut v = Validator {
        schema,
        view: &view,
        found: Vec::new(),
    };
    let root = view.document_element();
    let root_name = view.name(root).expect("document element");
    match schema.global(root_name) {
        Some(decl) => v.element(root, decl),
        None => {
            let expected: Vec<String> = schema
                .global_elements()
                .iter()
                .map(|g| format!("{{{}}}{}", g.name.namespace_uri, g.name.local_name))
                .collect();
            v.report(
                root,
                ViolationKind::RootMismatch,
                format!(
                    "root element {{{}}}{} is not declared; expected one of: {}",
                    root_name.namespace_uri,
                    root_name.local_name,
                    expected.join(", ")
                ),
            );
        }
    }
    let mut found = v.found;
    found.sort_by_key(|(id, _)| *id);
    ValidationReport {
        violations: found.into_iter().map(|(_, v)| v).collect(),
    }
}

struct Validator<'s, 'v, 'd> {
    schema: &'s Schema,
    view: &'v DocView<'d>,
    found: Vec<(NodeId, Violation)>,
}

impl Validator<'_, '_, '_> {
    fn report(&mut self, node: NodeId, kind: ViolationKind, message: String) {
        let violation = Violation {
            path: self.view.path(node),
            kind,
            message,
            line: self.view.line(node),
        };
        self.found.push((node, violation));
    }

    fn check_value(&mut self, node: NodeId, type_id: super::TypeId, lexical: &str) {
        if let Err(problems) = self.schema.check_simple(type_id, lexical) {
            for (kind, message) in problems {
                self.report(node, kind, message);
            }
        }
    }

    fn child_elements(&self, node: NodeId) -> Vec<NodeId> {
        self.view
            .children(node)
            .iter()
            .copied()
            .filter(|&c| self.view.is_element(c))
            .collect()
    }

    fn reject_children(&mut self, node: NodeId) {
        for c in self.child_elements(node) {
            let name = self.view.name(c).expect("element").lexical();
            self.report(
                c,
                ViolationKind::UnexpectedElement,
                format!("element \"{name}\" is not allowed in simple content"),
            );
        }
    }

    /// Checks simple content, substituting the element default when empty.
    fn simple_content(&mut self, node: NodeId, decl: &ElementDecl, type_id: super::TypeId) {
        self.reject_children(node);
        let text = self.view.string_value(node);
        let lexical = match &decl.default {
            Some(d) if text.is_empty() => d.clone(),
            _ => text,
        };
        self.check_value(node, type_id, &lexical);
    }

    fn element(&mut self, node: NodeId, decl: &ElementDecl) {
        let schema = self.schema;
        match schema.complex(decl.type_id) {
            None => {
                for a in self.view.attributes(node).to_vec() {
                    if self.is_hint(a) {
                        continue;
                    }
                    let name = self.view.name(a).expect("attribute").lexical();
                    self.report(
                        a,
                        ViolationKind::UnexpectedAttribute,
                        format!("attribute \"{name}\" is not declared"),
                    );
                }
                self.simple_content(node, decl, decl.type_id);
            }
            Some(ct) => {
                for a in self.view.attributes(node).to_vec() {
                    if self.is_hint(a) {
                        continue;
                    }
                    let qname = self.view.name(a).expect("attribute");
                    let declared = qname
                        .namespace_uri
                        .is_empty()
                        .then(|| ct.attributes.iter().find(|d| d.name == qname.local_name))
                        .flatten();
                    match declared {
                        Some(d) => {
                            let value = self.view.string_value(a);
                            self.check_value(a, d.type_id, &value);
                        }
                        None => {
                            let msg = format!("attribute \"{}\" is not declared", qname.lexical());
                            self.report(a, ViolationKind::UnexpectedAttribute, msg);
                        }
                    }
                }
                let e = self.view.element(node).expect("element");
                for d in ct.attributes.iter().filter(|d| d.required) {
                    if e.attribute_ns(&QName::local(d.name.clone())).is_none() {
                        let msg = format!("required attribute \"{}\" is missing", d.name);
                        self.report(node, ViolationKind::MissingAttribute, msg);
                    }
                }

                if let Some(base) = ct.simple_content_base {
                    self.simple_content(node, decl, base);
                } else {
                    self.element_content(node, &ct.content);
                }
            }
        }
        for ic in &decl.identity_constraints {
            self.unique(node, ic);
        }
    }

    fn element_content(&mut self, node: NodeId, content: &[ElementDecl]) {
        for &c in self.view.children(node) {
            if let NodeKind::Text(t) = self.view.kind(c) {
                if !t.chars().all(|ch| matches!(ch, ' ' | '\t' | '\n' | '\r')) {
                    let msg = format!("text \"{}\" is not allowed here", collapse_whitespace(t));
                    self.report(c, ViolationKind::UnexpectedText, msg);
                }
            }
        }
        let children = self.child_elements(node);
        let names: Vec<&QName> = children.iter().map(|&c| self.view.name(c).expect("element")).collect();
        let m = match_sequence(content, &names);
        for problem in &m.problems {
            match *problem {
                SequenceProblem::Missing { particle, found } => {
                    let d = &content[particle];
                    let msg = format!(
                        "element \"{}\" occurs {found} time(s), minOccurs is {}",
                        d.name.local_name, d.min_occurs
                    );
                    self.report(node, ViolationKind::MissingElement, msg);
                }
                SequenceProblem::TooMany { child, particle } => {
                    let d = &content[particle];
                    let max = d.max_occurs.expect("only bounded particles fill up");
                    let msg = format!("element \"{}\" exceeds maxOccurs {max}", d.name.local_name);
                    self.report(children[child], ViolationKind::MaxOccurs, msg);
                }
                SequenceProblem::Unexpected { child } => {
                    let msg = format!("element \"{}\" is not expected here", names[child].lexical());
                    self.report(children[child], ViolationKind::UnexpectedElement, msg);
                }
            }
        }
        for (&c, slot) in children.iter().zip(m.assigned) {
            if let Some(p) = slot {
                self.element(c, &content[p]);
            }
        }
    }

    fn is_hint(&self, attr: NodeId) -> bool {
        self.view.name(attr).is_some_and(|n| n.namespace_uri == XSI_NS)
    }

    fn unique(&mut self, node: NodeId, ic: &super::IdentityConstraint) {
        let view = self.view;
        let selected = match evaluate(&ic.selector, &EvalContext::new(view, node)) {
            Ok(XPathValue::NodeSet(ns)) => ns,
            _ => return,
        };
        let mut seen: HashMap<String, NodeId> = HashMap::new();
        for (i, &s) in selected.iter().enumerate() {
            let ctx = EvalContext::at(view, s, i + 1, selected.len());
            let Ok(XPathValue::NodeSet(fields)) = evaluate(&ic.field, &ctx) else {
                continue;
            };
            // an absent field leaves the node out of the table
            let Some(&field) = fields.first() else {
                continue;
            };
            let key = collapse_whitespace(&view.string_value(field));
            if let Some(&first) = seen.get(&key) {
                let msg = format!(
                    "duplicate value \"{key}\" for unique constraint {} (first at {})",
                    ic.name,
                    view.path(first)
                );
                self.report(field, ViolationKind::Unique, msg);
            } else {
                seen.insert(key, field);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn particle(name: &str, min: u32, max: Option<u32>) -> ElementDecl {
        ElementDecl {
            name: QName::local(name),
            type_id: super::super::TypeId(0),
            min_occurs: min,
            max_occurs: max,
            default: None,
            identity_constraints: Vec::new(),
        }
    }

    fn run(content: &[ElementDecl], names: &[&str]) -> (Vec<Option<usize>>, usize) {
        let q: Vec<QName> = names.iter().map(|n| QName::local(*n)).collect();
        let refs: Vec<&QName> = q.iter().collect();
        let m = match_sequence(content, &refs);
        (m.assigned, m.problems.len())
    }

    #[test]
    fn sequence_matching() {
        let content = [
            particle("a", 1, Some(1)),
            particle("b", 0, None),
            particle("c", 1, Some(2)),
        ];
        assert_eq!(
            run(&content, &["a", "b", "b", "c"]),
            (vec![Some(0), Some(1), Some(1), Some(2)], 0)
        );
        assert_eq!(run(&content, &["a", "c", "c"]).1, 0);
        // missing a, then a third c
        assert_eq!(run(&content, &["c", "c", "c"]), (vec![Some(2), Some(2), None], 2));
        // out of order
        assert_eq!(run(&content, &["a", "c", "b"]), (vec![Some(0), Some(2), None], 1));
        assert_eq!(run(&content, &[]).1, 2);
    }
}
