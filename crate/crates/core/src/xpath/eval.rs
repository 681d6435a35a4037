use super::ast::{Expr, Function, LocationPath, Step};
use super::{Number, XPathError};
use crate::xml::{Attribute, Node, QName, XmlDocument, XmlElement};

/// Index of a node inside a [`DocView`]. Ids follow document order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug)]
pub enum NodeKind<'d> {
    Document,
    Element(&'d XmlElement),
    Attribute(&'d Attribute),
    Text(&'d str),
}

#[derive(Debug)]
struct NodeData<'d> {
    kind: NodeKind<'d>,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    attributes: Vec<NodeId>,
}

/// A navigable, document-ordered index over a borrowed [`XmlDocument`].
///
/// Namespace declarations are not exposed as attribute nodes.
#[derive(Debug)]
pub struct DocView<'d> {
    nodes: Vec<NodeData<'d>>,
}

impl<'d> DocView<'d> {
    pub fn new(doc: &'d XmlDocument) -> Self {
        let mut view = DocView {
            nodes: vec![NodeData {
                kind: NodeKind::Document,
                parent: None,
                children: Vec::new(),
                attributes: Vec::new(),
            }],
        };
        let root = view.add_element(&doc.root, NodeId(0));
        view.nodes[0].children.push(root);
        view
    }

    fn add_element(&mut self, e: &'d XmlElement, parent: NodeId) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(NodeData {
            kind: NodeKind::Element(e),
            parent: Some(parent),
            children: Vec::new(),
            attributes: Vec::new(),
        });
        for a in e.plain_attributes() {
            let aid = NodeId(self.nodes.len());
            self.nodes.push(NodeData {
                kind: NodeKind::Attribute(a),
                parent: Some(id),
                children: Vec::new(),
                attributes: Vec::new(),
            });
            self.nodes[id.0].attributes.push(aid);
        }
        for child in &e.children {
            let cid = match child {
                Node::Element(c) => self.add_element(c, id),
                Node::Text(t) => {
                    let tid = NodeId(self.nodes.len());
                    self.nodes.push(NodeData {
                        kind: NodeKind::Text(t),
                        parent: Some(id),
                        children: Vec::new(),
                        attributes: Vec::new(),
                    });
                    tid
                }
            };
            self.nodes[id.0].children.push(cid);
        }
        id
    }

    /// The document node.
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn document_element(&self) -> NodeId {
        self.nodes[0].children[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Every node in document order.
    pub fn all_nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn kind(&self, id: NodeId) -> NodeKind<'d> {
        self.nodes[id.0].kind
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.0].parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.0].children
    }

    pub fn attributes(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.0].attributes
    }

    pub fn element(&self, id: NodeId) -> Option<&'d XmlElement> {
        match self.kind(id) {
            NodeKind::Element(e) => Some(e),
            _ => None,
        }
    }

    pub fn is_element(&self, id: NodeId) -> bool {
        matches!(self.kind(id), NodeKind::Element(_))
    }

    pub fn name(&self, id: NodeId) -> Option<&'d QName> {
        match self.kind(id) {
            NodeKind::Element(e) => Some(&e.name),
            NodeKind::Attribute(a) => Some(&a.name),
            _ => None,
        }
    }

    pub fn local_name(&self, id: NodeId) -> &'d str {
        self.name(id).map(|q| q.local_name.as_str()).unwrap_or("")
    }

    /// XPath string-value.
    pub fn string_value(&self, id: NodeId) -> String {
        match self.kind(id) {
            NodeKind::Document => self.string_value(self.document_element()),
            NodeKind::Element(e) => e.string_value(),
            NodeKind::Attribute(a) => a.value.clone(),
            NodeKind::Text(t) => t.to_string(),
        }
    }

    /// Source line of the node (its owning element's line for attributes
    /// and text).
    pub fn line(&self, id: NodeId) -> usize {
        match self.kind(id) {
            NodeKind::Document => 1,
            NodeKind::Element(e) => e.source_line,
            _ => self.parent(id).map(|p| self.line(p)).unwrap_or(1),
        }
    }

    /// `/a[1]/b[2]/@c` style path, with 1-based positions among same-named
    /// siblings.
    pub fn path(&self, id: NodeId) -> String {
        match self.kind(id) {
            NodeKind::Document => "/".to_string(),
            NodeKind::Element(e) => {
                let parent = self.parent(id).expect("elements have parents");
                let pos = 1 + self
                    .children(parent)
                    .iter()
                    .take_while(|&&c| c != id)
                    .filter(|&&c| self.element(c).is_some_and(|s| s.name == e.name))
                    .count();
                let prefix = if parent == self.root() {
                    String::new()
                } else {
                    self.path(parent)
                };
                format!("{prefix}/{}[{pos}]", e.name.lexical())
            }
            NodeKind::Attribute(a) => {
                format!("{}/@{}", self.path(self.parent(id).expect("owner")), a.name.lexical())
            }
            NodeKind::Text(_) => {
                let parent = self.parent(id).expect("text has a parent");
                let pos = 1 + self
                    .children(parent)
                    .iter()
                    .take_while(|&&c| c != id)
                    .filter(|&&c| matches!(self.kind(c), NodeKind::Text(_)))
                    .count();
                format!("{}/text()[{pos}]", self.path(parent))
            }
        }
    }

    /// Finds the node for an element reference borrowed from the same document.
    pub fn find_element(&self, element: &XmlElement) -> Option<NodeId> {
        self.all_nodes()
            .find(|&id| matches!(self.kind(id), NodeKind::Element(e) if std::ptr::eq(e, element)))
    }

    /// Ancestors from the parent upwards, ending with the document node.
    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.parent(id), move |&p| self.parent(p))
    }
}

/// Evaluation context: the node, its position within the current node list
/// and that list's size.
#[derive(Clone, Copy, Debug)]
pub struct EvalContext<'v, 'd> {
    pub view: &'v DocView<'d>,
    pub node: NodeId,
    pub position: usize,
    pub size: usize,
}

impl<'v, 'd> EvalContext<'v, 'd> {
    pub fn new(view: &'v DocView<'d>, node: NodeId) -> Self {
        EvalContext {
            view,
            node,
            position: 1,
            size: 1,
        }
    }

    pub fn at(view: &'v DocView<'d>, node: NodeId, position: usize, size: usize) -> Self {
        debug_assert!(position >= 1 && position <= size);
        EvalContext {
            view,
            node,
            position,
            size,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum XPathValue {
    /// Sorted in document order, without duplicates.
    NodeSet(Vec<NodeId>),
    Number(Number),
    Boolean(bool),
    String(String),
}

impl XPathValue {
    pub fn to_boolean(&self) -> bool {
        match self {
            XPathValue::NodeSet(ns) => !ns.is_empty(),
            XPathValue::Number(n) => n.is_truthy(),
            XPathValue::Boolean(b) => *b,
            XPathValue::String(s) => !s.is_empty(),
        }
    }

    pub fn to_string_value(&self, view: &DocView<'_>) -> String {
        match self {
            XPathValue::NodeSet(ns) => ns.first().map(|&n| view.string_value(n)).unwrap_or_default(),
            XPathValue::Number(n) => n.to_string(),
            XPathValue::Boolean(b) => b.to_string(),
            XPathValue::String(s) => s.clone(),
        }
    }

    pub fn to_number(&self, view: &DocView<'_>) -> Number {
        match self {
            XPathValue::Number(n) => *n,
            XPathValue::Boolean(b) => Number::Int(*b as i128),
            other => Number::parse(&other.to_string_value(view)),
        }
    }

    pub fn into_nodes(self) -> Option<Vec<NodeId>> {
        match self {
            XPathValue::NodeSet(ns) => Some(ns),
            _ => None,
        }
    }
}

pub fn evaluate(expr: &Expr, ctx: &EvalContext<'_, '_>) -> Result<XPathValue, XPathError> {
    match expr {
        Expr::Path(p) => Ok(XPathValue::NodeSet(select(p, ctx))),
        Expr::Union(a, b) => {
            let mut left = node_set(evaluate(a, ctx)?, "|")?;
            left.extend(node_set(evaluate(b, ctx)?, "|")?);
            left.sort();
            left.dedup();
            Ok(XPathValue::NodeSet(left))
        }
        Expr::Or(a, b) => Ok(XPathValue::Boolean(
            evaluate(a, ctx)?.to_boolean() || evaluate(b, ctx)?.to_boolean(),
        )),
        Expr::And(a, b) => Ok(XPathValue::Boolean(
            evaluate(a, ctx)?.to_boolean() && evaluate(b, ctx)?.to_boolean(),
        )),
        Expr::Equals(a, b) => {
            let (l, r) = (evaluate(a, ctx)?, evaluate(b, ctx)?);
            Ok(XPathValue::Boolean(equals(&l, &r, ctx.view)))
        }
        Expr::Call(func, args) => call(*func, args, ctx),
        Expr::Number(n) => Ok(XPathValue::Number(*n)),
        Expr::Literal(s) => Ok(XPathValue::String(s.clone())),
    }
}

fn node_set(v: XPathValue, op: &str) -> Result<Vec<NodeId>, XPathError> {
    v.into_nodes()
        .ok_or_else(|| XPathError::Type(format!("operand of {op} must be a node-set")))
}

fn call(func: Function, args: &[Expr], ctx: &EvalContext<'_, '_>) -> Result<XPathValue, XPathError> {
    Ok(match func {
        Function::Count => {
            let nodes = node_set(evaluate(&args[0], ctx)?, "count()")?;
            XPathValue::Number(Number::Int(nodes.len() as i128))
        }
        Function::LocalName => {
            let node = match args.first() {
                None => Some(ctx.node),
                Some(arg) => node_set(evaluate(arg, ctx)?, "local-name()")?.first().copied(),
            };
            XPathValue::String(node.map(|n| ctx.view.local_name(n).to_string()).unwrap_or_default())
        }
        Function::Last => XPathValue::Number(Number::Int(ctx.size as i128)),
        Function::Position => XPathValue::Number(Number::Int(ctx.position as i128)),
    })
}

fn equals(l: &XPathValue, r: &XPathValue, view: &DocView<'_>) -> bool {
    use XPathValue::*;
    match (l, r) {
        (NodeSet(a), NodeSet(b)) => {
            let theirs: Vec<std::string::String> = b.iter().map(|&n| view.string_value(n)).collect();
            a.iter().any(|&n| theirs.contains(&view.string_value(n)))
        }
        (NodeSet(ns), other) | (other, NodeSet(ns)) => match other {
            Boolean(b) => !ns.is_empty() == *b,
            Number(x) => ns.iter().any(|&n| super::Number::parse(&view.string_value(n)) == *x),
            String(s) => ns.iter().any(|&n| view.string_value(n) == *s),
            NodeSet(_) => unreachable!(),
        },
        (Boolean(_), _) | (_, Boolean(_)) => l.to_boolean() == r.to_boolean(),
        (Number(_), _) | (_, Number(_)) => l.to_number(view) == r.to_number(view),
        (String(a), String(b)) => a == b,
    }
}

fn select(path: &LocationPath, ctx: &EvalContext<'_, '_>) -> Vec<NodeId> {
    let view = ctx.view;
    let mut current = vec![if path.absolute { view.root() } else { ctx.node }];
    for step in &path.steps {
        let mut next = Vec::new();
        for &n in &current {
            match step {
                Step::Child(test) => next.extend(
                    view.children(n)
                        .iter()
                        .copied()
                        .filter(|&c| view.element(c).is_some_and(|e| test.matches(&e.name))),
                ),
                Step::Attribute(test) => next.extend(
                    view.attributes(n)
                        .iter()
                        .copied()
                        .filter(|&a| view.name(a).is_some_and(|q| test.matches(q))),
                ),
                Step::Parent => next.extend(view.parent(n)),
                Step::SelfNode => next.push(n),
            }
        }
        next.sort();
        next.dedup();
        current = next;
    }
    current
}
