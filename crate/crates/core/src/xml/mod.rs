//! Namespace-aware XML document model, parsers and serializer.
//!
//! Two parse modes share one tokenizer: [`parse_tree`] builds an owned
//! [`XmlDocument`], [`parse_stream`] hands [`ParseEvent`]s to a callback as
//! they are read. Both report the same [`WellFormednessError`] for the same
//! malformed input.
//!
//! Supported syntax: elements, attributes, character data, the XML
//! declaration, comments (discarded), the five predefined entities and
//! numeric character references. CDATA sections, processing instructions and
//! DOCTYPE declarations are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

mod error;
mod reader;
mod stream;
mod tree;
mod write;

pub use error::{WellFormednessError, WfErrorKind};
pub use reader::EventReader;
pub use stream::{parse_stream, EventHandler, ParseEvent, StreamOutcome};
pub use tree::{parse_tree, TreeBuilder};
pub(crate) use write::escape_text;
pub use write::{indent, serialize, serialize_element, to_xml_string};

/// Namespace bound to the `xml` prefix.
pub const XML_NS: &str = "http://www.w3.org/XML/1998/namespace";
/// Namespace of `xmlns` / `xmlns:*` declaration attributes.
pub const XMLNS_NS: &str = "http://www.w3.org/2000/xmlns/";
/// XML Schema instance namespace (`xsi:schemaLocation` and friends).
pub const XSI_NS: &str = "http://www.w3.org/2001/XMLSchema-instance";

/// In-scope namespace bindings, prefix to URI. The empty prefix is the
/// default namespace.
pub type NamespaceMap = BTreeMap<String, String>;

/// An expanded name. Equality and hashing ignore the prefix.
#[derive(Clone, Debug, Default)]
pub struct QName {
    pub namespace_uri: String,
    pub local_name: String,
    /// The prefix as written in the source, informational only.
    pub prefix: String,
}

impl QName {
    pub fn new(namespace_uri: impl Into<String>, local_name: impl Into<String>) -> Self {
        QName {
            namespace_uri: namespace_uri.into(),
            local_name: local_name.into(),
            prefix: String::new(),
        }
    }

    /// A name in no namespace.
    pub fn local(local_name: impl Into<String>) -> Self {
        QName::new("", local_name)
    }

    pub fn prefixed(
        prefix: impl Into<String>,
        namespace_uri: impl Into<String>,
        local_name: impl Into<String>,
    ) -> Self {
        QName {
            namespace_uri: namespace_uri.into(),
            local_name: local_name.into(),
            prefix: prefix.into(),
        }
    }

    /// `prefix:local`, or just `local` when unprefixed.
    pub fn lexical(&self) -> String {
        if self.prefix.is_empty() {
            self.local_name.clone()
        } else {
            format!("{}:{}", self.prefix, self.local_name)
        }
    }

    pub fn is(&self, namespace_uri: &str, local_name: &str) -> bool {
        self.namespace_uri == namespace_uri && self.local_name == local_name
    }
}

impl PartialEq for QName {
    fn eq(&self, other: &Self) -> bool {
        self.namespace_uri == other.namespace_uri && self.local_name == other.local_name
    }
}

impl Eq for QName {}

impl Hash for QName {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.namespace_uri.hash(state);
        self.local_name.hash(state);
    }
}

impl PartialOrd for QName {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QName {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.namespace_uri, &self.local_name).cmp(&(&other.namespace_uri, &other.local_name))
    }
}

impl fmt::Display for QName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prefix.is_empty() {
            f.write_str(&self.local_name)
        } else {
            write!(f, "{}:{}", self.prefix, self.local_name)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attribute {
    pub name: QName,
    pub value: String,
}

impl Attribute {
    pub fn new(name: QName, value: impl Into<String>) -> Self {
        Attribute {
            name,
            value: value.into(),
        }
    }

    /// True for `xmlns` and `xmlns:p` declarations.
    pub fn is_namespace_decl(&self) -> bool {
        self.name.namespace_uri == XMLNS_NS
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Element(XmlElement),
    Text(String),
}

impl Node {
    pub fn as_element(&self) -> Option<&XmlElement> {
        match self {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Node::Text(t) => Some(t),
            Node::Element(_) => None,
        }
    }
}

/// An element with its attributes (namespace declarations included, in
/// source order) and children.
///
/// `PartialEq` is structural: it ignores `source_line`, prefixes and
/// attribute order.
#[derive(Clone, Debug)]
pub struct XmlElement {
    pub name: QName,
    pub attributes: Vec<Attribute>,
    pub children: Vec<Node>,
    pub source_line: usize,
}

impl XmlElement {
    pub fn new(name: QName) -> Self {
        XmlElement {
            name,
            attributes: Vec::new(),
            children: Vec::new(),
            source_line: 1,
        }
    }

    pub fn with_attribute(mut self, name: QName, value: impl Into<String>) -> Self {
        self.set_attribute(name, value);
        self
    }

    /// Adds an `xmlns:prefix` declaration (or `xmlns` for an empty prefix).
    pub fn with_namespace(mut self, prefix: &str, uri: &str) -> Self {
        let name = if prefix.is_empty() {
            QName::new(XMLNS_NS, "xmlns")
        } else {
            QName::prefixed("xmlns", XMLNS_NS, prefix)
        };
        self.set_attribute(name, uri);
        self
    }

    pub fn with_child(mut self, child: XmlElement) -> Self {
        self.children.push(Node::Element(child));
        self
    }

    pub fn with_text(mut self, text: &str) -> Self {
        self.push_text(text);
        self
    }

    /// Value of the attribute with the given expanded name.
    pub fn attribute_ns(&self, name: &QName) -> Option<&str> {
        self.attributes
            .iter()
            .find(|a| &a.name == name)
            .map(|a| a.value.as_str())
    }

    /// Value of the no-namespace attribute `local`.
    pub fn attribute(&self, local: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|a| a.name.namespace_uri.is_empty() && a.name.local_name == local)
            .map(|a| a.value.as_str())
    }

    /// Replaces an existing attribute of the same expanded name, or appends.
    pub fn set_attribute(&mut self, name: QName, value: impl Into<String>) {
        let value = value.into();
        match self.attributes.iter_mut().find(|a| a.name == name) {
            Some(a) => a.value = value,
            None => self.attributes.push(Attribute { name, value }),
        }
    }

    /// Appends text, merging with a trailing text child.
    pub fn push_text(&mut self, text: &str) {
        if text.is_empty() {
            return;
        }
        if let Some(Node::Text(last)) = self.children.last_mut() {
            last.push_str(text);
        } else {
            self.children.push(Node::Text(text.to_string()));
        }
    }

    pub fn push_element(&mut self, child: XmlElement) {
        self.children.push(Node::Element(child));
    }

    pub fn elements(&self) -> impl Iterator<Item = &XmlElement> {
        self.children.iter().filter_map(Node::as_element)
    }

    pub fn elements_mut(&mut self) -> impl Iterator<Item = &mut XmlElement> {
        self.children.iter_mut().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
    }

    /// First child element in no namespace called `local`.
    pub fn child(&self, local: &str) -> Option<&XmlElement> {
        self.elements()
            .find(|e| e.name.namespace_uri.is_empty() && e.name.local_name == local)
    }

    /// Concatenation of all descendant text.
    pub fn string_value(&self) -> String {
        let mut out = String::new();
        self.collect_text(&mut out);
        out
    }

    fn collect_text(&self, out: &mut String) {
        for child in &self.children {
            match child {
                Node::Text(t) => out.push_str(t),
                Node::Element(e) => e.collect_text(out),
            }
        }
    }

    /// True when every text child is whitespace only.
    pub fn has_only_whitespace_text(&self) -> bool {
        self.children
            .iter()
            .filter_map(Node::as_text)
            .all(|t| t.chars().all(is_xml_whitespace))
    }

    /// Attributes that are not namespace declarations.
    pub fn plain_attributes(&self) -> impl Iterator<Item = &Attribute> {
        self.attributes.iter().filter(|a| !a.is_namespace_decl())
    }

    /// `(prefix, uri)` pairs declared on this element.
    pub fn namespace_declarations(&self) -> impl Iterator<Item = (&str, &str)> {
        self.attributes.iter().filter(|a| a.is_namespace_decl()).map(|a| {
            if a.name.prefix.is_empty() {
                ("", a.value.as_str())
            } else {
                (a.name.local_name.as_str(), a.value.as_str())
            }
        })
    }
}

impl PartialEq for XmlElement {
    fn eq(&self, other: &Self) -> bool {
        if self.name != other.name || self.attributes.len() != other.attributes.len() {
            return false;
        }
        let mut mine: Vec<_> = self.attributes.iter().collect();
        let mut theirs: Vec<_> = other.attributes.iter().collect();
        mine.sort_by(|a, b| a.name.cmp(&b.name));
        theirs.sort_by(|a, b| a.name.cmp(&b.name));
        mine == theirs && self.children == other.children
    }
}

/// A parsed document. Equality compares the element trees.
#[derive(Clone, Debug)]
pub struct XmlDocument {
    pub root: XmlElement,
    pub declared_encoding: String,
}

impl XmlDocument {
    pub fn new(root: XmlElement) -> Self {
        XmlDocument {
            root,
            declared_encoding: "UTF-8".to_string(),
        }
    }

    pub fn string_value(&self) -> String {
        self.root.string_value()
    }
}

impl PartialEq for XmlDocument {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

/// Returns `scope` extended with the declarations made on `element`.
pub fn extend_scope(scope: &NamespaceMap, element: &XmlElement) -> NamespaceMap {
    let mut out = scope.clone();
    for (prefix, uri) in element.namespace_declarations() {
        out.insert(prefix.to_string(), uri.to_string());
    }
    out
}

/// Resolves a lexical `prefix:local` (or `local`) against `scope`.
/// Unprefixed names take the default namespace only when `use_default` is set.
pub fn resolve_qname(lexical: &str, scope: &NamespaceMap, use_default: bool) -> Option<QName> {
    match lexical.split_once(':') {
        Some((prefix, local)) => {
            if prefix.is_empty() || local.is_empty() || local.contains(':') {
                return None;
            }
            let uri = if prefix == "xml" {
                XML_NS.to_string()
            } else {
                scope.get(prefix)?.clone()
            };
            Some(QName::prefixed(prefix, uri, local))
        }
        None => {
            if lexical.is_empty() {
                return None;
            }
            let uri = if use_default {
                scope.get("").cloned().unwrap_or_default()
            } else {
                String::new()
            };
            Some(QName::new(uri, lexical))
        }
    }
}

pub(crate) fn is_xml_whitespace(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\r')
}

pub(crate) fn is_name_start_char(c: char) -> bool {
    matches!(c,
        ':' | 'A'..='Z' | '_' | 'a'..='z'
        | '\u{C0}'..='\u{D6}'
        | '\u{D8}'..='\u{F6}'
        | '\u{F8}'..='\u{2FF}'
        | '\u{370}'..='\u{37D}'
        | '\u{37F}'..='\u{1FFF}'
        | '\u{200C}'..='\u{200D}'
        | '\u{2070}'..='\u{218F}'
        | '\u{2C00}'..='\u{2FEF}'
        | '\u{3001}'..='\u{D7FF}'
        | '\u{F900}'..='\u{FDCF}'
        | '\u{FDF0}'..='\u{FFFD}'
        | '\u{10000}'..='\u{EFFFF}')
}

pub(crate) fn is_name_char(c: char) -> bool {
    is_name_start_char(c)
        || matches!(c,
            '-' | '.' | '0'..='9' | '\u{B7}'
            | '\u{300}'..='\u{36F}'
            | '\u{203F}'..='\u{2040}')
}

/// True when `s` is a non-empty XML name without a colon.
pub fn is_ncname(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c != ':' && is_name_start_char(c) => chars.all(|c| c != ':' && is_name_char(c)),
        _ => false,
    }
}

pub(crate) fn is_xml_char(c: char) -> bool {
    matches!(c,
        '\u{9}' | '\u{A}' | '\u{D}'
        | '\u{20}'..='\u{D7FF}'
        | '\u{E000}'..='\u{FFFD}'
        | '\u{10000}'..='\u{10FFFF}')
}
