use super::{Node, XmlDocument, XmlElement};

/// Serializes a document as UTF-8: an XML declaration line, then the tree.
pub fn serialize(doc: &XmlDocument) -> Vec<u8> {
    to_xml_string(doc).into_bytes()
}

pub fn to_xml_string(doc: &XmlDocument) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    write_element(&doc.root, &mut out);
    out.push('\n');
    out
}

/// Markup for a single element, without a declaration.
pub fn serialize_element(element: &XmlElement) -> String {
    let mut out = String::new();
    write_element(element, &mut out);
    out
}

fn write_element(e: &XmlElement, out: &mut String) {
    let name = e.name.lexical();
    out.push('<');
    out.push_str(&name);
    for a in &e.attributes {
        out.push(' ');
        out.push_str(&a.name.lexical());
        out.push_str("=\"");
        escape_attribute(&a.value, out);
        out.push('"');
    }
    if e.children.is_empty() {
        out.push_str("/>");
        return;
    }
    out.push('>');
    for child in &e.children {
        match child {
            Node::Element(c) => write_element(c, out),
            Node::Text(t) => escape_text(t, out),
        }
    }
    out.push_str("</");
    out.push_str(&name);
    out.push('>');
}

pub(crate) fn escape_text(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}

fn escape_attribute(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
}

/// Inserts newline-and-indent text nodes into elements whose content is
/// element-only, two spaces per level. Elements with non-whitespace text are
/// left untouched.
pub fn indent(root: &mut XmlElement) {
    indent_at(root, 0);
}

fn indent_at(e: &mut XmlElement, level: usize) {
    if e.elements().next().is_none() || !e.has_only_whitespace_text() {
        return;
    }
    let inner = format!("\n{}", "  ".repeat(level + 1));
    let outer = format!("\n{}", "  ".repeat(level));
    let children = std::mem::take(&mut e.children);
    for child in children {
        if let Node::Element(mut c) = child {
            indent_at(&mut c, level + 1);
            e.children.push(Node::Text(inner.clone()));
            e.children.push(Node::Element(c));
        }
    }
    e.children.push(Node::Text(outer));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xml::{parse_tree, QName};

    #[test]
    fn escapes_text() {
        let doc = XmlDocument::new(XmlElement::new(QName::local("a")).with_text("a<b & c>"));
        let s = to_xml_string(&doc);
        assert!(s.contains("a&lt;b &amp; c&gt;"));
        assert_eq!(parse_tree(s.as_bytes()).unwrap(), doc);
    }

    #[test]
    fn attribute_whitespace_survives() {
        let doc = XmlDocument::new(XmlElement::new(QName::local("a")).with_attribute(QName::local("v"), "x\ny\t\"z\""));
        assert_eq!(parse_tree(&serialize(&doc)).unwrap(), doc);
    }

    #[test]
    fn indent_element_only_content() {
        let mut root = XmlElement::new(QName::local("a")).with_child(XmlElement::new(QName::local("b")).with_text("t"));
        indent(&mut root);
        assert_eq!(serialize_element(&root), "<a>\n  <b>t</b>\n</a>");
    }
}
