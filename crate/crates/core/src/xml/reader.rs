use super::error::{WellFormednessError, WfErrorKind};
use super::stream::ParseEvent;
use super::{
    is_name_char, is_name_start_char, is_xml_char, is_xml_whitespace, Attribute, NamespaceMap, QName, XMLNS_NS, XML_NS,
};

type Result<T> = std::result::Result<T, WellFormednessError>;

struct OpenElement {
    raw_name: String,
    name: QName,
    line: usize,
}

/// Pull parser over an in-memory document.
///
/// Holds only the stack of open elements and their namespace scopes, so the
/// state it keeps is proportional to nesting depth.
pub struct EventReader {
    src: String,
    pos: usize,
    line: usize,
    open: Vec<OpenElement>,
    scopes: Vec<NamespaceMap>,
    pending_end: Option<ParseEvent>,
    seen_root: bool,
    finished: bool,
    failed: bool,
    declared_encoding: String,
}

impl EventReader {
    pub fn new(input: &[u8]) -> Result<Self> {
        let input = input.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(input);
        let text = match std::str::from_utf8(input) {
            Ok(s) => s,
            Err(e) => {
                let line = 1 + input[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count();
                return Err(WellFormednessError::new(
                    WfErrorKind::Encoding,
                    line,
                    "input is not valid UTF-8",
                ));
            }
        };
        let src = if text.contains('\r') {
            text.replace("\r\n", "\n").replace('\r', "\n")
        } else {
            text.to_string()
        };
        let mut reader = EventReader {
            src,
            pos: 0,
            line: 1,
            open: Vec::new(),
            scopes: vec![NamespaceMap::new()],
            pending_end: None,
            seen_root: false,
            finished: false,
            failed: false,
            declared_encoding: "UTF-8".to_string(),
        };
        reader.xml_declaration()?;
        Ok(reader)
    }

    /// Encoding named in the XML declaration, `UTF-8` when absent.
    pub fn declared_encoding(&self) -> &str {
        &self.declared_encoding
    }

    /// Current nesting depth.
    pub fn depth(&self) -> usize {
        self.open.len()
    }

    pub fn next_event(&mut self) -> Result<Option<ParseEvent>> {
        if self.failed {
            return Ok(None);
        }
        let r = self.advance();
        if r.is_err() {
            self.failed = true;
        }
        r
    }

    fn advance(&mut self) -> Result<Option<ParseEvent>> {
        if let Some(ev) = self.pending_end.take() {
            return Ok(Some(ev));
        }
        if self.finished {
            return Ok(None);
        }
        if self.open.is_empty() {
            self.misc()?;
            if self.at_end() {
                if !self.seen_root {
                    return Err(self.err(WfErrorKind::Malformed, "no root element"));
                }
                self.finished = true;
                return Ok(None);
            }
            if self.seen_root {
                return Err(self.err(WfErrorKind::Malformed, "content after the root element"));
            }
            // misc() stops only at '<' followed by a name start
            return self.start_tag().map(Some);
        }
        self.content()
    }

    // ---- low level cursor -------------------------------------------------

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn starts_with(&self, s: &str) -> bool {
        self.rest().starts_with(s)
    }

    fn bump(&mut self, nbytes: usize) {
        let consumed = &self.src[self.pos..self.pos + nbytes];
        self.line += consumed.bytes().filter(|&b| b == b'\n').count();
        self.pos += nbytes;
    }

    fn skip_ws(&mut self) -> bool {
        let n = self
            .rest()
            .char_indices()
            .find(|&(_, c)| !is_xml_whitespace(c))
            .map(|(i, _)| i)
            .unwrap_or(self.rest().len());
        self.bump(n);
        n > 0
    }

    fn expect(&mut self, s: &str, what: &str) -> Result<()> {
        if self.starts_with(s) {
            self.bump(s.len());
            Ok(())
        } else {
            Err(self.err(WfErrorKind::Malformed, format!("expected {what}")))
        }
    }

    fn err(&self, kind: WfErrorKind, msg: impl Into<String>) -> WellFormednessError {
        WellFormednessError::new(kind, self.line, msg)
    }

    fn name(&mut self) -> Result<String> {
        let mut chars = self.rest().char_indices();
        match chars.next() {
            Some((_, c)) if is_name_start_char(c) => {}
            _ => return Err(self.err(WfErrorKind::Malformed, "expected a name")),
        }
        let end = chars
            .find(|&(_, c)| !is_name_char(c))
            .map(|(i, _)| i)
            .unwrap_or(self.rest().len());
        let name = self.rest()[..end].to_string();
        self.bump(end);
        Ok(name)
    }

    // ---- prolog / misc ----------------------------------------------------

    fn xml_declaration(&mut self) -> Result<()> {
        let rest = self.rest();
        let is_decl = rest.starts_with("<?xml")
            && rest[5..]
                .chars()
                .next()
                .is_some_and(|c| is_xml_whitespace(c) || c == '?');
        if !is_decl {
            return Ok(());
        }
        self.bump(5);
        let mut seen_version = false;
        loop {
            let had_ws = self.skip_ws();
            if self.starts_with("?>") {
                self.bump(2);
                break;
            }
            if !had_ws {
                return Err(self.err(WfErrorKind::Malformed, "malformed XML declaration"));
            }
            let key = self.name()?;
            self.skip_ws();
            self.expect("=", "'=' in XML declaration")?;
            self.skip_ws();
            let value = self.quoted_raw()?;
            match key.as_str() {
                "version" if !seen_version => {
                    if !value.starts_with("1.") {
                        return Err(self.err(WfErrorKind::Malformed, format!("unsupported XML version \"{value}\"")));
                    }
                    seen_version = true;
                }
                "encoding" if seen_version => {
                    if !value.eq_ignore_ascii_case("UTF-8") && !value.eq_ignore_ascii_case("UTF8") {
                        return Err(self.err(
                            WfErrorKind::Encoding,
                            format!("unsupported encoding \"{value}\", only UTF-8 is accepted"),
                        ));
                    }
                    self.declared_encoding = value;
                }
                "standalone" if seen_version => {
                    if value != "yes" && value != "no" {
                        return Err(self.err(WfErrorKind::Malformed, "bad standalone value"));
                    }
                }
                _ => {
                    return Err(self.err(
                        WfErrorKind::Malformed,
                        format!("unexpected \"{key}\" in XML declaration"),
                    ))
                }
            }
        }
        if !seen_version {
            return Err(self.err(WfErrorKind::Malformed, "XML declaration without version"));
        }
        Ok(())
    }

    fn quoted_raw(&mut self) -> Result<String> {
        let quote = match self.peek() {
            Some(q @ ('"' | '\'')) => q,
            _ => return Err(self.err(WfErrorKind::Malformed, "expected a quoted value")),
        };
        self.bump(1);
        match self.rest().find(quote) {
            Some(end) => {
                let v = self.rest()[..end].to_string();
                self.bump(end + 1);
                Ok(v)
            }
            None => Err(self.err(WfErrorKind::Malformed, "unterminated quoted value")),
        }
    }

    /// Skips whitespace and comments outside the root element. Stops at EOF
    /// or at the start of an element.
    fn misc(&mut self) -> Result<()> {
        loop {
            self.skip_ws();
            if self.at_end() {
                return Ok(());
            }
            if self.starts_with("<!--") {
                self.comment()?;
            } else if self.starts_with("<!DOCTYPE") {
                return Err(self.err(WfErrorKind::Unsupported, "DOCTYPE declarations are not supported"));
            } else if self.starts_with("<?") {
                return Err(self.pi_error());
            } else if self.starts_with("<") && self.rest()[1..].chars().next().is_some_and(is_name_start_char) {
                return Ok(());
            } else if self.seen_root {
                return Err(self.err(WfErrorKind::Malformed, "content after the root element"));
            } else {
                return Err(self.err(WfErrorKind::Malformed, "content before the root element"));
            }
        }
    }

    fn pi_error(&self) -> WellFormednessError {
        if self.starts_with("<?xml") {
            self.err(
                WfErrorKind::Malformed,
                "XML declaration is only allowed at the start of the document",
            )
        } else {
            self.err(WfErrorKind::Unsupported, "processing instructions are not supported")
        }
    }

    fn comment(&mut self) -> Result<()> {
        let start_line = self.line;
        self.bump(4);
        match self.rest().find("--") {
            Some(i) => {
                let body_ok = self.rest()[..i].chars().all(is_xml_char);
                self.bump(i);
                if !body_ok {
                    return Err(self.err(WfErrorKind::Malformed, "invalid character in comment"));
                }
                if !self.starts_with("-->") {
                    return Err(self.err(WfErrorKind::Malformed, "\"--\" is not allowed inside a comment"));
                }
                self.bump(3);
                Ok(())
            }
            None => Err(WellFormednessError::new(
                WfErrorKind::Malformed,
                start_line,
                "unterminated comment",
            )),
        }
    }

    // ---- content ----------------------------------------------------------

    fn content(&mut self) -> Result<Option<ParseEvent>> {
        let mut text = String::new();
        let mut text_line = self.line;
        loop {
            if self.at_end() {
                if !text.is_empty() {
                    return Ok(Some(ParseEvent::Text { text, line: text_line }));
                }
                let top = self.open.last().expect("content() requires an open element");
                return Err(self.err(
                    WfErrorKind::UnclosedElement,
                    format!(
                        "element \"{}\" opened at line {} is never closed",
                        top.raw_name, top.line
                    ),
                ));
            }
            if self.starts_with("<!--") {
                self.comment()?;
                continue;
            }
            if self.starts_with("<") {
                if !text.is_empty() {
                    return Ok(Some(ParseEvent::Text { text, line: text_line }));
                }
                if self.starts_with("</") {
                    return self.end_tag().map(Some);
                }
                if self.starts_with("<![CDATA[") {
                    return Err(self.err(WfErrorKind::Unsupported, "CDATA sections are not supported"));
                }
                if self.starts_with("<!") {
                    return Err(self.err(WfErrorKind::Malformed, "malformed markup declaration"));
                }
                if self.starts_with("<?") {
                    return Err(self.pi_error());
                }
                return self.start_tag().map(Some);
            }
            if text.is_empty() {
                text_line = self.line;
            }
            self.char_data(&mut text)?;
        }
    }

    fn char_data(&mut self, out: &mut String) -> Result<()> {
        while let Some(c) = self.peek() {
            match c {
                '<' => break,
                '&' => {
                    let r = self.reference()?;
                    out.push(r);
                }
                ']' if self.starts_with("]]>") => {
                    return Err(self.err(WfErrorKind::Malformed, "\"]]>\" is not allowed in text"));
                }
                c if !is_xml_char(c) => {
                    return Err(self.err(WfErrorKind::Malformed, format!("invalid character U+{:04X}", c as u32)));
                }
                c => {
                    self.bump(c.len_utf8());
                    out.push(c);
                }
            }
        }
        Ok(())
    }

    fn reference(&mut self) -> Result<char> {
        let end = match self.rest().find(';') {
            Some(end) if end <= 12 => end,
            _ => return Err(self.err(WfErrorKind::Malformed, "unterminated entity reference")),
        };
        let body = self.rest()[1..end].to_string();
        let c = match body.as_str() {
            "lt" => Some('<'),
            "gt" => Some('>'),
            "amp" => Some('&'),
            "apos" => Some('\''),
            "quot" => Some('"'),
            b if b.starts_with("#x") => u32::from_str_radix(&b[2..], 16).ok().and_then(char::from_u32),
            b if b.starts_with('#') => b[1..].parse::<u32>().ok().and_then(char::from_u32),
            _ => return Err(self.err(WfErrorKind::Malformed, format!("undefined entity \"&{body};\""))),
        };
        match c {
            Some(c) if is_xml_char(c) => {
                self.bump(end + 1);
                Ok(c)
            }
            _ => Err(self.err(
                WfErrorKind::Malformed,
                format!("invalid character reference \"&{body};\""),
            )),
        }
    }

    fn attribute_value(&mut self) -> Result<String> {
        let quote = match self.peek() {
            Some(q @ ('"' | '\'')) => q,
            _ => return Err(self.err(WfErrorKind::Malformed, "attribute value must be quoted")),
        };
        self.bump(1);
        let mut value = String::new();
        loop {
            match self.peek() {
                None => return Err(self.err(WfErrorKind::Malformed, "unterminated attribute value")),
                Some(c) if c == quote => {
                    self.bump(1);
                    return Ok(value);
                }
                Some('<') => return Err(self.err(WfErrorKind::Malformed, "'<' is not allowed in attribute values")),
                Some('&') => {
                    let r = self.reference()?;
                    value.push(r);
                }
                Some(c) if is_xml_whitespace(c) => {
                    self.bump(1);
                    value.push(' ');
                }
                Some(c) if !is_xml_char(c) => {
                    return Err(self.err(WfErrorKind::Malformed, format!("invalid character U+{:04X}", c as u32)))
                }
                Some(c) => {
                    self.bump(c.len_utf8());
                    value.push(c);
                }
            }
        }
    }

    fn start_tag(&mut self) -> Result<ParseEvent> {
        let line = self.line;
        self.bump(1);
        let raw_name = self.name()?;
        let mut raw_attrs: Vec<(String, String, usize)> = Vec::new();
        let empty;
        loop {
            let had_ws = self.skip_ws();
            if self.starts_with("/>") {
                self.bump(2);
                empty = true;
                break;
            }
            if self.starts_with(">") {
                self.bump(1);
                empty = false;
                break;
            }
            if self.at_end() {
                return Err(self.err(WfErrorKind::Malformed, format!("unterminated start tag \"{raw_name}\"")));
            }
            if !had_ws {
                return Err(self.err(WfErrorKind::Malformed, "expected whitespace between attributes"));
            }
            let attr_line = self.line;
            let name = self.name()?;
            self.skip_ws();
            self.expect("=", &format!("'=' after attribute \"{name}\""))?;
            self.skip_ws();
            let value = self.attribute_value()?;
            if raw_attrs.iter().any(|(n, _, _)| *n == name) {
                return Err(WellFormednessError::new(
                    WfErrorKind::DuplicateAttribute,
                    attr_line,
                    format!("duplicate attribute \"{name}\" on element \"{raw_name}\""),
                ));
            }
            raw_attrs.push((name, value, attr_line));
        }

        let mut scope = self.scopes.last().cloned().unwrap_or_default();
        for (name, value, attr_line) in &raw_attrs {
            let prefix = if name == "xmlns" {
                Some("")
            } else {
                name.strip_prefix("xmlns:")
            };
            let Some(prefix) = prefix else { continue };
            let bad = |msg: String| WellFormednessError::new(WfErrorKind::Malformed, *attr_line, msg);
            if prefix == "xmlns" || (prefix == "xml" && value != XML_NS) {
                return Err(bad(format!("prefix \"{prefix}\" cannot be redeclared")));
            }
            if !prefix.is_empty() && value.is_empty() {
                return Err(bad(format!(
                    "prefix \"{prefix}\" cannot be bound to an empty namespace"
                )));
            }
            if !prefix.is_empty() && prefix.contains(':') {
                return Err(bad(format!("malformed namespace declaration \"{name}\"")));
            }
            scope.insert(prefix.to_string(), value.clone());
        }

        let name = self.resolve(&raw_name, &scope, true, line)?;
        let mut attributes: Vec<Attribute> = Vec::with_capacity(raw_attrs.len());
        for (raw, value, attr_line) in raw_attrs {
            let qname = if raw == "xmlns" {
                QName::new(XMLNS_NS, "xmlns")
            } else if let Some(p) = raw.strip_prefix("xmlns:") {
                QName::prefixed("xmlns", XMLNS_NS, p)
            } else {
                self.resolve(&raw, &scope, false, attr_line)?
            };
            if let Some(other) = attributes.iter().find(|a| a.name == qname) {
                return Err(WellFormednessError::new(
                    WfErrorKind::DuplicateAttribute,
                    attr_line,
                    format!(
                        "attributes \"{}\" and \"{}\" on element \"{raw_name}\" have the same expanded name",
                        other.name.lexical(),
                        raw
                    ),
                ));
            }
            attributes.push(Attribute { name: qname, value });
        }

        self.seen_root = true;
        let event = ParseEvent::StartElement {
            name: name.clone(),
            attributes,
            namespaces: scope.clone(),
            line,
        };
        if empty {
            self.pending_end = Some(ParseEvent::EndElement { name, line: self.line });
        } else {
            self.open.push(OpenElement { raw_name, name, line });
            self.scopes.push(scope);
        }
        Ok(event)
    }

    fn resolve(&self, raw: &str, scope: &NamespaceMap, element: bool, line: usize) -> Result<QName> {
        match raw.split_once(':') {
            Some((prefix, local)) => {
                if prefix.is_empty() || local.is_empty() || local.contains(':') {
                    return Err(WellFormednessError::new(
                        WfErrorKind::Malformed,
                        line,
                        format!("malformed qualified name \"{raw}\""),
                    ));
                }
                if prefix == "xmlns" {
                    return Err(WellFormednessError::new(
                        WfErrorKind::Malformed,
                        line,
                        format!("reserved prefix in \"{raw}\""),
                    ));
                }
                let uri = if prefix == "xml" {
                    XML_NS.to_string()
                } else {
                    match scope.get(prefix) {
                        Some(uri) => uri.clone(),
                        None => {
                            return Err(WellFormednessError::new(
                                WfErrorKind::UndeclaredPrefix,
                                line,
                                format!("undeclared namespace prefix \"{prefix}\" in \"{raw}\""),
                            ))
                        }
                    }
                };
                Ok(QName::prefixed(prefix, uri, local))
            }
            None => {
                let uri = if element {
                    scope.get("").cloned().unwrap_or_default()
                } else {
                    String::new()
                };
                Ok(QName::new(uri, raw))
            }
        }
    }

    fn end_tag(&mut self) -> Result<ParseEvent> {
        let line = self.line;
        self.bump(2);
        let raw = self.name()?;
        self.skip_ws();
        self.expect(">", &format!("'>' to close end tag \"{raw}\""))?;
        let top = self.open.last().expect("end_tag() requires an open element");
        if top.raw_name != raw {
            return Err(WellFormednessError::new(
                WfErrorKind::MismatchedEndTag,
                line,
                format!("end tag \"{raw}\" does not match open element \"{}\"", top.raw_name),
            ));
        }
        let top = self.open.pop().expect("checked above");
        self.scopes.pop();
        Ok(ParseEvent::EndElement { name: top.name, line })
    }
}

impl Iterator for EventReader {
    type Item = Result<ParseEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_event().transpose()
    }
}
