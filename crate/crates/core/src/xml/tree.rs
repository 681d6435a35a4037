use super::{EventReader, ParseEvent, WellFormednessError, XmlDocument, XmlElement};

/// Assembles parse events into an element tree.
#[derive(Debug, Default)]
pub struct TreeBuilder {
    stack: Vec<XmlElement>,
    root: Option<XmlElement>,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: ParseEvent) {
        match event {
            ParseEvent::StartElement {
                name, attributes, line, ..
            } => self.stack.push(XmlElement {
                name,
                attributes,
                children: Vec::new(),
                source_line: line,
            }),
            ParseEvent::EndElement { .. } => {
                let done = self.stack.pop().expect("unbalanced end event");
                match self.stack.last_mut() {
                    Some(parent) => parent.push_element(done),
                    None => self.root = Some(done),
                }
            }
            ParseEvent::Text { text, .. } => {
                if let Some(top) = self.stack.last_mut() {
                    top.push_text(&text);
                }
            }
        }
    }

    /// The finished root element, if the events so far closed one.
    pub fn finish(self) -> Option<XmlElement> {
        self.root
    }
}

/// Parses a whole document into memory.
pub fn parse_tree(input: &[u8]) -> Result<XmlDocument, WellFormednessError> {
    let mut reader = EventReader::new(input)?;
    let mut builder = TreeBuilder::new();
    while let Some(event) = reader.next_event()? {
        builder.push(event);
    }
    let root = builder.finish().expect("reader guarantees a closed root element");
    Ok(XmlDocument {
        root,
        declared_encoding: reader.declared_encoding().to_string(),
    })
}
