use std::ops::ControlFlow;

use super::{Attribute, EventReader, NamespaceMap, QName, WellFormednessError};

/// One parse event. Start/end events are balanced in every stream that
/// completes without error.
#[derive(Clone, Debug, PartialEq)]
pub enum ParseEvent {
    StartElement {
        name: QName,
        attributes: Vec<Attribute>,
        /// Bindings in scope at this element, its own declarations included.
        namespaces: NamespaceMap,
        line: usize,
    },
    EndElement {
        name: QName,
        line: usize,
    },
    Text {
        text: String,
        line: usize,
    },
}

impl ParseEvent {
    pub fn line(&self) -> usize {
        match self {
            ParseEvent::StartElement { line, .. }
            | ParseEvent::EndElement { line, .. }
            | ParseEvent::Text { line, .. } => *line,
        }
    }
}

/// Receives events from [`parse_stream`]. Returning `Break` stops parsing.
pub trait EventHandler {
    fn handle(&mut self, event: ParseEvent) -> ControlFlow<()>;
}

impl<F> EventHandler for F
where
    F: FnMut(ParseEvent) -> ControlFlow<()>,
{
    fn handle(&mut self, event: ParseEvent) -> ControlFlow<()> {
        self(event)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamOutcome {
    Completed,
    /// The handler asked to stop; the rest of the input was not examined.
    Aborted,
}

/// Parses `input`, delivering events in document order as they are read.
///
/// Errors surface at the point of detection, after every event that
/// precedes the offending markup has been delivered.
pub fn parse_stream<H>(input: &[u8], handler: &mut H) -> Result<StreamOutcome, WellFormednessError>
where
    H: EventHandler + ?Sized,
{
    let mut reader = EventReader::new(input)?;
    while let Some(event) = reader.next_event()? {
        if handler.handle(event).is_break() {
            return Ok(StreamOutcome::Aborted);
        }
    }
    Ok(StreamOutcome::Completed)
}
