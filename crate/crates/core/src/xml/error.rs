use thiserror::Error;

/// Category of a well-formedness failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WfErrorKind {
    MismatchedEndTag,
    UnclosedElement,
    UndeclaredPrefix,
    DuplicateAttribute,
    Malformed,
    /// Syntax outside the supported subset (CDATA, PIs, DOCTYPE).
    Unsupported,
    Encoding,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct WellFormednessError {
    pub kind: WfErrorKind,
    pub line: usize,
    pub message: String,
}

impl WellFormednessError {
    pub(crate) fn new(kind: WfErrorKind, line: usize, message: impl Into<String>) -> Self {
        WellFormednessError {
            kind,
            line,
            message: message.into(),
        }
    }
}
