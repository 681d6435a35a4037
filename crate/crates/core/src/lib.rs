//! XML toolchain for describing, configuring and checking hardware test
//! modules.
//!
//! The crate is layered:
//!
//! - [`xml`]: namespace-aware parsing (tree and streaming) and serialization.
//! - [`xpath`]: a small XPath dialect, enough for schema identity constraints
//!   and template match patterns.
//! - [`schema`]: an XML Schema subset (sequences, list/restriction simple
//!   types, simple content, attribute defaults, facets, `unique`).
//! - [`xslt`]: a template-rule transform engine with modes, variables and
//!   `choose`.
//! - [`databind`]: schema-driven unmarshal/marshal into typed value trees.
//! - [`stf`]: test-module definitions, C signature generation and
//!   setup/result schema generation and checking.
//! - [`cli`]: the command-line front end used by the `stfxml` binary.
//!
//! Runnable walkthroughs for each layer live in the crate's `examples/`
//! directory.

pub mod cli;
pub mod databind;
pub mod schema;
pub mod stf;
pub mod xml;
pub mod xpath;
pub mod xslt;

pub use xml::{parse_stream, parse_tree, serialize, QName, WellFormednessError, XmlDocument, XmlElement};
