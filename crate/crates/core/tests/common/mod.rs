#![allow(dead_code)]

pub mod props;

use stfxml::{parse_tree, XmlDocument};

pub const ATWD: &str = include_str!("../../fixtures/atwdExample.xml");
pub const ATWD_OK: &str = include_str!("../../fixtures/atwdExample-corrected.xml");
pub const ATWD_XSD: &str = include_str!("../../fixtures/atwdReadout.xsd");
pub const DEFN: &str = include_str!("../../fixtures/exampleOne.xml");
pub const SETUP: &str = include_str!("../../fixtures/exampleOneSetup.xml");
pub const RESULT_RAW: &str = include_str!("../../fixtures/exampleOneResult.xml");
pub const RESULT_OK: &str = include_str!("../../fixtures/exampleOneResult-corrected.xml");
pub const HEADER: &str = include_str!("../../fixtures/exampleOneSignature.h");
pub const XSL: &str = include_str!("../../assets/defn2Signature.xsl");

pub fn doc(src: &str) -> XmlDocument {
    parse_tree(src.as_bytes()).expect("fixture parses")
}

/// Replaces exactly one occurrence, so a mutation can't silently miss.
pub fn mutate(src: &str, from: &str, to: &str) -> String {
    assert_eq!(src.matches(from).count(), 1, "ambiguous mutation of {from:?}");
    src.replacen(from, to, 1)
}

/// 1-based line of the first occurrence of `needle`.
pub fn line_of(src: &str, needle: &str) -> usize {
    let at = src.find(needle).expect("needle present");
    src[..at].matches('\n').count() + 1
}
