use std::fmt::Write as _;
use std::sync::OnceLock;

use super::ModuleDefn;
use crate::xml::parse_tree;
use crate::xslt::{load_stylesheet, transform, Stylesheet};

/// Source of the header stylesheet.
pub const HEADER_XSL: &str = include_str!("../../assets/defn2Signature.xsl");

const INDENT: &str = "                   ";

pub fn header_stylesheet() -> &'static Stylesheet {
    static SHEET: OnceLock<Stylesheet> = OnceLock::new();
    SHEET.get_or_init(|| {
        let doc = parse_tree(HEADER_XSL.as_bytes()).expect("bundled stylesheet is well-formed");
        load_stylesheet(&doc).expect("bundled stylesheet compiles")
    })
}

/// C declarations of the module's init and entry functions, produced by
/// running the bundled stylesheet over the definition.
pub fn gen_header(defn: &ModuleDefn) -> String {
    let out = transform(header_stylesheet(), &defn.to_document()).expect("bundled stylesheet runs on any definition");
    String::from_utf8(out).expect("text output is UTF-8")
}

/// Same text as [`gen_header`], written directly.
pub fn gen_header_direct(defn: &ModuleDefn) -> String {
    let mut s = String::new();
    let name = &defn.name;
    write!(
        s,
        "\nextern BOOLEAN {name}Init(STF_DESCRIPTOR *);\nextern BOOLEAN {name}Entry(STF_DESCRIPTOR *,\n"
    )
    .expect("string write");
    let no_outputs = defn.output_params.is_empty();
    for (params, output) in [(&defn.input_params, false), (&defn.output_params, true)] {
        for (i, p) in params.iter().enumerate() {
            let last = i + 1 == params.len() && (output || no_outputs);
            let modifier = if output { "* " } else { "" };
            let end = if last { ");" } else { "," };
            writeln!(s, "{INDENT}{}{modifier} {}{end}", p.kind.c_type(output), p.name).expect("string write");
        }
    }
    s
}
