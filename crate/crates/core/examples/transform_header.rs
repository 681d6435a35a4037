//! Run the signature stylesheet over a module definition and show which
//! template rule handled each node.
//!
//! ```text
//! cargo run --example transform_header
//! ```

use stfxml::parse_tree;
use stfxml::xslt::{load_stylesheet, transform_traced};

const XSL: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/assets/defn2Signature.xsl"));
const DEFN: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/exampleOne.xml"));

fn main() {
    let sheet = load_stylesheet(&parse_tree(XSL.as_bytes()).unwrap()).expect("stylesheet compiles");
    println!("{} template rules in modes {:?}", sheet.templates.len(), sheet.modes());

    let trace = transform_traced(&sheet, &parse_tree(DEFN.as_bytes()).unwrap()).unwrap();
    for s in trace.selections.iter().filter(|s| s.rule.is_some()) {
        let rule = &sheet.templates[s.rule.unwrap()];
        println!(
            "{:<45} mode={:<14} match={}",
            s.node_path,
            s.mode.as_deref().unwrap_or("-"),
            rule.pattern
        );
    }
    for w in &trace.warnings {
        println!("ambiguous at {}: rules {:?}", w.node_path, w.rules);
    }
    print!("{}", String::from_utf8(trace.output).unwrap());
}
