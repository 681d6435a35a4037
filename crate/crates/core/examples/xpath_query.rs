//! Compile and evaluate XPath expressions against a module definition,
//! and test nodes against match patterns.
//!
//! ```text
//! cargo run --example xpath_query
//! ```

use stfxml::parse_tree;
use stfxml::xml::NamespaceMap;
use stfxml::xpath::{compile_expr, evaluate, match_pattern, DocView, EvalContext, XPathValue};

const DEFN: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/exampleOne.xml"));

fn main() {
    let doc = parse_tree(DEFN.as_bytes()).unwrap();
    let view = DocView::new(&doc);
    let mut ns = NamespaceMap::new();
    ns.insert("stf".into(), "http://glacier.lbl.gov/icecube/daq/stf".into());

    for src in [
        "stf:test/name",
        "stf:test/inputParameter/*/@default",
        "count(stf:test/outputParameter)",
    ] {
        let expr = compile_expr(src, &ns).unwrap();
        match evaluate(&expr, &EvalContext::new(&view, view.root())).unwrap() {
            XPathValue::NodeSet(nodes) => {
                for n in nodes {
                    println!("{src}: {} = {:?}", view.path(n), view.string_value(n).trim());
                }
            }
            other => println!("{src}: {}", other.to_string_value(&view)),
        }
    }

    let last_param = compile_expr(
        r#"((0=count(../outputParameter))or("outputParameter"=local-name())) and(last()=position())"#,
        &ns,
    )
    .unwrap();
    println!("parsed: {last_param}");

    let pattern = compile_expr("stf:test/outputParameter/*", &ns).unwrap();
    let hits: Vec<String> = view
        .all_nodes()
        .filter(|&n| match_pattern(&pattern, &view, n).unwrap())
        .map(|n| view.path(n))
        .collect();
    println!("{pattern} matches {hits:?}");
}
