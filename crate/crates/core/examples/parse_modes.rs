//! Parse the same document as a tree and as an event stream, then show
//! how a well-formedness error is reported.
//!
//! ```text
//! cargo run --example parse_modes
//! ```

use std::ops::ControlFlow;

use stfxml::xml::{parse_stream, parse_tree, ParseEvent};

const READOUT: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/atwdExample.xml"));
const BROKEN_RESULT: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/exampleOneResult.xml"));

fn main() {
    let doc = parse_tree(READOUT.as_bytes()).expect("readout is well-formed");
    let root = &doc.root;
    println!(
        "root element: {} in {{{}}}",
        root.name.lexical(),
        root.name.namespace_uri
    );
    for atwd in root.elements() {
        for channel in atwd.elements() {
            let samples = channel.string_value().split_whitespace().count();
            println!(
                "  Channel number={} with {samples} samples",
                channel.attribute("number").unwrap_or("?")
            );
        }
    }

    // Streaming sees the same structure without building it.
    let mut depth = 0usize;
    parse_stream(READOUT.as_bytes(), &mut |event: ParseEvent| {
        match event {
            ParseEvent::StartElement { name, line, .. } => {
                println!("{:indent$}<{}> line {line}", "", name.lexical(), indent = depth * 2);
                depth += 1;
            }
            ParseEvent::EndElement { .. } => depth -= 1,
            ParseEvent::Text { .. } => {}
        }
        ControlFlow::Continue(())
    })
    .expect("readout is well-formed");

    match parse_tree(BROKEN_RESULT.as_bytes()) {
        Ok(_) => println!("unexpectedly well-formed"),
        Err(e) => println!("exampleOneResult.xml:{}: {}", e.line, e.message),
    }
}
