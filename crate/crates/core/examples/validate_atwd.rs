//! Validate the ATWD readout against its schema, before and after the
//! channel number is corrected.
//!
//! ```text
//! cargo run --example validate_atwd
//! ```

use stfxml::parse_tree;
use stfxml::schema::{load_schema, validate};

const SCHEMA: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/atwdReadout.xsd"));
const READOUT: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/atwdExample.xml"));

fn main() {
    let schema = load_schema(&parse_tree(SCHEMA.as_bytes()).unwrap()).expect("schema compiles");

    let report = validate(&schema, &parse_tree(READOUT.as_bytes()).unwrap());
    println!("original readout: {} violation(s)", report.violations.len());
    print!("{report}");

    let corrected = READOUT.replace("<Channel number=\"2\"", "<Channel number=\"1\"");
    let report = validate(&schema, &parse_tree(corrected.as_bytes()).unwrap());
    println!("corrected readout valid: {}", report.is_valid());

    // Both channels numbered 0 trips the unique constraint instead.
    let duplicated = READOUT.replace("<Channel number=\"2\"", "<Channel number=\"0\"");
    print!("{}", validate(&schema, &parse_tree(duplicated.as_bytes()).unwrap()));
}
