//! The test-module workflow: load a definition, generate its C header and
//! document schemas, then check a setup and a result against them.
//!
//! ```text
//! cargo run --example stf_toolchain
//! ```

use stfxml::parse_tree;
use stfxml::stf::{check_result, check_setup, complete_setup, gen_header, gen_setup_schema, load_defn};
use stfxml::xml::to_xml_string;

const DEFN: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/exampleOne.xml"));
const RESULT: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/fixtures/exampleOneResult-corrected.xml"
));

fn main() {
    let defn = load_defn(&parse_tree(DEFN.as_bytes()).unwrap()).expect("definition is valid");
    println!("module {} v{}.{}", defn.name, defn.version.major, defn.version.minor);
    for (p, output) in defn.parameters() {
        let dir = if output { "out" } else { "in " };
        let default = p.default.as_ref().map(|d| format!(" default {d}")).unwrap_or_default();
        println!("  {dir} {} {}{default}", p.kind.name(), p.name);
    }

    print!("{}", gen_header(&defn));
    println!();
    print!("{}", to_xml_string(&gen_setup_schema(&defn)));

    // quantity has a default, so a setup naming only the fruit is valid.
    let setup = parse_tree(
        br#"<stf:setup xmlns:stf="http://glacier.lbl.gov/icecube/daq/stf">
 <ExampleOne><parameters><fruit>apples</fruit></parameters></ExampleOne>
</stf:setup>"#,
    )
    .unwrap();
    println!("setup valid: {}", check_setup(&defn, &setup).is_valid());
    print!("{}", to_xml_string(&complete_setup(&defn, &setup)));

    let too_many = parse_tree(
        br#"<stf:setup xmlns:stf="http://glacier.lbl.gov/icecube/daq/stf">
 <ExampleOne><parameters><fruit>apples</fruit><quantity>101</quantity></parameters></ExampleOne>
</stf:setup>"#,
    )
    .unwrap();
    print!("{}", check_setup(&defn, &too_many));

    println!(
        "result valid: {}",
        check_result(&defn, &parse_tree(RESULT.as_bytes()).unwrap()).is_valid()
    );
}
