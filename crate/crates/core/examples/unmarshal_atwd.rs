//! Derive typed records from the ATWD schema and unmarshal the corrected
//! readout into them.
//!
//! ```text
//! cargo run --example unmarshal_atwd
//! ```

use stfxml::databind::{derive_bindings, unmarshal};
use stfxml::parse_tree;
use stfxml::schema::load_schema;

const SCHEMA: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/atwdReadout.xsd"));
const READOUT: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/fixtures/atwdExample-corrected.xml"
));

fn main() {
    let schema = load_schema(&parse_tree(SCHEMA.as_bytes()).unwrap()).unwrap();
    let model = derive_bindings(&schema);
    for (name, record) in &model.records {
        println!("record {name}");
        for field in &record.fields {
            println!("  {}: {}", field.name, field.describe());
        }
    }

    let readout = unmarshal(&model, &parse_tree(READOUT.as_bytes()).unwrap()).expect("readout is valid");
    println!(
        "Found {} channels in the first ATWD",
        readout.count("atwd[0]/channel").unwrap()
    );

    let samples = readout.lookup("atwd[0]/channel[0]/value").unwrap().as_list().unwrap();
    println!("channel 0 sample 37 = {}", samples[37]);
    let bits = readout.lookup("atwd[0]/channel[1]/bitsPerSample").unwrap();
    println!("channel 1 bitsPerSample (defaulted) = {}", bits.as_scalar().unwrap());
}
