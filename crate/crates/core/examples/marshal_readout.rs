//! Edit a bound readout and marshal it back to validated XML.
//!
//! ```text
//! cargo run --example marshal_readout
//! ```

use stfxml::databind::{derive_bindings, marshal, unmarshal, FieldValue, TypedValue};
use stfxml::parse_tree;
use stfxml::schema::{load_schema, Value};
use stfxml::xml::to_xml_string;

const SCHEMA: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/atwdReadout.xsd"));
const READOUT: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/fixtures/atwdExample-corrected.xml"
));

fn main() {
    let schema = load_schema(&parse_tree(SCHEMA.as_bytes()).unwrap()).unwrap();
    let model = derive_bindings(&schema);
    let mut readout = unmarshal(&model, &parse_tree(READOUT.as_bytes()).unwrap()).unwrap();

    // Zero the waveform of channel 0 in the first ATWD.
    set_samples(&mut readout, vec![Value::Integer(0); 48]);

    let doc = marshal(&model, &readout).expect("still valid");
    print!("{}", to_xml_string(&doc));

    // Too few samples is caught on the way out.
    set_samples(&mut readout, vec![Value::Integer(1); 47]);
    match marshal(&model, &readout) {
        Ok(_) => println!("unexpectedly valid"),
        Err(e) => println!("rejected: {e}"),
    }
}

fn set_samples(readout: &mut TypedValue, samples: Vec<Value>) {
    let Some(FieldValue::Repeated(atwds)) = readout.record.get_mut("atwd") else {
        return;
    };
    let Some(FieldValue::Record(atwd)) = atwds.first_mut() else {
        return;
    };
    let Some(FieldValue::Repeated(channels)) = atwd.get_mut("channel") else {
        return;
    };
    if let Some(FieldValue::Record(channel)) = channels.first_mut() {
        channel.set("value", FieldValue::List(samples));
    }
}
