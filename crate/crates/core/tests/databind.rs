mod common;

use common::*;
use stfxml::databind::{derive_bindings, marshal, unmarshal, BindingError, FieldKind, FieldValue};
use stfxml::schema::{load_schema, validate, BuiltinKind, Value};

fn model() -> stfxml::databind::BindingModel {
    derive_bindings(&load_schema(&doc(ATWD_XSD)).unwrap())
}

#[test]
fn atwd_model_shape() {
    let m = model();
    let names: Vec<&str> = m.records.keys().map(String::as_str).collect();
    assert_eq!(names, ["Atwd", "AtwdChannel", "AtwdReadout"]);

    let readout = m.record("AtwdReadout").unwrap();
    let atwd = readout.field("atwd").unwrap();
    assert_eq!(atwd.kind, FieldKind::Record("Atwd".into()));
    assert!(atwd.repeated);

    let channel = m.record("Atwd").unwrap().field("channel").unwrap();
    assert_eq!(channel.kind, FieldKind::Record("AtwdChannel".into()));
    assert!(channel.repeated);

    let rec = m.record("AtwdChannel").unwrap();
    let described: Vec<(String, String)> = rec.fields.iter().map(|f| (f.name.clone(), f.describe())).collect();
    assert_eq!(
        described,
        [
            ("value".to_string(), "list of unsignedShort".to_string()),
            ("number".to_string(), "nonNegativeInteger attr".to_string()),
            (
                "bitsPerSample".to_string(),
                "nonNegativeInteger attr default 16".to_string()
            ),
        ]
    );
}

#[test]
fn single_string_element_model() {
    let src =
        r#"<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema"><xs:element name="e" type="xs:string"/></xs:schema>"#;
    let m = derive_bindings(&load_schema(&doc(src)).unwrap());
    assert_eq!(m.records.len(), 1);
    let r = m.record("e").unwrap();
    assert_eq!(r.fields.len(), 1);
    assert_eq!(r.fields[0].kind, FieldKind::Scalar(BuiltinKind::String));

    let v = unmarshal(&m, &doc("<e> hi </e>")).unwrap();
    assert_eq!(
        v.record.get("value"),
        Some(&FieldValue::Scalar(Value::String(" hi ".into())))
    );
    assert_eq!(unmarshal(&m, &marshal(&m, &v).unwrap()).unwrap(), v);
}

#[test]
fn binding_demo_numbers() {
    let v = unmarshal(&model(), &doc(ATWD_OK)).unwrap();
    assert_eq!(v.count("atwd[0]/channel").unwrap(), 2);
    let samples = v.lookup("atwd[0]/channel[0]/value").unwrap().as_list().unwrap();
    assert_eq!(samples.len(), 48);
    assert_eq!(samples[37], Value::Integer(188));
    let bits = v.lookup("atwd[0]/channel[1]/bitsPerSample").unwrap();
    assert_eq!(bits, &FieldValue::Scalar(Value::Integer(16)));
}

#[test]
fn invalid_documents_are_refused() {
    match unmarshal(&model(), &doc(ATWD)) {
        Err(BindingError::Invalid(report)) => assert_eq!(report.violations.len(), 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn marshal_round_trip() {
    let m = model();
    let v = unmarshal(&m, &doc(ATWD_OK)).unwrap();
    let written = marshal(&m, &v).unwrap();
    assert!(validate(m.schema(), &written).is_valid());
    assert_eq!(written.root.name.prefix, "tns");
    assert_eq!(unmarshal(&m, &written).unwrap(), v);
}

#[test]
fn short_channel_is_refused() {
    let m = model();
    let mut v = unmarshal(&m, &doc(ATWD_OK)).unwrap();
    let FieldValue::Repeated(atwds) = v.record.get_mut("atwd").unwrap() else {
        panic!()
    };
    let FieldValue::Record(atwd) = &mut atwds[0] else {
        panic!()
    };
    let FieldValue::Repeated(channels) = atwd.get_mut("channel").unwrap() else {
        panic!()
    };
    let FieldValue::Record(ch) = &mut channels[0] else {
        panic!()
    };
    let FieldValue::List(samples) = ch.get_mut("value").unwrap() else {
        panic!()
    };
    samples.pop();
    match marshal(&m, &v) {
        Err(BindingError::Invalid(report)) => {
            assert!(report
                .violations
                .iter()
                .any(|x| x.kind == stfxml::schema::ViolationKind::Length))
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn explicit_default_is_transparent() {
    let m = model();
    let explicit = mutate(
        ATWD_OK,
        "<Channel number=\"1\">",
        "<Channel number=\"1\" bitsPerSample=\"16\">",
    );
    assert_eq!(
        unmarshal(&m, &doc(&explicit)).unwrap(),
        unmarshal(&m, &doc(ATWD_OK)).unwrap()
    );
}

#[test]
fn rendering_and_paths() {
    let v = unmarshal(&model(), &doc(ATWD_OK)).unwrap();
    let text = v.to_string();
    assert!(text.starts_with("AtwdReadout\n  atwd[0] = Atwd\n    channel[0] = AtwdChannel\n      value = [67 71"));
    assert!(text.contains("      bitsPerSample = 16\n"));
    for bad in ["", "nope", "atwd[9]", "atwd[0]/channel[0]/value/x", "atwd[x]"] {
        assert!(v.lookup(bad).is_err(), "{bad}");
    }
}
