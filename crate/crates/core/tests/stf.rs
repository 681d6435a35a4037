mod common;

use common::*;
use stfxml::databind::{derive_bindings, unmarshal, FieldValue};
use stfxml::schema::{load_schema, Value, ViolationKind};
use stfxml::stf::{
    check_result, check_setup, complete_setup, gen_header, gen_header_direct, gen_result_schema, gen_setup_schema,
    load_defn, DefnError, ModuleDefn, ParamKind, Parameter, Version,
};
use stfxml::{parse_tree, WellFormednessError};

fn defn() -> ModuleDefn {
    load_defn(&doc(DEFN)).unwrap()
}

fn kinds(report: &stfxml::schema::ValidationReport) -> Vec<ViolationKind> {
    report.violations.iter().map(|v| v.kind).collect()
}

#[test]
fn example_definition_loads() {
    let d = defn();
    assert_eq!(d.name, "ExampleOne");
    assert_eq!(d.description, "This is a simple Example of an STF module definition.");
    assert_eq!(d.version, Version { major: 1, minor: 0 });
    assert_eq!(
        d.input_params,
        vec![
            Parameter {
                default: Some(Value::String("bananas".into())),
                ..Parameter::new("fruit", ParamKind::String)
            },
            Parameter {
                default: Some(Value::Integer(1)),
                min_value: Some(0),
                max_value: Some(100),
                ..Parameter::new("quantity", ParamKind::UnsignedInt)
            },
        ]
    );
    assert_eq!(
        d.output_params,
        vec![
            Parameter::new("fufilled", ParamKind::Boolean),
            Parameter::new("numberRemaining", ParamKind::UnsignedInt),
        ]
    );
}

#[test]
fn broken_definitions_are_rejected() {
    let cases = [
        mutate(DEFN, "<name>quantity</name>", "<name>fruit</name>"),
        mutate(DEFN, "default=\"1\"", "default=\"150\""),
        mutate(DEFN, "minValue=\"0\"", "minValue=\"101\""),
        mutate(DEFN, "<name>ExampleOne</name>", "<name>Example One</name>"),
        mutate(DEFN, "<boolean/>", "<boolean default=\"true\"/>"),
        mutate(DEFN, "<boolean/>", ""),
        mutate(DEFN, "<boolean/>", "<boolean/><string/>"),
        mutate(DEFN, "<name>fufilled</name>", "<name>passed</name>"),
    ];
    for src in &cases {
        assert!(matches!(load_defn(&doc(src)), Err(DefnError::Semantic { .. })), "{src}");
    }
    let schema_level = [
        mutate(DEFN, "default=\"1\"", "default=\"-1\""),
        mutate(DEFN, "<boolean/>", "<float/>"),
        mutate(
            DEFN,
            "<string default=\"bananas\"/>",
            "<string default=\"bananas\" maxValue=\"3\"/>",
        ),
        mutate(DEFN, "major=\"1\" ", ""),
    ];
    for src in &schema_level {
        assert!(matches!(load_defn(&doc(src)), Err(DefnError::Invalid(_))), "{src}");
    }
}

#[test]
fn header_is_golden_both_ways() {
    let d = defn();
    assert_eq!(gen_header(&d), HEADER);
    assert_eq!(gen_header_direct(&d), HEADER);
}

#[test]
fn header_single_boolean_output() {
    let d = ModuleDefn {
        name: "Solo".into(),
        description: String::new(),
        version: Version { major: 0, minor: 1 },
        input_params: vec![],
        output_params: vec![Parameter::new("ok", ParamKind::Boolean)],
    };
    let h = gen_header(&d);
    assert_eq!(h, gen_header_direct(&d));
    assert!(
        h.ends_with("(STF_DESCRIPTOR *,\n                   BOOLEAN*  ok);\n"),
        "{h:?}"
    );
}

#[test]
fn header_without_parameters_stays_open() {
    let d = ModuleDefn {
        name: "X".into(),
        description: String::new(),
        version: Version { major: 1, minor: 0 },
        input_params: vec![],
        output_params: vec![],
    };
    assert_eq!(
        gen_header(&d),
        "\nextern BOOLEAN XInit(STF_DESCRIPTOR *);\nextern BOOLEAN XEntry(STF_DESCRIPTOR *,\n"
    );
    assert_eq!(gen_header_direct(&d), gen_header(&d));
    assert!(d.check().is_err());
}

#[test]
fn generated_schemas_load() {
    let d = defn();
    load_schema(&gen_setup_schema(&d)).unwrap();
    load_schema(&gen_result_schema(&d)).unwrap();
}

#[test]
fn setup_checks() {
    let d = defn();
    assert!(check_setup(&d, &doc(SETUP)).is_valid());

    let over = check_setup(
        &d,
        &doc(&mutate(SETUP, "<quantity>54</quantity>", "<quantity>101</quantity>")),
    );
    assert_eq!(kinds(&over), [ViolationKind::MaxInclusive]);
    let under = check_setup(
        &d,
        &doc(&mutate(SETUP, "<quantity>54</quantity>", "<quantity>-1</quantity>")),
    );
    assert_eq!(kinds(&under), [ViolationKind::Lexical]);

    let renamed = check_setup(
        &d,
        &doc(&mutate(SETUP, "<fruit>oranges</fruit>", "<fruits>oranges</fruits>")),
    );
    assert!(kinds(&renamed).contains(&ViolationKind::UnexpectedElement), "{renamed}");
}

#[test]
fn omitted_defaults_are_honoured() {
    let d = defn();
    let sparse = mutate(SETUP, "     <quantity>54</quantity>\n", "");
    let sparse = mutate(&sparse, "     <fruit>oranges</fruit>\n", "");
    assert!(check_setup(&d, &doc(&sparse)).is_valid());

    let full = complete_setup(&d, &doc(&sparse));
    let params = full.root.child("ExampleOne").unwrap().child("parameters").unwrap();
    assert_eq!(params.child("fruit").unwrap().string_value(), "bananas");
    assert_eq!(params.child("quantity").unwrap().string_value(), "1");
    assert!(check_setup(&d, &full).is_valid());

    let model = derive_bindings(&load_schema(&gen_setup_schema(&d)).unwrap());
    let v = unmarshal(&model, &doc(&sparse)).unwrap();
    assert_eq!(
        v.lookup("exampleOne/parameters/quantity").unwrap(),
        &FieldValue::Scalar(Value::Integer(1))
    );
    assert_eq!(
        v.lookup("exampleOne/parameters/fruit").unwrap(),
        &FieldValue::Scalar(Value::String("bananas".into()))
    );
}

#[test]
fn result_checks() {
    let d = defn();
    assert!(
        check_result(&d, &doc(RESULT_OK)).is_valid(),
        "{}",
        check_result(&d, &doc(RESULT_OK))
    );

    let no_passed = check_result(&d, &doc(&mutate(RESULT_OK, "     <passed>true</passed>\n", "")));
    assert_eq!(kinds(&no_passed), [ViolationKind::MissingElement]);
    let maybe = check_result(
        &d,
        &doc(&mutate(
            RESULT_OK,
            "<fufilled>true</fufilled>",
            "<fufilled>maybe</fufilled>",
        )),
    );
    assert_eq!(kinds(&maybe), [ViolationKind::Lexical]);
    let no_remaining = check_result(
        &d,
        &doc(&mutate(RESULT_OK, "     <numberRemaining>19</numberRemaining>\n", "")),
    );
    assert_eq!(kinds(&no_remaining), [ViolationKind::MissingElement]);
}

#[test]
fn verbatim_result_is_not_well_formed() {
    let err: WellFormednessError = parse_tree(RESULT_RAW.as_bytes()).unwrap_err();
    assert_eq!(err.line, line_of(RESULT_RAW, "</broadID>"));
    assert!(
        err.message.contains("broadID") && err.message.contains("boardID"),
        "{err}"
    );
}

#[test]
fn definition_document_round_trips() {
    let d = defn();
    assert_eq!(load_defn(&d.to_document()).unwrap(), d);
}
