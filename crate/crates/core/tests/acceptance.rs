//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::process::ExitCode;

use common::*;
use stfxml::databind::{derive_bindings, unmarshal};
use stfxml::schema::{load_schema, validate, ValidationReport, Value, ViolationKind};
use stfxml::stf::{check_result, check_setup, gen_header, load_defn, ModuleDefn};
use stfxml::xml::WfErrorKind;
use stfxml::xslt::{load_stylesheet, transform};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn atwd_report(src: &str) -> Result<ValidationReport, String> {
    let schema = load_schema(&doc(ATWD_XSD)).map_err(|e| e.to_string())?;
    let instance = stfxml::parse_tree(src.as_bytes()).map_err(|e| e.to_string())?;
    Ok(validate(&schema, &instance))
}

fn example_defn() -> Result<ModuleDefn, String> {
    load_defn(&doc(DEFN)).map_err(|e| e.to_string())
}

fn golden_header() -> Outcome {
    let generated = gen_header(&example_defn()?);
    ensure(generated == HEADER, || {
        format!("gen-header output differs:\n{generated}")
    })?;
    let sheet = load_stylesheet(&doc(XSL)).map_err(|e| e.to_string())?;
    let bytes = transform(&sheet, &doc(DEFN)).map_err(|e| e.to_string())?;
    ensure(bytes == HEADER.as_bytes(), || {
        format!("transform output differs:\n{}", String::from_utf8_lossy(&bytes))
    })
}

fn original_readout_has_one_violation() -> Outcome {
    let report = atwd_report(ATWD)?;
    ensure(report.violations.len() == 1, || {
        format!("expected one violation, got:\n{report}")
    })?;
    let v = &report.violations[0];
    ensure(
        v.kind == ViolationKind::MaxExclusive && v.path == "/daq:AtwdReadout[1]/Atwd[1]/Channel[2]/@number",
        || format!("unexpected violation {v}"),
    )
}

fn corrected_readout_and_mutations() -> Outcome {
    let report = atwd_report(ATWD_OK)?;
    ensure(report.is_valid(), || format!("corrected readout is invalid:\n{report}"))?;

    let channel = "/daq:AtwdReadout[1]/Atwd[1]/Channel";
    let second = ATWD_OK
        .find("    <Channel number=\"1\">")
        .zip(ATWD_OK.find("   </Atwd>"))
        .map(|(a, b)| &ATWD_OK[a..b])
        .ok_or("fixture layout changed")?;
    let mutations = [
        (
            "47 samples",
            mutate(ATWD_OK, "84 188 0 0 0 0 0 0 0 0 0 0", "84 188 0 0 0 0 0 0 0 0 0"),
            format!("{channel}[1]"),
        ),
        (
            "duplicate channel numbers",
            mutate(ATWD_OK, "<Channel number=\"1\">", "<Channel number=\"0\">"),
            format!("{channel}[2]/@number"),
        ),
        (
            "bitsPerSample 12",
            mutate(ATWD_OK, "bitsPerSample=\"8\"", "bitsPerSample=\"12\""),
            format!("{channel}[1]/@bitsPerSample"),
        ),
        (
            "three channels",
            mutate(ATWD_OK, second, &second.repeat(2)),
            format!("{channel}[3]"),
        ),
        (
            "one channel",
            mutate(ATWD_OK, second, ""),
            "/daq:AtwdReadout[1]/Atwd[1]".to_string(),
        ),
    ];
    for (label, src, location) in mutations {
        let report = atwd_report(&src)?;
        ensure(report.violations.iter().any(|v| v.path == location), || {
            format!("{label}: no violation at {location}:\n{report}")
        })?;
    }
    Ok(())
}

fn setup_and_result_round() -> Outcome {
    let defn = example_defn()?;
    let report = check_setup(&defn, &doc(SETUP));
    ensure(report.is_valid(), || format!("setup rejected:\n{report}"))?;
    for bad in ["101", "-1"] {
        let src = mutate(SETUP, "<quantity>54</quantity>", &format!("<quantity>{bad}</quantity>"));
        let report = check_setup(&defn, &doc(&src));
        ensure(report.violations.len() == 1, || {
            format!("quantity {bad}: expected one violation, got:\n{report}")
        })?;
    }
    let report = check_result(&defn, &doc(RESULT_OK));
    ensure(report.is_valid(), || format!("corrected result rejected:\n{report}"))?;
    let err = match stfxml::parse_tree(RESULT_RAW.as_bytes()) {
        Ok(_) => return Err("original result parsed as well-formed".into()),
        Err(e) => e,
    };
    let line = line_of(RESULT_RAW, "</broadID>");
    ensure(err.kind == WfErrorKind::MismatchedEndTag && err.line == line, || {
        format!("expected a mismatched end tag on line {line}, got {err}")
    })
}

fn binding_demo() -> Outcome {
    let schema = load_schema(&doc(ATWD_XSD)).map_err(|e| e.to_string())?;
    let model = derive_bindings(&schema);
    let typed = unmarshal(&model, &doc(ATWD_OK)).map_err(|e| e.to_string())?;
    let count = typed.count("atwd[0]/channel").map_err(|e| e.to_string())?;
    ensure(count == 2, || format!("found {count} channels"))?;
    let sample = typed
        .lookup("atwd[0]/channel[0]/value")
        .map_err(|e| e.to_string())?
        .as_list()
        .and_then(|l| l.get(37))
        .cloned();
    ensure(sample == Some(Value::Integer(188)), || {
        format!("sample 37 is {sample:?}")
    })?;
    let bits = typed
        .lookup("atwd[0]/channel[1]/bitsPerSample")
        .map_err(|e| e.to_string())?
        .as_scalar()
        .cloned();
    ensure(bits == Some(Value::Integer(16)), || {
        format!("defaulted bitsPerSample is {bits:?}")
    })
}

fn property_suites() -> Outcome {
    for (name, run) in props::SUITES {
        run(1000).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 6] = [
        ("generated header matches the golden file", golden_header),
        (
            "original readout fails with one maxExclusive violation",
            original_readout_has_one_violation,
        ),
        (
            "corrected readout validates and every mutation is caught",
            corrected_readout_and_mutations,
        ),
        ("setup and result documents check as expected", setup_and_result_round),
        ("bound readout exposes channels, samples and defaults", binding_demo),
        ("property suites hold over 1000 cases each", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        match check() {
            Ok(()) => println!("PASS {}: {name}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}: {name}\n  {}", i + 1, why.replace('\n', "\n  "));
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
