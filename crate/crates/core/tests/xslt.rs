mod common;

use common::*;
use stfxml::xpath::DocView;
use stfxml::xslt::{load_stylesheet, transform, transform_traced, Instruction, OutputMethod, XsltError};

fn sheet(body: &str) -> stfxml::xslt::Stylesheet {
    let src = format!(
        r#"<xsl:stylesheet version="1.0" xmlns:xsl="http://www.w3.org/1999/XSL/Transform"
              xmlns:stf="http://glacier.lbl.gov/icecube/daq/stf">{body}</xsl:stylesheet>"#
    );
    load_stylesheet(&doc(&src)).unwrap()
}

#[test]
fn header_stylesheet_compiles() {
    let s = load_stylesheet(&doc(XSL)).unwrap();
    assert_eq!(s.output_method, OutputMethod::Text);
    assert!(s.output_indent);
    assert_eq!(s.templates.len(), 13);
    let vars: Vec<&str> = s.variables.iter().map(|v| v.name.as_str()).collect();
    assert_eq!(vars, ["nl"]);
    let locals: Vec<&str> = s.templates.iter().flat_map(|t| t.local_variables()).collect();
    assert_eq!(locals, ["testName"]);
    let modes = s.modes();
    for m in [
        None,
        Some("Entry"),
        Some("signature"),
        Some("entryModifier"),
        Some("EntryLocal"),
        Some("entryLocalModifier"),
    ] {
        assert!(modes.contains(&m), "{m:?}");
    }
    let matches: Vec<String> = s.templates.iter().map(|t| t.pattern.to_string()).collect();
    assert_eq!(matches[0], "/");
    assert_eq!(matches[1], "stf:test");
    assert_eq!(matches[2], "stf:test/*/*");
    assert_eq!(s.templates[2].mode.as_deref(), Some("Entry"));
}

#[test]
fn header_transform_is_golden() {
    let s = load_stylesheet(&doc(XSL)).unwrap();
    let out = transform(&s, &doc(DEFN)).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), HEADER);
}

#[test]
fn transform_is_deterministic() {
    let s = load_stylesheet(&doc(XSL)).unwrap();
    let d = doc(DEFN);
    let first = transform(&s, &d).unwrap();
    for _ in 0..5 {
        assert_eq!(transform(&s, &d).unwrap(), first);
    }
}

#[test]
fn modes_are_isolated() {
    let s = load_stylesheet(&doc(XSL)).unwrap();
    let trace = transform_traced(&s, &doc(DEFN)).unwrap();
    assert!(!trace.selections.is_empty());
    for sel in &trace.selections {
        if let Some(rule) = sel.rule {
            assert_eq!(s.templates[rule].mode, sel.mode, "{sel:?}");
        }
    }
    assert!(trace.warnings.is_empty(), "{:?}", trace.warnings);
}

#[test]
fn minimal_stylesheet() {
    let s = sheet(r#"<xsl:output method="text"/><xsl:template match="/">ok</xsl:template>"#);
    assert_eq!(s.templates.len(), 1);
    assert_eq!(s.templates[0].body, vec![Instruction::LiteralText("ok".into())]);
    assert_eq!(transform(&s, &doc("<a/>")).unwrap(), b"ok");
}

#[test]
fn builtin_rules_copy_text() {
    let s = sheet(r#"<xsl:output method="text"/>"#);
    for src in [SETUP, DEFN, ATWD_OK, RESULT_OK] {
        let d = doc(src);
        let out = String::from_utf8(transform(&s, &d).unwrap()).unwrap();
        let view = DocView::new(&d);
        assert_eq!(out, view.string_value(view.root()));
    }
    let out = String::from_utf8(transform(&s, &doc(SETUP)).unwrap()).unwrap();
    assert!(out.contains("oranges") && out.contains("54"));
}

#[test]
fn newline_variable() {
    let s = sheet(
        r#"<xsl:output method="text"/>
           <xsl:variable name="nl">
<xsl:text>
</xsl:text>
           </xsl:variable>
           <xsl:template match="/"><xsl:copy-of select="$nl"/></xsl:template>"#,
    );
    assert_eq!(transform(&s, &doc(SETUP)).unwrap(), b"\n");
}

#[test]
fn unsupported_instructions() {
    for body in [
        r#"<xsl:template match="/"><xsl:for-each select="a"/></xsl:template>"#,
        r#"<xsl:template match="/"><out/></xsl:template>"#,
        r#"<xsl:template match="/"><xsl:value-of select="a"/></xsl:template>"#,
        r#"<xsl:key name="k"/>"#,
        r#"<xsl:template name="n"/>"#,
    ] {
        let src =
            format!(r#"<xsl:stylesheet xmlns:xsl="http://www.w3.org/1999/XSL/Transform">{body}</xsl:stylesheet>"#);
        let err = load_stylesheet(&doc(&src)).unwrap_err();
        assert!(matches!(err, XsltError::UnsupportedInstruction { .. }), "{body}: {err}");
    }
}

#[test]
fn variables_must_be_declared() {
    let src = r#"<xsl:stylesheet xmlns:xsl="http://www.w3.org/1999/XSL/Transform">
        <xsl:template match="/"><xsl:copy-of select="$missing"/></xsl:template></xsl:stylesheet>"#;
    assert!(matches!(
        load_stylesheet(&doc(src)).unwrap_err(),
        XsltError::UndeclaredVariable { .. }
    ));
    // a local from another template is out of scope
    let src = r#"<xsl:stylesheet xmlns:xsl="http://www.w3.org/1999/XSL/Transform">
        <xsl:template match="a"><xsl:variable name="v" select="."/></xsl:template>
        <xsl:template match="b"><xsl:copy-of select="$v"/></xsl:template></xsl:stylesheet>"#;
    assert!(load_stylesheet(&doc(src)).is_err());
    let src = r#"<xsl:stylesheet xmlns:xsl="http://www.w3.org/1999/XSL/Transform">
        <xsl:variable name="v" select="1"/><xsl:variable name="v" select="2"/></xsl:stylesheet>"#;
    assert!(matches!(
        load_stylesheet(&doc(src)).unwrap_err(),
        XsltError::Invalid { .. }
    ));
}

#[test]
fn specificity_and_last_wins() {
    let s = sheet(
        r#"<xsl:output method="text"/>
           <xsl:template match="*">[any]<xsl:apply-templates select="*"/></xsl:template>
           <xsl:template match="r/b">[rb]</xsl:template>
           <xsl:template match="b">[b1]</xsl:template>
           <xsl:template match="b">[b2]</xsl:template>"#,
    );
    let trace = transform_traced(&s, &doc("<r><b/><q><b/></q></r>")).unwrap();
    assert_eq!(String::from_utf8(trace.output).unwrap(), "[any][rb][any][b2]");
    assert_eq!(trace.warnings.len(), 1);
    assert_eq!(trace.warnings[0].rules, vec![2, 3]);
}

#[test]
fn runaway_recursion_is_an_error() {
    let s = sheet(r#"<xsl:template match="/"><xsl:apply-templates select="/"/></xsl:template>"#);
    assert!(matches!(transform(&s, &doc("<a/>")), Err(XsltError::Evaluation(_))));
}

#[test]
fn entry_local_templates_run_when_invoked() {
    let s = load_stylesheet(&doc(XSL)).unwrap();
    let mut driver = s.clone();
    // swap the default-mode test rule for one that enters EntryLocal
    let probe = sheet(
        r#"<xsl:template match="stf:test"><xsl:apply-templates mode="EntryLocal" select="outputParameter"/></xsl:template>"#,
    );
    driver.templates[1] = probe.templates[0].clone();
    let out = String::from_utf8(transform(&driver, &doc(DEFN)).unwrap()).unwrap();
    assert_eq!(
        out,
        "                   &getParamByName(d, \"fufilled\")->value.Value,\n                   &getParamByName(d, \"numberRemaining\")->value.Value);\n"
    );
}

#[test]
fn xml_output_escapes_and_copies_markup() {
    let s = sheet(r#"<xsl:template match="/">a&lt;b<xsl:copy-of select="r"/></xsl:template>"#);
    let out = String::from_utf8(transform(&s, &doc("<r x=\"1\"><c>t</c></r>")).unwrap()).unwrap();
    assert_eq!(out, "a&lt;b<r x=\"1\"><c>t</c></r>");
}
