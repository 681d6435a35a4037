//! Property suites shared by the `properties` and `acceptance` targets.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use proptest::prelude::*;
use proptest::test_runner::TestRunner;
use stfxml::databind::{derive_bindings, marshal, unmarshal};
use stfxml::schema::{load_schema, validate, Value, ViolationKind};
use stfxml::stf::{
    check_result, check_setup, gen_header, gen_header_direct, gen_result_schema, gen_setup_schema, load_defn,
    ModuleDefn, ParamKind, Parameter, Version, STF_NS,
};
use stfxml::xml::{
    parse_stream, parse_tree, serialize, NamespaceMap, ParseEvent, QName, TreeBuilder, XmlDocument, XmlElement,
};
use stfxml::xpath::{compile_expr, evaluate, match_pattern, DocView, EvalContext, NodeId};

/// Declares `pub fn $name(cases) -> Result<(), String>` running the body
/// over `$strategy`, with shrinking on failure.
macro_rules! property {
    ($name:ident, $strategy:expr, |$arg:pat_param| $body:block) => {
        pub fn $name(cases: u32) -> Result<(), String> {
            let mut runner = TestRunner::new(ProptestConfig {
                cases,
                failure_persistence: None,
                ..ProptestConfig::default()
            });
            runner
                .run(&$strategy, |$arg| {
                    $body
                    #[allow(unreachable_code)]
                    Ok(())
                })
                .map_err(|e| e.to_string())
        }
    };
}

// ---- random documents ----

#[derive(Clone, Debug)]
enum Tree {
    Text(String),
    Element {
        name: &'static str,
        attrs: Vec<(&'static str, String)>,
        children: Vec<Tree>,
    },
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn text() -> impl Strategy<Value = String> {
    "[ab <>&\"'\n]{1,6}"
}

fn tree() -> impl Strategy<Value = Tree> {
    let name = prop::sample::select(vec!["a", "b", "c", "p:a", "p:c"]);
    let attrs = prop::collection::btree_map(prop::sample::select(vec!["x", "y", "p:x"]), text(), 0..3)
        .prop_map(|m| m.into_iter().collect::<Vec<_>>())
        .boxed();
    let leaf = (name.clone(), attrs.clone()).prop_map(|(name, attrs)| Tree::Element {
        name,
        attrs,
        children: vec![],
    });
    leaf.prop_recursive(4, 40, 4, move |inner| {
        let child = prop_oneof![1 => text().prop_map(Tree::Text), 3 => inner];
        (name.clone(), attrs.clone(), prop::collection::vec(child, 0..4)).prop_map(|(name, attrs, children)| {
            // adjacent text would merge on reparse
            let mut merged: Vec<Tree> = Vec::new();
            for c in children {
                if let (Some(Tree::Text(prev)), Tree::Text(t)) = (merged.last_mut(), &c) {
                    prev.push_str(t);
                } else {
                    merged.push(c);
                }
            }
            Tree::Element {
                name,
                attrs,
                children: merged,
            }
        })
    })
}

fn render(t: &Tree, root: bool, out: &mut String) {
    match t {
        Tree::Text(s) => out.push_str(&escape(s)),
        Tree::Element { name, attrs, children } => {
            out.push('<');
            out.push_str(name);
            if root {
                out.push_str(" xmlns:p=\"urn:p\"");
            }
            for (k, v) in attrs {
                out.push_str(&format!(" {k}=\"{}\"", escape(v)));
            }
            if children.is_empty() {
                out.push_str("/>");
                return;
            }
            out.push('>');
            for c in children {
                render(c, false, out);
            }
            out.push_str(&format!("</{name}>"));
        }
    }
}

fn document() -> impl Strategy<Value = String> {
    tree()
        .prop_filter("root must be an element", |t| matches!(t, Tree::Element { .. }))
        .prop_map(|t| {
            let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
            render(&t, true, &mut s);
            s
        })
}

property!(serialize_then_parse_is_identity, document(), |src| {
    let d = parse_tree(src.as_bytes()).unwrap();
    prop_assert_eq!(parse_tree(&serialize(&d)).unwrap(), d);
});

property!(stream_replay_equals_tree, document(), |src| {
    let mut builder = TreeBuilder::default();
    parse_stream(src.as_bytes(), &mut |e: ParseEvent| {
        builder.push(e);
        ControlFlow::Continue(())
    })
    .unwrap();
    prop_assert_eq!(
        XmlDocument::new(builder.finish().unwrap()),
        parse_tree(src.as_bytes()).unwrap()
    );
});

// Truncating a document anywhere inside its root element must fail in
// both modes, with the same category and line.
property!(
    truncation_fails_identically,
    (document(), any::<prop::sample::Index>()),
    |(src, cut)| {
        let start = src.find("\n<").unwrap() + 2;
        let at = start + cut.index(src.len() - start);
        if !src.is_char_boundary(at) {
            return Ok(());
        }
        let prefix = &src[..at];
        let tree = parse_tree(prefix.as_bytes()).unwrap_err();
        let stream = parse_stream(prefix.as_bytes(), &mut |_: ParseEvent| ControlFlow::Continue(())).unwrap_err();
        prop_assert_eq!((tree.kind, tree.line), (stream.kind, stream.line));
    }
);

// ---- patterns versus evaluation ----

fn pattern() -> impl Strategy<Value = String> {
    let step = prop::sample::select(vec!["a", "b", "c", "*", "p:a"]);
    let branch = (
        any::<bool>(),
        prop::collection::vec(step, 1..4),
        prop::sample::select(vec!["", "/@x", "/@*", "/@p:x"]),
    )
        .prop_map(|(absolute, steps, attr)| format!("{}{}{attr}", if absolute { "/" } else { "" }, steps.join("/")));
    prop_oneof![
        4 => prop::collection::vec(branch, 1..3).prop_map(|b| b.join(" | ")),
        1 => Just("/".to_string()),
    ]
}

/// A node matches when some ancestor (or the root) selects it by plain
/// evaluation.
fn oracle_matches(pattern: &str, view: &DocView<'_>, node: NodeId, ns: &NamespaceMap) -> bool {
    let expr = compile_expr(pattern, ns).unwrap();
    let mut context = Some(node);
    while let Some(c) = context {
        let hit = evaluate(&expr, &EvalContext::new(view, c))
            .unwrap()
            .into_nodes()
            .unwrap()
            .contains(&node);
        if hit {
            return true;
        }
        context = view.parent(c);
    }
    false
}

property!(patterns_agree_with_evaluation, (document(), pattern()), |(src, pat)| {
    let d = parse_tree(src.as_bytes()).unwrap();
    let view = DocView::new(&d);
    let mut ns = NamespaceMap::new();
    ns.insert("p".into(), "urn:p".into());
    let expr = compile_expr(&pat, &ns).unwrap();
    for node in view.all_nodes() {
        prop_assert_eq!(
            match_pattern(&expr, &view, node).unwrap(),
            oracle_matches(&pat, &view, node, &ns),
            "{} at {}",
            pat,
            view.path(node)
        );
    }
});

// ---- unique constraints versus pairwise comparison ----

const GROUPS_XSD: &str = r#"<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema">
  <xs:element name="r">
    <xs:complexType>
      <xs:sequence>
        <xs:element name="g" minOccurs="0" maxOccurs="unbounded">
          <xs:complexType>
            <xs:sequence>
              <xs:element name="i" minOccurs="0" maxOccurs="unbounded">
                <xs:complexType>
                  <xs:attribute name="k" type="xs:string"/>
                </xs:complexType>
              </xs:element>
            </xs:sequence>
          </xs:complexType>
          <xs:unique name="Keys">
            <xs:selector xpath="i"/>
            <xs:field xpath="@k"/>
          </xs:unique>
        </xs:element>
      </xs:sequence>
    </xs:complexType>
  </xs:element>
</xs:schema>"#;

fn groups() -> impl Strategy<Value = Vec<Vec<Option<&'static str>>>> {
    let key = prop::option::weighted(0.8, prop::sample::select(vec!["a", "b", " a ", "c", "a b", "a  b"]));
    prop::collection::vec(prop::collection::vec(key, 0..6), 0..4)
}

property!(unique_matches_pairwise_check, groups(), |gs| {
    let schema = load_schema(&parse_tree(GROUPS_XSD.as_bytes()).unwrap()).unwrap();
    let mut src = String::from("<r>");
    let mut expected = BTreeSet::new();
    for (gi, g) in gs.iter().enumerate() {
        src.push_str("<g>");
        for (ii, k) in g.iter().enumerate() {
            match k {
                Some(k) => src.push_str(&format!("<i k=\"{k}\"/>")),
                None => src.push_str("<i/>"),
            }
            let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
            if let Some(k) = k {
                if g[..ii].iter().flatten().any(|earlier| norm(earlier) == norm(k)) {
                    expected.insert(format!("/r[1]/g[{}]/i[{}]/@k", gi + 1, ii + 1));
                }
            }
        }
        src.push_str("</g>");
    }
    src.push_str("</r>");
    let report = validate(&schema, &parse_tree(src.as_bytes()).unwrap());
    let got: BTreeSet<String> = report.of_kind(ViolationKind::Unique).map(|v| v.path.clone()).collect();
    prop_assert_eq!(report.violations.len(), got.len());
    prop_assert_eq!(got, expected);
});

// ---- binding round trip ----

fn readout() -> impl Strategy<Value = String> {
    let channel = (
        prop::collection::vec(any::<u16>(), 48),
        prop::option::of(prop::sample::select(vec![8u8, 16])),
    );
    let atwd = (any::<bool>(), channel.clone(), channel);
    prop::collection::vec(atwd, 1..3).prop_map(|atwds| {
        let mut s = String::from(r#"<daq:AtwdReadout xmlns:daq="http://glacier.lbl.gov/icecube/daq/example">"#);
        for (swap, c0, c1) in atwds {
            s.push_str("<Atwd>");
            let mut chans = [(0, c0), (1, c1)];
            if swap {
                chans.swap(0, 1);
            }
            for (n, (values, bits)) in chans {
                let bits = bits.map(|b| format!(" bitsPerSample=\"{b}\"")).unwrap_or_default();
                let values: Vec<String> = values.iter().map(u16::to_string).collect();
                s.push_str(&format!("<Channel number=\"{n}\"{bits}>{}</Channel>", values.join(" ")));
            }
            s.push_str("</Atwd>");
        }
        s.push_str("</daq:AtwdReadout>");
        s
    })
}

property!(marshal_then_unmarshal_is_identity, readout(), |src| {
    let schema = load_schema(&parse_tree(super::ATWD_XSD.as_bytes()).unwrap()).unwrap();
    let model = derive_bindings(&schema);
    let typed = unmarshal(&model, &parse_tree(src.as_bytes()).unwrap()).unwrap();
    let written = marshal(&model, &typed).unwrap();
    prop_assert!(validate(&schema, &written).is_valid());
    let reparsed = parse_tree(&serialize(&written)).unwrap();
    prop_assert_eq!(unmarshal(&model, &reparsed).unwrap(), typed);
});

// ---- module definitions ----

fn parameter(name: String) -> impl Strategy<Value = Parameter> {
    let kind = prop::sample::select(vec![
        ParamKind::Boolean,
        ParamKind::String,
        ParamKind::UnsignedInt,
        ParamKind::UnsignedLong,
    ]);
    (
        kind,
        any::<u64>(),
        any::<u64>(),
        any::<u64>(),
        any::<[bool; 3]>(),
        "[a-z]{0,5}",
    )
        .prop_map(move |(kind, a, b, c, [has_min, has_max, has_default], s)| {
            let mut p = Parameter::new(&name, kind);
            match kind {
                ParamKind::Boolean => p.default = has_default.then_some(Value::Boolean(a % 2 == 0)),
                ParamKind::String => p.default = has_default.then_some(Value::String(s)),
                ParamKind::UnsignedInt | ParamKind::UnsignedLong => {
                    let cap = if kind == ParamKind::UnsignedInt {
                        u32::MAX as u64
                    } else {
                        u64::MAX
                    };
                    let fit = |x: u64| x.checked_rem(cap.wrapping_add(1)).unwrap_or(x);
                    let mut v = [fit(a), fit(b), fit(c)];
                    v.sort();
                    p.min_value = has_min.then_some(v[0] as i128);
                    p.max_value = has_max.then_some(v[2] as i128);
                    p.default = has_default.then_some(Value::Integer(v[1] as i128));
                }
            }
            p
        })
}

fn defn() -> impl Strategy<Value = ModuleDefn> {
    let names = prop::collection::btree_set("[a-z][a-zA-Z0-9_]{0,6}", 1..7)
        .prop_map(|s| {
            s.into_iter()
                .filter(|n| !["passed", "testRunnable", "boardID"].contains(&n.as_str()))
                .collect::<Vec<_>>()
        })
        .prop_filter("need a parameter", |v| !v.is_empty());
    (
        names,
        any::<prop::sample::Index>(),
        "[A-Z][A-Za-z0-9]{0,8}",
        0u64..5,
        0u64..20,
    )
        .prop_flat_map(|(names, split, module, major, minor)| {
            let split = split.index(names.len() + 1);
            let params: Vec<_> = names.into_iter().map(parameter).collect();
            (params, Just(split), Just(module), Just(Version { major, minor }))
        })
        .prop_map(|(params, split, name, version)| {
            let mut input_params = params;
            let mut output_params = input_params.split_off(split);
            for p in &mut output_params {
                p.default = None;
            }
            ModuleDefn {
                name,
                description: "Generated module".into(),
                version,
                input_params,
                output_params,
            }
        })
}

/// A value every bound on `p` accepts.
fn sample_value(p: &Parameter) -> String {
    if let Some(d) = &p.default {
        return d.to_string();
    }
    if let Some(v) = p.min_value.or(p.max_value) {
        return v.to_string();
    }
    match p.kind {
        ParamKind::Boolean => "false".into(),
        ParamKind::String => "text".into(),
        _ => "7".into(),
    }
}

fn instance(defn: &ModuleDefn, root: &str, params: Vec<(&str, String)>, head: Vec<XmlElement>) -> XmlDocument {
    let mut list = XmlElement::new(QName::local("parameters"));
    for (name, value) in params {
        list.push_element(XmlElement::new(QName::local(name)).with_text(&value));
    }
    let mut module = XmlElement::new(QName::local(defn.name.clone()));
    for e in head {
        module.push_element(e);
    }
    module.push_element(list);
    let root = XmlElement::new(QName::prefixed("stf", STF_NS, root))
        .with_namespace("stf", STF_NS)
        .with_child(module);
    parse_tree(&serialize(&XmlDocument::new(root))).unwrap()
}

property!(definitions_round_trip, defn(), |d| {
    prop_assert_eq!(d.check(), Ok(()));
    let reparsed = parse_tree(&serialize(&d.to_document())).unwrap();
    prop_assert_eq!(load_defn(&reparsed).unwrap(), d);
});

property!(generated_schemas_accept_conforming_documents, defn(), |d| {
    prop_assert!(load_schema(&gen_setup_schema(&d)).is_ok());
    prop_assert!(load_schema(&gen_result_schema(&d)).is_ok());

    // setup: only the inputs without defaults are required
    let required: Vec<(&str, String)> = d
        .input_params
        .iter()
        .filter(|p| p.default.is_none())
        .map(|p| (p.name.as_str(), sample_value(p)))
        .collect();
    let report = check_setup(&d, &instance(&d, "setup", required, vec![]));
    prop_assert!(report.is_valid(), "{}", report);

    let mut values: Vec<(&str, String)> = d
        .parameters()
        .map(|(p, _)| (p.name.as_str(), sample_value(p)))
        .collect();
    values.push(("passed", "true".into()));
    values.push(("testRunnable", "true".into()));
    values.push(("boardID", "sim".into()));
    let head = vec![
        XmlElement::new(QName::local("description")).with_text(&d.description),
        XmlElement::new(QName::local("version"))
            .with_attribute(QName::local("major"), d.version.major.to_string())
            .with_attribute(QName::local("minor"), d.version.minor.to_string()),
    ];
    let report = check_result(&d, &instance(&d, "result", values.clone(), head.clone()));
    prop_assert!(report.is_valid(), "{}", report);

    // dropping the trailer is always caught
    values.pop();
    prop_assert!(!check_result(&d, &instance(&d, "result", values, head)).is_valid());
});

property!(transform_header_matches_direct_rendering, defn(), |d| {
    prop_assert_eq!(gen_header(&d), gen_header_direct(&d));
});

pub type Suite = fn(u32) -> Result<(), String>;

pub const SUITES: [(&str, Suite); 9] = [
    ("parse/serialize round trip", serialize_then_parse_is_identity),
    ("stream and tree parses agree", stream_replay_equals_tree),
    (
        "truncated input fails alike in both parsers",
        truncation_fails_identically,
    ),
    (
        "patterns agree with a brute-force context search",
        patterns_agree_with_evaluation,
    ),
    (
        "unique reports match pairwise duplicate search",
        unique_matches_pairwise_check,
    ),
    (
        "unmarshal after marshal is identity",
        marshal_then_unmarshal_is_identity,
    ),
    ("definitions survive serialization", definitions_round_trip),
    (
        "generated schemas load and accept synthesized documents",
        generated_schemas_accept_conforming_documents,
    ),
    (
        "transformed header equals direct rendering",
        transform_header_matches_direct_rendering,
    ),
];
