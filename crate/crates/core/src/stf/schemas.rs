use super::{ModuleDefn, Parameter, STF_NS};
use crate::schema::{load_schema, validate, ValidationReport, XS_NS};
use crate::xml::{indent, Node, QName, XmlDocument, XmlElement};

fn xs(local: &str) -> XmlElement {
    XmlElement::new(QName::prefixed("xs", XS_NS, local))
}

fn attr(e: XmlElement, name: &str, value: impl Into<String>) -> XmlElement {
    e.with_attribute(QName::local(name), value)
}

fn element(name: &str) -> XmlElement {
    attr(xs("element"), "name", name)
}

fn sequence_of(e: XmlElement, particles: Vec<XmlElement>) -> XmlElement {
    let mut seq = xs("sequence");
    for p in particles {
        seq.push_element(p);
    }
    e.with_child(xs("complexType").with_child(seq))
}

fn schema_document(root: &str, module: XmlElement) -> XmlDocument {
    let mut schema = attr(xs("schema"), "targetNamespace", STF_NS)
        .with_namespace("stf", STF_NS)
        .with_namespace("xs", XS_NS)
        .with_child(sequence_of(element(root), vec![module]));
    indent(&mut schema);
    XmlDocument::new(schema)
}

/// Declaration of one parameter element. Bounds become an inline
/// restriction; `with_default` makes defaulted parameters optional.
fn parameter(p: &Parameter, with_default: bool) -> XmlElement {
    let mut e = element(&p.name);
    let builtin = format!("xs:{}", p.kind.name());
    if with_default {
        if let Some(d) = &p.default {
            e = attr(attr(e, "default", d.to_string()), "minOccurs", "0");
        }
    }
    if p.min_value.is_none() && p.max_value.is_none() {
        return attr(e, "type", builtin);
    }
    let mut restriction = attr(xs("restriction"), "base", builtin);
    if let Some(v) = p.min_value {
        restriction.push_element(attr(xs("minInclusive"), "value", v.to_string()));
    }
    if let Some(v) = p.max_value {
        restriction.push_element(attr(xs("maxInclusive"), "value", v.to_string()));
    }
    e.with_child(xs("simpleType").with_child(restriction))
}

/// Schema for setup documents: `stf:setup`, then an element named after
/// the module, holding `parameters` with one element per input.
pub fn gen_setup_schema(defn: &ModuleDefn) -> XmlDocument {
    let params = defn.input_params.iter().map(|p| parameter(p, true)).collect();
    let module = sequence_of(element(&defn.name), vec![sequence_of(element("parameters"), params)]);
    schema_document("setup", module)
}

/// Schema for result documents: description, version, then every input
/// echoed, every output and the fixed trailer.
pub fn gen_result_schema(defn: &ModuleDefn) -> XmlDocument {
    let mut params: Vec<XmlElement> = defn.parameters().map(|(p, _)| parameter(p, false)).collect();
    params.push(attr(element("passed"), "type", "xs:boolean"));
    params.push(attr(element("testRunnable"), "type", "xs:boolean"));
    params.push(attr(element("boardID"), "type", "xs:string"));

    let version_attr = |name: &str| {
        attr(
            attr(attr(xs("attribute"), "name", name), "type", "xs:nonNegativeInteger"),
            "use",
            "required",
        )
    };
    let version = element("version").with_child(
        xs("complexType")
            .with_child(version_attr("major"))
            .with_child(version_attr("minor")),
    );
    let module = sequence_of(
        element(&defn.name),
        vec![
            attr(element("description"), "type", "xs:string"),
            version,
            sequence_of(element("parameters"), params),
        ],
    );
    schema_document("result", module)
}

fn check(schema_doc: &XmlDocument, doc: &XmlDocument) -> ValidationReport {
    let schema = load_schema(schema_doc).expect("generated schemas stay inside the supported subset");
    validate(&schema, doc)
}

pub fn check_setup(defn: &ModuleDefn, doc: &XmlDocument) -> ValidationReport {
    check(&gen_setup_schema(defn), doc)
}

pub fn check_result(defn: &ModuleDefn, doc: &XmlDocument) -> ValidationReport {
    check(&gen_result_schema(defn), doc)
}

/// Copy of a valid setup document with every omitted defaulted input
/// written out, in declaration order. The copy is re-indented.
pub fn complete_setup(defn: &ModuleDefn, doc: &XmlDocument) -> XmlDocument {
    let mut out = doc.clone();
    let Some(params) = out
        .root
        .elements_mut()
        .find(|e| e.name.local_name == defn.name)
        .and_then(|m| m.elements_mut().find(|e| e.name.local_name == "parameters"))
    else {
        return out;
    };
    let mut existing: Vec<XmlElement> = params.elements().cloned().collect();
    let mut children = Vec::new();
    for p in &defn.input_params {
        if let Some(i) = existing.iter().position(|e| e.name.local_name == p.name) {
            children.push(Node::Element(existing.remove(i)));
        } else if let Some(d) = &p.default {
            let e = XmlElement::new(QName::local(p.name.clone())).with_text(&d.to_string());
            children.push(Node::Element(e));
        }
    }
    children.extend(existing.into_iter().map(Node::Element));
    params.children = children;
    indent(&mut out.root);
    out
}
