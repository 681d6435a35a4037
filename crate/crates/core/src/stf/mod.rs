//! The Simple Test Framework toolchain.
//!
//! A module definition ([`ModuleDefn`]) drives three generators: the C header
//! for the module's entry points, and the schemas for its setup and result
//! documents.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::schema::{collapse_whitespace, load_schema, validate, BuiltinKind, Schema, ValidationReport, Value};
use crate::xml::{parse_tree, QName, XmlDocument, XmlElement};

mod codegen;
mod schemas;

pub use codegen::{gen_header, gen_header_direct, header_stylesheet};
pub use schemas::{check_result, check_setup, complete_setup, gen_result_schema, gen_setup_schema};

pub const STF_NS: &str = "http://glacier.lbl.gov/icecube/daq/stf";

/// Source of the definition schema.
pub const DEFN_SCHEMA: &str = include_str!("../../assets/stfDefn.xsd");

/// Names the result trailer uses, unavailable to parameters.
pub const RESERVED_NAMES: [&str; 3] = ["passed", "testRunnable", "boardID"];

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DefnError {
    #[error("definition does not match the definition schema:\n{0}")]
    Invalid(ValidationReport),
    #[error("line {line}: {message}")]
    Semantic { message: String, line: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParamKind {
    Boolean,
    String,
    UnsignedInt,
    UnsignedLong,
}

impl ParamKind {
    pub const ALL: [ParamKind; 4] = [
        ParamKind::Boolean,
        ParamKind::String,
        ParamKind::UnsignedInt,
        ParamKind::UnsignedLong,
    ];

    /// Element name in definitions, also the schema type's local name.
    pub fn name(self) -> &'static str {
        self.builtin().name()
    }

    pub fn builtin(self) -> BuiltinKind {
        match self {
            ParamKind::Boolean => BuiltinKind::Boolean,
            ParamKind::String => BuiltinKind::String,
            ParamKind::UnsignedInt => BuiltinKind::UnsignedInt,
            ParamKind::UnsignedLong => BuiltinKind::UnsignedLong,
        }
    }

    pub fn from_name(name: &str) -> Option<ParamKind> {
        ParamKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, ParamKind::UnsignedInt | ParamKind::UnsignedLong)
    }

    /// C type used in entry signatures, before any output modifier.
    pub fn c_type(self, output: bool) -> &'static str {
        match (self, output) {
            (ParamKind::Boolean, _) => "BOOLEAN",
            (ParamKind::String, false) => "const char*",
            (ParamKind::String, true) => "char*",
            (ParamKind::UnsignedInt, _) => "unsigned int",
            (ParamKind::UnsignedLong, _) => "unsigned long",
        }
    }
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub kind: ParamKind,
    pub default: Option<Value>,
    pub min_value: Option<i128>,
    pub max_value: Option<i128>,
}

impl Parameter {
    pub fn new(name: &str, kind: ParamKind) -> Self {
        Parameter {
            name: name.to_string(),
            kind,
            default: None,
            min_value: None,
            max_value: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Version {
    pub major: u64,
    pub minor: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModuleDefn {
    pub name: String,
    pub description: String,
    pub version: Version,
    pub input_params: Vec<Parameter>,
    pub output_params: Vec<Parameter>,
}

impl ModuleDefn {
    /// Inputs then outputs, each paired with whether it is an output.
    pub fn parameters(&self) -> impl Iterator<Item = (&Parameter, bool)> {
        self.input_params
            .iter()
            .map(|p| (p, false))
            .chain(self.output_params.iter().map(|p| (p, true)))
    }

    /// Checks the invariants [`load_defn`] enforces on parsed input.
    pub fn check(&self) -> Result<(), String> {
        if !is_c_identifier(&self.name) {
            return Err(format!("module name \"{}\" is not a C identifier", self.name));
        }
        if self.input_params.is_empty() && self.output_params.is_empty() {
            return Err("a module needs at least one parameter".into());
        }
        let mut seen: Vec<&str> = Vec::new();
        for (p, output) in self.parameters() {
            check_parameter(p, output)?;
            if seen.contains(&p.name.as_str()) {
                return Err(format!("parameter name \"{}\" is used twice", p.name));
            }
            seen.push(&p.name);
        }
        Ok(())
    }

    /// The definition as a document in the definition vocabulary.
    pub fn to_document(&self) -> XmlDocument {
        let q = |n: &str| QName::local(n);
        let mut root = XmlElement::new(QName::prefixed("stf", STF_NS, "test"))
            .with_namespace("stf", STF_NS)
            .with_child(XmlElement::new(q("name")).with_text(&self.name))
            .with_child(XmlElement::new(q("description")).with_text(&self.description))
            .with_child(
                XmlElement::new(q("version"))
                    .with_attribute(q("major"), self.version.major.to_string())
                    .with_attribute(q("minor"), self.version.minor.to_string()),
            );
        for (p, output) in self.parameters() {
            let mut payload = XmlElement::new(q(p.kind.name()));
            if let Some(d) = &p.default {
                payload = payload.with_attribute(q("default"), d.to_string());
            }
            if let Some(v) = p.max_value {
                payload = payload.with_attribute(q("maxValue"), v.to_string());
            }
            if let Some(v) = p.min_value {
                payload = payload.with_attribute(q("minValue"), v.to_string());
            }
            let tag = if output { "outputParameter" } else { "inputParameter" };
            root.push_element(
                XmlElement::new(q(tag))
                    .with_child(XmlElement::new(q("name")).with_text(&p.name))
                    .with_child(payload),
            );
        }
        crate::xml::indent(&mut root);
        XmlDocument::new(root)
    }
}

fn check_parameter(p: &Parameter, output: bool) -> Result<(), String> {
    if !is_c_identifier(&p.name) {
        return Err(format!("parameter name \"{}\" is not a C identifier", p.name));
    }
    if RESERVED_NAMES.contains(&p.name.as_str()) {
        return Err(format!(
            "parameter name \"{}\" is reserved for result documents",
            p.name
        ));
    }
    if output && p.default.is_some() {
        return Err(format!("output parameter \"{}\" cannot have a default", p.name));
    }
    if !p.kind.is_numeric() && (p.min_value.is_some() || p.max_value.is_some()) {
        return Err(format!("{} parameter \"{}\" cannot have bounds", p.kind, p.name));
    }
    let max = p.kind.builtin().max_value().unwrap_or(i128::MAX);
    for bound in [p.min_value, p.max_value].into_iter().flatten() {
        if !(0..=max).contains(&bound) {
            return Err(format!("bound {bound} is outside the {} range", p.kind));
        }
    }
    if let (Some(lo), Some(hi)) = (p.min_value, p.max_value) {
        if lo > hi {
            return Err(format!(
                "parameter \"{}\" has minValue {lo} above maxValue {hi}",
                p.name
            ));
        }
    }
    if let Some(d) = &p.default {
        let lexical = d.to_string();
        let parsed = p
            .kind
            .builtin()
            .parse(&lexical)
            .map_err(|m| format!("default of \"{}\": {m}", p.name))?;
        if parsed != *d {
            return Err(format!("default of \"{}\" is not a {} value", p.name, p.kind));
        }
        if let Some(v) = d.as_integer() {
            if p.min_value.is_some_and(|lo| v < lo) || p.max_value.is_some_and(|hi| v > hi) {
                return Err(format!(
                    "default {v} of \"{}\" lies outside [{}, {}]",
                    p.name,
                    p.min_value.map_or("-".into(), |x| x.to_string()),
                    p.max_value.map_or("-".into(), |x| x.to_string())
                ));
            }
        }
    }
    Ok(())
}

pub fn is_c_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c == '_' || c.is_ascii_alphabetic())
        && chars.all(|c| c == '_' || c.is_ascii_alphanumeric())
}

/// The compiled definition schema.
pub fn defn_schema() -> &'static Schema {
    static SCHEMA: OnceLock<Schema> = OnceLock::new();
    SCHEMA.get_or_init(|| {
        let doc = parse_tree(DEFN_SCHEMA.as_bytes()).expect("bundled schema is well-formed");
        load_schema(&doc).expect("bundled schema compiles")
    })
}

/// Validates a definition document and reads it into a [`ModuleDefn`].
pub fn load_defn(doc: &XmlDocument) -> Result<ModuleDefn, DefnError> {
    let report = validate(defn_schema(), doc);
    if !report.is_valid() {
        return Err(DefnError::Invalid(report));
    }
    let root = &doc.root;
    let semantic = |message: String, e: &XmlElement| DefnError::Semantic {
        message,
        line: e.source_line,
    };
    let text = |name: &str| {
        root.child(name)
            .map(|e| collapse_whitespace(&e.string_value()))
            .unwrap_or_default()
    };
    let version_el = root.child("version").expect("schema requires version");
    let number = |attr: &str| -> Result<u64, DefnError> {
        let raw = version_el.attribute(attr).expect("schema requires it");
        collapse_whitespace(raw)
            .parse()
            .map_err(|_| semantic(format!("version {attr} \"{raw}\" is too large"), version_el))
    };
    let mut defn = ModuleDefn {
        name: text("name"),
        description: text("description"),
        version: Version {
            major: number("major")?,
            minor: number("minor")?,
        },
        input_params: Vec::new(),
        output_params: Vec::new(),
    };
    for e in root.elements() {
        let output = match e.name.local_name.as_str() {
            "inputParameter" => false,
            "outputParameter" => true,
            _ => continue,
        };
        let param = read_parameter(e).map_err(|m| semantic(m, e))?;
        check_parameter(&param, output).map_err(|m| semantic(m, e))?;
        if output {
            defn.output_params.push(param);
        } else {
            defn.input_params.push(param);
        }
    }
    defn.check().map_err(|m| semantic(m, root))?;
    Ok(defn)
}

fn read_parameter(e: &XmlElement) -> Result<Parameter, String> {
    let name = collapse_whitespace(&e.child("name").expect("schema requires name").string_value());
    let payloads: Vec<&XmlElement> = e.elements().filter(|c| c.name.local_name != "name").collect();
    let payload = match payloads.as_slice() {
        [one] => *one,
        [] => return Err(format!("parameter \"{name}\" has no type element")),
        _ => return Err(format!("parameter \"{name}\" has more than one type element")),
    };
    let kind = ParamKind::from_name(&payload.name.local_name).expect("schema limits payload names");
    let builtin = kind.builtin();
    let integer = |attr: &str| -> Option<i128> {
        payload.attribute(attr).map(|v| {
            builtin
                .parse(v)
                .expect("schema checked")
                .as_integer()
                .expect("numeric kind")
        })
    };
    Ok(Parameter {
        name,
        kind,
        default: payload
            .attribute("default")
            .map(|v| builtin.parse(v).expect("schema checked")),
        min_value: integer("minValue"),
        max_value: integer("maxValue"),
    })
}
