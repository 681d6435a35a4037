//! Schema-driven data binding without generated code.
//!
//! [`derive_bindings`] turns a compiled schema into record descriptors.
//! [`unmarshal`] reads a valid document into a [`TypedValue`] and
//! [`marshal`] writes one back out.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::schema::validate::match_sequence;
use crate::schema::{
    apply_defaults, validate, BuiltinKind, ElementDecl, Schema, SimpleValue, TypeId, ValidationReport, Value, Variety,
};
use crate::xml::{indent, QName, XmlDocument, XmlElement};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum BindingError {
    #[error("document is not valid:\n{0}")]
    Invalid(ValidationReport),
    #[error("value does not fit the model: {0}")]
    Shape(String),
    #[error("bad field path \"{path}\": {reason}")]
    Path { path: String, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Scalar(BuiltinKind),
    ListOfScalar(BuiltinKind),
    Record(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldSource {
    Attribute,
    Element,
    /// Text content of a simple or simpleContent element.
    Content,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldDescriptor {
    pub name: String,
    /// Attribute or element local name; empty for content fields.
    pub xml_name: String,
    pub source: FieldSource,
    pub kind: FieldKind,
    pub optional: bool,
    pub repeated: bool,
    pub default: Option<String>,
    type_id: TypeId,
}

impl FieldDescriptor {
    /// Short description such as `repeated Atwd` or `list of unsignedShort`.
    pub fn describe(&self) -> String {
        let base = match &self.kind {
            FieldKind::Scalar(k) => k.to_string(),
            FieldKind::ListOfScalar(k) => format!("list of {k}"),
            FieldKind::Record(r) => r.clone(),
        };
        let mut s = if self.repeated {
            format!("repeated {base}")
        } else {
            base
        };
        if self.source == FieldSource::Attribute {
            s.push_str(" attr");
        }
        if let Some(d) = &self.default {
            write!(s, " default {d}").expect("string write");
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecordDescriptor {
    pub name: String,
    pub fields: Vec<FieldDescriptor>,
    type_id: TypeId,
}

impl RecordDescriptor {
    pub fn field(&self, name: &str) -> Option<&FieldDescriptor> {
        self.fields.iter().find(|f| f.name == name)
    }
}

#[derive(Clone, Debug)]
pub struct BindingModel {
    pub records: BTreeMap<String, RecordDescriptor>,
    /// Global element name to record name.
    pub roots: Vec<(QName, String)>,
    schema: Schema,
}

impl BindingModel {
    pub fn record(&self, name: &str) -> Option<&RecordDescriptor> {
        self.records.get(name)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    fn root_record(&self, element: &QName) -> Option<&RecordDescriptor> {
        self.roots
            .iter()
            .find(|(q, _)| q == element)
            .and_then(|(_, r)| self.records.get(r))
    }
}

/// Typed contents of one record instance. Fields follow descriptor order;
/// absent optional fields are omitted.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub name: String,
    pub fields: Vec<(String, FieldValue)>,
}

impl Record {
    pub fn get(&self, field: &str) -> Option<&FieldValue> {
        self.fields.iter().find(|(n, _)| n == field).map(|(_, v)| v)
    }

    pub fn get_mut(&mut self, field: &str) -> Option<&mut FieldValue> {
        self.fields.iter_mut().find(|(n, _)| n == field).map(|(_, v)| v)
    }

    pub fn set(&mut self, field: &str, value: FieldValue) {
        match self.get_mut(field) {
            Some(slot) => *slot = value,
            None => self.fields.push((field.to_string(), value)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldValue {
    Scalar(Value),
    List(Vec<Value>),
    Record(Record),
    Repeated(Vec<FieldValue>),
}

impl FieldValue {
    pub fn as_record(&self) -> Option<&Record> {
        match self {
            FieldValue::Record(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_repeated(&self) -> Option<&[FieldValue]> {
        match self {
            FieldValue::Repeated(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Value]> {
        match self {
            FieldValue::List(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_scalar(&self) -> Option<&Value> {
        match self {
            FieldValue::Scalar(v) => Some(v),
            _ => None,
        }
    }
}

/// A bound document: its root element and the record it holds.
#[derive(Clone, Debug, PartialEq)]
pub struct TypedValue {
    pub element: QName,
    pub record: Record,
}

impl TypedValue {
    /// Resolves a path such as `atwd[0]/channel[1]/value`. A repeated field
    /// without an index resolves to the whole sequence.
    pub fn lookup(&self, path: &str) -> Result<&FieldValue, BindingError> {
        let fail = |reason: String| BindingError::Path {
            path: path.to_string(),
            reason,
        };
        let mut record = &self.record;
        let segments: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
        if segments.is_empty() {
            return Err(fail("empty path".into()));
        }
        for (i, seg) in segments.iter().enumerate() {
            let (name, index) = match seg.split_once('[') {
                Some((n, rest)) => {
                    let idx = rest
                        .strip_suffix(']')
                        .and_then(|d| d.parse::<usize>().ok())
                        .ok_or_else(|| fail(format!("bad index in \"{seg}\"")))?;
                    (n, Some(idx))
                }
                None => (*seg, None),
            };
            let mut value = record
                .get(name)
                .ok_or_else(|| fail(format!("record {} has no field \"{name}\"", record.name)))?;
            if let Some(idx) = index {
                let items = value
                    .as_repeated()
                    .ok_or_else(|| fail(format!("\"{name}\" is not repeated")))?;
                value = items.get(idx).ok_or_else(|| {
                    fail(format!(
                        "index {idx} out of range, \"{name}\" has {} items",
                        items.len()
                    ))
                })?;
            }
            if i + 1 == segments.len() {
                return Ok(value);
            }
            record = value
                .as_record()
                .ok_or_else(|| fail(format!("\"{seg}\" is not a single record")))?;
        }
        unreachable!("loop returns on the last segment")
    }

    /// Item count of a repeated or list field.
    pub fn count(&self, path: &str) -> Result<usize, BindingError> {
        match self.lookup(path)? {
            FieldValue::Repeated(v) => Ok(v.len()),
            FieldValue::List(v) => Ok(v.len()),
            _ => Err(BindingError::Path {
                path: path.to_string(),
                reason: "not a repeated or list field".into(),
            }),
        }
    }
}

/// Indented `field = value` rendering.
impl fmt::Display for TypedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.record.name)?;
        render_record(f, &self.record, 1)
    }
}

fn render_record(f: &mut fmt::Formatter<'_>, r: &Record, depth: usize) -> fmt::Result {
    for (name, value) in &r.fields {
        render_field(f, name, value, depth)?;
    }
    Ok(())
}

fn render_field(f: &mut fmt::Formatter<'_>, name: &str, value: &FieldValue, depth: usize) -> fmt::Result {
    let pad = "  ".repeat(depth);
    match value {
        FieldValue::Scalar(v) => writeln!(f, "{pad}{name} = {v}"),
        FieldValue::List(items) => writeln!(f, "{pad}{name} = [{}]", join(items)),
        FieldValue::Record(r) => {
            writeln!(f, "{pad}{name} = {}", r.name)?;
            render_record(f, r, depth + 1)
        }
        FieldValue::Repeated(items) => {
            for (i, item) in items.iter().enumerate() {
                render_field(f, &format!("{name}[{i}]"), item, depth)?;
            }
            Ok(())
        }
    }
}

fn join(items: &[Value]) -> String {
    items.iter().map(Value::to_string).collect::<Vec<_>>().join(" ")
}

fn lower_camel(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn scalar_kind(schema: &Schema, id: TypeId) -> FieldKind {
    match schema.variety(id) {
        Some(Variety::Atomic(k)) => FieldKind::Scalar(k),
        Some(Variety::List(item)) => match schema.variety(item) {
            Some(Variety::Atomic(k)) => FieldKind::ListOfScalar(k),
            _ => unreachable!("list items are atomic in a loaded schema"),
        },
        None => unreachable!("caller checked the type is simple"),
    }
}

/// Builds one record per global element and per complex type reachable
/// from them. Named complex types give their name to the record; anonymous
/// ones borrow the element's.
pub fn derive_bindings(schema: &Schema) -> BindingModel {
    let mut d = Deriver {
        schema,
        records: BTreeMap::new(),
        by_type: BTreeMap::new(),
    };
    let mut roots = Vec::new();
    for g in schema.global_elements() {
        let name = if schema.is_simple(g.type_id) {
            let name = d.unique_name(&g.name.local_name);
            let field = FieldDescriptor {
                name: "value".into(),
                xml_name: String::new(),
                source: FieldSource::Content,
                kind: scalar_kind(schema, g.type_id),
                optional: false,
                repeated: false,
                default: g.default.clone(),
                type_id: g.type_id,
            };
            d.records.insert(
                name.clone(),
                RecordDescriptor {
                    name: name.clone(),
                    fields: vec![field],
                    type_id: g.type_id,
                },
            );
            name
        } else {
            d.record_for(g)
        };
        roots.push((g.name.clone(), name));
    }
    BindingModel {
        records: d.records,
        roots,
        schema: schema.clone(),
    }
}

struct Deriver<'s> {
    schema: &'s Schema,
    records: BTreeMap<String, RecordDescriptor>,
    by_type: BTreeMap<TypeId, String>,
}

impl Deriver<'_> {
    fn unique_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        let mut n = 2;
        while self.records.contains_key(&name) || self.by_type.values().any(|v| *v == name) {
            name = format!("{base}{n}");
            n += 1;
        }
        name
    }

    fn record_for(&mut self, decl: &ElementDecl) -> String {
        if let Some(name) = self.by_type.get(&decl.type_id) {
            return name.clone();
        }
        let schema = self.schema;
        let base = schema
            .type_name(decl.type_id)
            .unwrap_or(&decl.name.local_name)
            .to_string();
        let name = self.unique_name(&base);
        // reserve first so recursive types terminate
        self.by_type.insert(decl.type_id, name.clone());
        let ct = schema.complex(decl.type_id).expect("complex type");
        let mut fields = Vec::new();
        if let Some(base) = ct.simple_content_base {
            fields.push(FieldDescriptor {
                name: "value".into(),
                xml_name: String::new(),
                source: FieldSource::Content,
                kind: scalar_kind(schema, base),
                optional: false,
                repeated: false,
                default: decl.default.clone(),
                type_id: base,
            });
        }
        for a in &ct.attributes {
            fields.push(FieldDescriptor {
                name: a.name.clone(),
                xml_name: a.name.clone(),
                source: FieldSource::Attribute,
                kind: scalar_kind(schema, a.type_id),
                optional: !a.required && a.default.is_none(),
                repeated: false,
                default: a.default.clone(),
                type_id: a.type_id,
            });
        }
        for p in &ct.content {
            let kind = if schema.is_simple(p.type_id) {
                scalar_kind(schema, p.type_id)
            } else {
                FieldKind::Record(self.record_for(p))
            };
            let mut field_name = lower_camel(&p.name.local_name);
            if fields.iter().any(|f: &FieldDescriptor| f.name == field_name) {
                field_name.push_str("Element");
            }
            fields.push(FieldDescriptor {
                name: field_name,
                xml_name: p.name.local_name.clone(),
                source: FieldSource::Element,
                kind,
                optional: p.min_occurs == 0 && p.default.is_none(),
                repeated: p.max_occurs != Some(1),
                default: p.default.clone(),
                type_id: p.type_id,
            });
        }
        self.records.insert(
            name.clone(),
            RecordDescriptor {
                name: name.clone(),
                fields,
                type_id: decl.type_id,
            },
        );
        name
    }
}

/// Validates `doc` and binds it. Attribute and element defaults are filled.
pub fn unmarshal(model: &BindingModel, doc: &XmlDocument) -> Result<TypedValue, BindingError> {
    let report = validate(&model.schema, doc);
    if !report.is_valid() {
        return Err(BindingError::Invalid(report));
    }
    let defaulted = apply_defaults(&model.schema, doc);
    let root = &defaulted.root;
    let record = model
        .root_record(&root.name)
        .ok_or_else(|| BindingError::Shape(format!("no record for root element {}", root.name)))?;
    Ok(TypedValue {
        element: root.name.clone(),
        record: bind_record(model, record, root),
    })
}

fn simple(model: &BindingModel, type_id: TypeId, lexical: &str) -> FieldValue {
    match model.schema.check_simple(type_id, lexical) {
        Ok(SimpleValue::Atomic(v)) => FieldValue::Scalar(v),
        Ok(SimpleValue::List(v)) => FieldValue::List(v),
        Err(e) => unreachable!("validated value failed to bind: {e:?}"),
    }
}

fn content_lexical(e: &XmlElement, default: Option<&String>) -> String {
    let text = e.string_value();
    match default {
        Some(d) if text.is_empty() => d.clone(),
        _ => text,
    }
}

fn bind_record(model: &BindingModel, desc: &RecordDescriptor, e: &XmlElement) -> Record {
    let mut record = Record {
        name: desc.name.clone(),
        fields: Vec::new(),
    };
    let children: Vec<&XmlElement> = e.elements().collect();
    let assigned = match model.schema.complex(desc.type_id) {
        Some(ct) if ct.simple_content_base.is_none() => {
            let names: Vec<&QName> = children.iter().map(|c| &c.name).collect();
            Some((ct, match_sequence(&ct.content, &names).assigned))
        }
        _ => None,
    };
    let mut particle = 0;
    for f in &desc.fields {
        let value = match f.source {
            FieldSource::Content => Some(simple(model, f.type_id, &content_lexical(e, f.default.as_ref()))),
            FieldSource::Attribute => e
                .attribute_ns(&QName::local(f.xml_name.clone()))
                .map(|v| simple(model, f.type_id, v)),
            FieldSource::Element => {
                let (ct, slots) = assigned.as_ref().expect("element fields imply sequence content");
                let p = particle;
                particle += 1;
                let decl = &ct.content[p];
                let mine: Vec<&XmlElement> = children
                    .iter()
                    .zip(slots)
                    .filter(|(_, s)| **s == Some(p))
                    .map(|(c, _)| *c)
                    .collect();
                let one = |c: &XmlElement| match &f.kind {
                    FieldKind::Record(r) => FieldValue::Record(bind_record(model, &model.records[r], c)),
                    _ => simple(model, f.type_id, &content_lexical(c, decl.default.as_ref())),
                };
                if f.repeated {
                    Some(FieldValue::Repeated(mine.into_iter().map(one).collect()))
                } else if let Some(c) = mine.first() {
                    Some(one(c))
                } else {
                    decl.default.as_ref().map(|d| simple(model, f.type_id, d))
                }
            }
        };
        if let Some(v) = value {
            record.fields.push((f.name.clone(), v));
        }
    }
    record
}

/// Writes `value` as a document and validates the result.
pub fn marshal(model: &BindingModel, value: &TypedValue) -> Result<XmlDocument, BindingError> {
    let desc = model
        .root_record(&value.element)
        .ok_or_else(|| BindingError::Shape(format!("{} is not a global element", value.element)))?;
    let mut name = value.element.clone();
    let mut root = XmlElement::new(name.clone());
    if !name.namespace_uri.is_empty() {
        let prefix = model
            .schema
            .preferred_prefix
            .clone()
            .unwrap_or_else(|| "tns".to_string());
        name.prefix = prefix.clone();
        root = XmlElement::new(name.clone()).with_namespace(&prefix, &name.namespace_uri);
    }
    write_record(model, desc, &value.record, &mut root)?;
    indent(&mut root);
    let doc = XmlDocument::new(root);
    let report = validate(&model.schema, &doc);
    if !report.is_valid() {
        return Err(BindingError::Invalid(report));
    }
    Ok(doc)
}

fn lexical(v: &FieldValue, field: &str) -> Result<String, BindingError> {
    match v {
        FieldValue::Scalar(s) => Ok(s.to_string()),
        FieldValue::List(items) => Ok(join(items)),
        _ => Err(BindingError::Shape(format!("field \"{field}\" needs a simple value"))),
    }
}

fn write_record(
    model: &BindingModel,
    desc: &RecordDescriptor,
    record: &Record,
    e: &mut XmlElement,
) -> Result<(), BindingError> {
    if record.name != desc.name {
        return Err(BindingError::Shape(format!(
            "expected a {} record, found {}",
            desc.name, record.name
        )));
    }
    if let Some((unknown, _)) = record.fields.iter().find(|(n, _)| desc.field(n).is_none()) {
        return Err(BindingError::Shape(format!(
            "record {} has no field \"{unknown}\"",
            desc.name
        )));
    }
    for f in &desc.fields {
        let Some(v) = record.get(&f.name) else {
            if f.optional || f.default.is_some() || (f.repeated && f.source == FieldSource::Element) {
                continue;
            }
            return Err(BindingError::Shape(format!(
                "record {} is missing field \"{}\"",
                desc.name, f.name
            )));
        };
        match f.source {
            FieldSource::Content => e.push_text(&lexical(v, &f.name)?),
            FieldSource::Attribute => e.set_attribute(QName::local(f.xml_name.clone()), lexical(v, &f.name)?),
            FieldSource::Element => {
                let items: Vec<&FieldValue> = match (f.repeated, v) {
                    (true, FieldValue::Repeated(items)) => items.iter().collect(),
                    (true, _) => {
                        return Err(BindingError::Shape(format!("field \"{}\" must be repeated", f.name)));
                    }
                    (false, v) => vec![v],
                };
                for item in items {
                    let mut child = XmlElement::new(QName::local(f.xml_name.clone()));
                    match (&f.kind, item) {
                        (FieldKind::Record(r), FieldValue::Record(rec)) => {
                            write_record(model, &model.records[r], rec, &mut child)?;
                        }
                        (FieldKind::Record(r), _) => {
                            return Err(BindingError::Shape(format!("field \"{}\" needs a {r} record", f.name)));
                        }
                        (_, item) => child.push_text(&lexical(item, &f.name)?),
                    }
                    e.push_element(child);
                }
            }
        }
    }
    Ok(())
}
