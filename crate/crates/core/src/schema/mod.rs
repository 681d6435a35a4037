//! An XML Schema subset.
//!
//! Vocabulary: `schema`, `element`, `complexType`, `sequence`, `simpleType`,
//! `restriction`, `list`, `extension`, `simpleContent`, `attribute`,
//! `unique`/`selector`/`field` and the facets `enumeration`, `length`,
//! `maxExclusive`, `maxInclusive`, `minInclusive`. Built-in types:
//! `string`, `boolean`, `unsignedShort`, `unsignedInt`, `unsignedLong`,
//! `nonNegativeInteger`. Local element and attribute declarations are
//! unqualified.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::xml::QName;
use crate::xpath::{Expr, XPathError};

mod compile;
pub(crate) mod validate;

pub use compile::load_schema;
pub use validate::{apply_defaults, validate, ValidationReport, Violation, ViolationKind};

pub const XS_NS: &str = "http://www.w3.org/2001/XMLSchema";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("line {line}: unsupported schema construct \"{name}\"")]
    UnsupportedConstruct { name: String, line: usize },
    #[error("unresolved type \"{0}\"")]
    UnresolvedType(String),
    #[error("line {line}: facet {facet} cannot restrict {base}")]
    InapplicableFacet { facet: String, base: String, line: usize },
    #[error("line {line}: {message}")]
    Invalid { message: String, line: usize },
    #[error("line {line}: {source}")]
    XPath { source: XPathError, line: usize },
}

/// The supported built-in simple types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BuiltinKind {
    String,
    Boolean,
    UnsignedShort,
    UnsignedInt,
    UnsignedLong,
    NonNegativeInteger,
}

impl BuiltinKind {
    pub const ALL: [BuiltinKind; 6] = [
        BuiltinKind::String,
        BuiltinKind::Boolean,
        BuiltinKind::UnsignedShort,
        BuiltinKind::UnsignedInt,
        BuiltinKind::UnsignedLong,
        BuiltinKind::NonNegativeInteger,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinKind::String => "string",
            BuiltinKind::Boolean => "boolean",
            BuiltinKind::UnsignedShort => "unsignedShort",
            BuiltinKind::UnsignedInt => "unsignedInt",
            BuiltinKind::UnsignedLong => "unsignedLong",
            BuiltinKind::NonNegativeInteger => "nonNegativeInteger",
        }
    }

    pub fn from_name(name: &str) -> Option<BuiltinKind> {
        BuiltinKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn is_numeric(self) -> bool {
        !matches!(self, BuiltinKind::String | BuiltinKind::Boolean)
    }

    /// Inclusive upper bound of the value space for bounded integer types.
    pub fn max_value(self) -> Option<i128> {
        match self {
            BuiltinKind::UnsignedShort => Some(u16::MAX as i128),
            BuiltinKind::UnsignedInt => Some(u32::MAX as i128),
            BuiltinKind::UnsignedLong => Some(u64::MAX as i128),
            _ => None,
        }
    }

    /// Maps a lexical form to its value. Non-string types collapse
    /// surrounding whitespace first.
    pub fn parse(self, lexical: &str) -> Result<Value, String> {
        if self == BuiltinKind::String {
            return Ok(Value::String(lexical.to_string()));
        }
        let t = collapse_whitespace(lexical);
        if self == BuiltinKind::Boolean {
            return match t.as_str() {
                "true" | "1" => Ok(Value::Boolean(true)),
                "false" | "0" => Ok(Value::Boolean(false)),
                _ => Err(format!("\"{t}\" is not a valid boolean")),
            };
        }
        let (negative, digits) = match t.as_bytes().first() {
            Some(b'+') => (false, &t[1..]),
            Some(b'-') => (true, &t[1..]),
            _ => (false, t.as_str()),
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("\"{t}\" is not a valid {}", self.name()));
        }
        let magnitude: i128 = digits
            .parse()
            .map_err(|_| format!("\"{t}\" is out of the supported range for {}", self.name()))?;
        let value = if negative { -magnitude } else { magnitude };
        if value < 0 {
            return Err(format!("\"{t}\" is negative, not a valid {}", self.name()));
        }
        if let Some(max) = self.max_value() {
            if value > max {
                return Err(format!("\"{t}\" exceeds the {} maximum {max}", self.name()));
            }
        }
        Ok(Value::Integer(value))
    }
}

impl fmt::Display for BuiltinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A value in a built-in type's value space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    String(String),
    Boolean(bool),
    Integer(i128),
}

impl Value {
    pub fn as_integer(&self) -> Option<i128> {
        match self {
            Value::Integer(i) => Some(*i),
            _ => None,
        }
    }
}

/// Canonical lexical form.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::String(s) => f.write_str(s),
            Value::Boolean(b) => write!(f, "{b}"),
            Value::Integer(i) => write!(f, "{i}"),
        }
    }
}

pub fn collapse_whitespace(s: &str) -> String {
    s.split([' ', '\t', '\n', '\r'])
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(pub(crate) usize);

#[derive(Clone, Debug, PartialEq)]
pub enum Facet {
    Length(u64),
    MaxExclusive(i128),
    MaxInclusive(i128),
    MinInclusive(i128),
    /// Lexical values as written; compared by value.
    Enumeration(Vec<String>),
}

impl Facet {
    pub fn name(&self) -> &'static str {
        match self {
            Facet::Length(_) => "length",
            Facet::MaxExclusive(_) => "maxExclusive",
            Facet::MaxInclusive(_) => "maxInclusive",
            Facet::MinInclusive(_) => "minInclusive",
            Facet::Enumeration(_) => "enumeration",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TypeDef {
    BuiltIn(BuiltinKind),
    Restriction { base: TypeId, facets: Vec<Facet> },
    List { item: TypeId },
    Complex(ComplexType),
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ComplexType {
    /// Particles of the content sequence, in order.
    pub content: Vec<ElementDecl>,
    pub attributes: Vec<AttrDecl>,
    /// Set for `simpleContent` extensions.
    pub simple_content_base: Option<TypeId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttrDecl {
    pub name: String,
    pub type_id: TypeId,
    pub default: Option<String>,
    pub required: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementDecl {
    pub name: QName,
    pub type_id: TypeId,
    pub min_occurs: u32,
    /// `None` means unbounded.
    pub max_occurs: Option<u32>,
    pub default: Option<String>,
    pub identity_constraints: Vec<IdentityConstraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityConstraint {
    pub name: String,
    pub selector: Expr,
    pub field: Expr,
}

/// Whether a simple type is atomic or a list, and which facets apply.
#[derive(Clone, Debug, PartialEq)]
pub enum Variety {
    Atomic(BuiltinKind),
    List(TypeId),
}

#[derive(Clone, Debug)]
struct TypeEntry {
    name: Option<String>,
    def: TypeDef,
}

/// A compiled schema. Immutable once loaded.
#[derive(Clone, Debug)]
pub struct Schema {
    pub target_namespace: String,
    /// A prefix bound to the target namespace in the schema document, used
    /// when writing instance documents.
    pub preferred_prefix: Option<String>,
    types: Vec<TypeEntry>,
    named: BTreeMap<String, TypeId>,
    globals: Vec<ElementDecl>,
}

impl Schema {
    pub fn global_elements(&self) -> &[ElementDecl] {
        &self.globals
    }

    pub fn global(&self, name: &QName) -> Option<&ElementDecl> {
        self.globals.iter().find(|g| &g.name == name)
    }

    /// User-defined named types (built-ins excluded).
    pub fn named_types(&self) -> impl Iterator<Item = (&str, TypeId)> {
        self.named.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn named_type(&self, name: &str) -> Option<TypeId> {
        self.named.get(name).copied()
    }

    pub fn type_def(&self, id: TypeId) -> &TypeDef {
        &self.types[id.0].def
    }

    pub fn type_name(&self, id: TypeId) -> Option<&str> {
        self.types[id.0].name.as_deref()
    }

    pub fn builtin(&self, kind: BuiltinKind) -> TypeId {
        TypeId(
            BuiltinKind::ALL
                .iter()
                .position(|k| *k == kind)
                .expect("all kinds registered"),
        )
    }

    pub fn complex(&self, id: TypeId) -> Option<&ComplexType> {
        match self.type_def(id) {
            TypeDef::Complex(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_simple(&self, id: TypeId) -> bool {
        !matches!(self.type_def(id), TypeDef::Complex(_))
    }

    /// Variety of a simple type, following restriction bases.
    pub fn variety(&self, id: TypeId) -> Option<Variety> {
        match self.type_def(id) {
            TypeDef::BuiltIn(k) => Some(Variety::Atomic(*k)),
            TypeDef::List { item } => Some(Variety::List(*item)),
            TypeDef::Restriction { base, .. } => self.variety(*base),
            TypeDef::Complex(_) => None,
        }
    }

    /// Facets along the restriction chain, outermost first.
    pub fn facets(&self, id: TypeId) -> Vec<&Facet> {
        let mut out = Vec::new();
        let mut cur = id;
        while let TypeDef::Restriction { base, facets } = self.type_def(cur) {
            out.extend(facets.iter());
            cur = *base;
        }
        out
    }

    /// Display name for messages: the type's name, or its variety.
    pub fn describe_type(&self, id: TypeId) -> String {
        if let Some(n) = self.type_name(id) {
            return n.to_string();
        }
        match self.variety(id) {
            Some(Variety::Atomic(k)) => format!("restricted {k}"),
            Some(Variety::List(item)) => format!("list of {}", self.describe_type(item)),
            None => "anonymous complex type".to_string(),
        }
    }

    /// Checks a lexical value against a simple type.
    pub fn check_simple(&self, id: TypeId, lexical: &str) -> Result<SimpleValue, Vec<(ViolationKind, String)>> {
        match self.variety(id) {
            None => Err(vec![(
                ViolationKind::Lexical,
                "complex type used as a simple type".into(),
            )]),
            Some(Variety::Atomic(kind)) => {
                let value = kind.parse(lexical).map_err(|m| vec![(ViolationKind::Lexical, m)])?;
                let problems = self.atomic_facet_problems(id, kind, &value);
                if problems.is_empty() {
                    Ok(SimpleValue::Atomic(value))
                } else {
                    Err(problems)
                }
            }
            Some(Variety::List(item)) => {
                let collapsed = collapse_whitespace(lexical);
                let mut items = Vec::new();
                let mut problems = Vec::new();
                for (i, tok) in collapsed.split(' ').filter(|t| !t.is_empty()).enumerate() {
                    match self.check_simple(item, tok) {
                        Ok(SimpleValue::Atomic(v)) => items.push(v),
                        Ok(SimpleValue::List(_)) => unreachable!("list items are atomic"),
                        Err(errs) => {
                            problems.extend(errs.into_iter().map(|(k, m)| (k, format!("item {}: {m}", i + 1))))
                        }
                    }
                }
                if !problems.is_empty() {
                    return Err(problems);
                }
                for facet in self.facets(id) {
                    if let Facet::Length(n) = facet {
                        if items.len() as u64 != *n {
                            problems.push((
                                ViolationKind::Length,
                                format!("list has {} items, length must be {n}", items.len()),
                            ));
                        }
                    }
                }
                if problems.is_empty() {
                    Ok(SimpleValue::List(items))
                } else {
                    Err(problems)
                }
            }
        }
    }

    fn atomic_facet_problems(&self, id: TypeId, kind: BuiltinKind, value: &Value) -> Vec<(ViolationKind, String)> {
        let mut problems = Vec::new();
        for facet in self.facets(id) {
            let n = value.as_integer();
            match (facet, n) {
                (Facet::MaxExclusive(m), Some(v)) if v >= *m => {
                    problems.push((ViolationKind::MaxExclusive, format!("value {v} must be less than {m}")))
                }
                (Facet::MaxInclusive(m), Some(v)) if v > *m => {
                    problems.push((ViolationKind::MaxInclusive, format!("value {v} must be at most {m}")))
                }
                (Facet::MinInclusive(m), Some(v)) if v < *m => {
                    problems.push((ViolationKind::MinInclusive, format!("value {v} must be at least {m}")))
                }
                (Facet::Enumeration(allowed), _) => {
                    let hit = allowed.iter().any(|a| kind.parse(a).as_ref() == Ok(value));
                    if !hit {
                        problems.push((
                            ViolationKind::Enumeration,
                            format!("value {value} is not one of {{{}}}", allowed.join(", ")),
                        ));
                    }
                }
                _ => {}
            }
        }
        problems
    }
}

/// A checked simple value.
#[derive(Clone, Debug, PartialEq)]
pub enum SimpleValue {
    Atomic(Value),
    List(Vec<Value>),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unsigned_short_boundaries() {
        let k = BuiltinKind::UnsignedShort;
        assert_eq!(k.parse("0"), Ok(Value::Integer(0)));
        assert_eq!(k.parse("65535"), Ok(Value::Integer(65535)));
        assert!(k.parse("-1").is_err());
        assert!(k.parse("65536").is_err());
        assert_eq!(k.parse(" +7\n"), Ok(Value::Integer(7)));
        assert_eq!(k.parse("-0"), Ok(Value::Integer(0)));
        assert!(k.parse("1.0").is_err());
        assert!(k.parse("").is_err());
    }

    #[test]
    fn boolean_lexical_space() {
        let k = BuiltinKind::Boolean;
        assert_eq!(k.parse("1"), Ok(Value::Boolean(true)));
        assert_eq!(k.parse(" false "), Ok(Value::Boolean(false)));
        assert!(k.parse("maybe").is_err());
        assert!(k.parse("TRUE").is_err());
    }

    #[test]
    fn string_keeps_whitespace() {
        assert_eq!(BuiltinKind::String.parse(" a \n"), Ok(Value::String(" a \n".into())));
    }

    #[test]
    fn collapse() {
        assert_eq!(collapse_whitespace("\n  1 2\t\t3 \n"), "1 2 3");
    }
}
