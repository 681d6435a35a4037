use std::collections::BTreeMap;

use super::{
    AttrDecl, BuiltinKind, ComplexType, ElementDecl, Facet, IdentityConstraint, Schema, SchemaError, TypeDef,
    TypeEntry, TypeId, Variety, XS_NS,
};
use crate::xml::{extend_scope, is_ncname, resolve_qname, NamespaceMap, QName, XmlDocument, XmlElement};
use crate::xpath::{compile_expr, XPathError};

type Result<T> = std::result::Result<T, SchemaError>;

/// Compiles a schema document.
pub fn load_schema(doc: &XmlDocument) -> Result<Schema> {
    let root = &doc.root;
    if !root.name.is(XS_NS, "schema") {
        return Err(unsupported(root.name.lexical(), root.source_line));
    }
    check_attributes(
        root,
        &[
            "targetNamespace",
            "elementFormDefault",
            "attributeFormDefault",
            "version",
        ],
    )?;
    for form in ["elementFormDefault", "attributeFormDefault"] {
        if let Some(v) = root.attribute(form) {
            if v != "unqualified" {
                return Err(unsupported(format!("{form}=\"{v}\""), root.source_line));
            }
        }
    }
    let scope = extend_scope(&NamespaceMap::new(), root);
    let target_namespace = root.attribute("targetNamespace").unwrap_or("").to_string();
    let preferred_prefix = root
        .namespace_declarations()
        .find(|(p, uri)| !p.is_empty() && *uri == target_namespace)
        .map(|(p, _)| p.to_string());

    let mut c = Compiler {
        target_namespace,
        types: BuiltinKind::ALL
            .iter()
            .map(|k| TypeEntry {
                name: Some(k.name().to_string()),
                def: TypeDef::BuiltIn(*k),
            })
            .collect(),
        lines: vec![0; BuiltinKind::ALL.len()],
        named: BTreeMap::new(),
        globals: Vec::new(),
        attr_checks: Vec::new(),
        element_checks: Vec::new(),
    };

    // Reserve named types first so references may point forwards.
    for child in element_children(root)? {
        if child.name.is(XS_NS, "simpleType") || child.name.is(XS_NS, "complexType") {
            let name = required_ncname(child, "name")?;
            if c.named.contains_key(&name) {
                return Err(invalid(format!("type \"{name}\" is defined twice"), child.source_line));
            }
            let id = c.reserve(Some(name.clone()), child.source_line);
            c.named.insert(name, id);
        }
    }

    for child in element_children(root)? {
        let scope = extend_scope(&scope, child);
        if child.name.is(XS_NS, "simpleType") {
            let id = c.named[child.attribute("name").expect("checked above")];
            let def = c.simple_type(child, &scope, true)?;
            c.types[id.0].def = def;
        } else if child.name.is(XS_NS, "complexType") {
            let id = c.named[child.attribute("name").expect("checked above")];
            let def = TypeDef::Complex(c.complex_type(child, &scope, true)?);
            c.types[id.0].def = def;
        } else if child.name.is(XS_NS, "element") {
            let decl = c.element(child, &scope, true)?;
            if c.globals.iter().any(|g| g.name == decl.name) {
                return Err(invalid(
                    format!("global element \"{}\" is declared twice", decl.name.local_name),
                    child.source_line,
                ));
            }
            c.globals.push(decl);
        } else {
            return Err(unsupported(child.name.lexical(), child.source_line));
        }
    }

    c.finish(preferred_prefix)
}

struct Compiler {
    target_namespace: String,
    types: Vec<TypeEntry>,
    lines: Vec<usize>,
    named: BTreeMap<String, TypeId>,
    globals: Vec<ElementDecl>,
    /// (type, default, line) for attribute defaults, checked once types resolve.
    attr_checks: Vec<(TypeId, String, usize)>,
    element_checks: Vec<(TypeId, String, usize)>,
}

fn unsupported(name: impl Into<String>, line: usize) -> SchemaError {
    SchemaError::UnsupportedConstruct {
        name: name.into(),
        line,
    }
}

fn invalid(message: impl Into<String>, line: usize) -> SchemaError {
    SchemaError::Invalid {
        message: message.into(),
        line,
    }
}

/// Child elements, rejecting non-whitespace text.
fn element_children(e: &XmlElement) -> Result<Vec<&XmlElement>> {
    if !e.has_only_whitespace_text() {
        return Err(invalid(
            format!("unexpected text inside {}", e.name.lexical()),
            e.source_line,
        ));
    }
    Ok(e.elements().collect())
}

fn check_attributes(e: &XmlElement, allowed: &[&str]) -> Result<()> {
    for a in e.plain_attributes() {
        let known = a.name.namespace_uri.is_empty() && allowed.contains(&a.name.local_name.as_str());
        if !known {
            return Err(unsupported(
                format!("{}@{}", e.name.lexical(), a.name.lexical()),
                e.source_line,
            ));
        }
    }
    Ok(())
}

fn required<'e>(e: &'e XmlElement, attr: &str) -> Result<&'e str> {
    e.attribute(attr).ok_or_else(|| {
        invalid(
            format!("{} requires a \"{attr}\" attribute", e.name.lexical()),
            e.source_line,
        )
    })
}

fn required_ncname(e: &XmlElement, attr: &str) -> Result<String> {
    let v = required(e, attr)?;
    if !is_ncname(v) {
        return Err(invalid(format!("\"{v}\" is not a valid name"), e.source_line));
    }
    Ok(v.to_string())
}

fn parse_occurs(e: &XmlElement, attr: &str) -> Result<Option<Option<u32>>> {
    match e.attribute(attr) {
        None => Ok(None),
        Some("unbounded") if attr == "maxOccurs" => Ok(Some(None)),
        Some(v) => v
            .trim()
            .parse::<u32>()
            .map(|n| Some(Some(n)))
            .map_err(|_| invalid(format!("bad {attr} value \"{v}\""), e.source_line)),
    }
}

fn parse_integer(e: &XmlElement, v: &str) -> Result<i128> {
    let t = v.trim();
    let digits = t.strip_prefix(['+', '-']).unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(invalid(format!("facet value \"{v}\" is not an integer"), e.source_line));
    }
    t.parse::<i128>()
        .map_err(|_| invalid(format!("facet value \"{v}\" is out of range"), e.source_line))
}

impl Compiler {
    fn reserve(&mut self, name: Option<String>, line: usize) -> TypeId {
        self.types.push(TypeEntry {
            name,
            def: TypeDef::BuiltIn(BuiltinKind::String),
        });
        self.lines.push(line);
        TypeId(self.types.len() - 1)
    }

    fn add(&mut self, def: TypeDef, line: usize) -> TypeId {
        let id = self.reserve(None, line);
        self.types[id.0].def = def;
        id
    }

    fn resolve_type(&self, lexical: &str, scope: &NamespaceMap, line: usize) -> Result<TypeId> {
        let q = resolve_qname(lexical.trim(), scope, true)
            .ok_or_else(|| SchemaError::UnresolvedType(lexical.to_string()))?;
        if q.namespace_uri == XS_NS {
            return match BuiltinKind::from_name(&q.local_name) {
                Some(k) => Ok(TypeId(
                    BuiltinKind::ALL.iter().position(|x| *x == k).expect("registered"),
                )),
                None => Err(unsupported(format!("xs:{}", q.local_name), line)),
            };
        }
        if q.namespace_uri == self.target_namespace {
            if let Some(id) = self.named.get(&q.local_name) {
                return Ok(*id);
            }
        }
        Err(SchemaError::UnresolvedType(lexical.to_string()))
    }

    fn element(&mut self, e: &XmlElement, scope: &NamespaceMap, global: bool) -> Result<ElementDecl> {
        if global {
            check_attributes(e, &["name", "type", "default"])?;
        } else {
            check_attributes(e, &["name", "type", "default", "minOccurs", "maxOccurs"])?;
        }
        let local = required_ncname(e, "name")?;
        let name = if global {
            QName::new(self.target_namespace.clone(), local.clone())
        } else {
            QName::local(local.clone())
        };
        let min_occurs = parse_occurs(e, "minOccurs")?.flatten().unwrap_or(1);
        let max_occurs = parse_occurs(e, "maxOccurs")?.unwrap_or(Some(1));
        if let Some(max) = max_occurs {
            if min_occurs > max {
                return Err(invalid(
                    format!("minOccurs {min_occurs} exceeds maxOccurs {max} on \"{local}\""),
                    e.source_line,
                ));
            }
        }

        let mut type_id = match e.attribute("type") {
            Some(t) => Some(self.resolve_type(t, scope, e.source_line)?),
            None => None,
        };
        let mut identity_constraints = Vec::new();
        for child in element_children(e)? {
            let child_scope = extend_scope(scope, child);
            let inline = if child.name.is(XS_NS, "complexType") {
                let ct = self.complex_type(child, &child_scope, false)?;
                Some(TypeDef::Complex(ct))
            } else if child.name.is(XS_NS, "simpleType") {
                Some(self.simple_type(child, &child_scope, false)?)
            } else if child.name.is(XS_NS, "unique") {
                identity_constraints.push(self.unique(child, &child_scope)?);
                None
            } else {
                return Err(unsupported(child.name.lexical(), child.source_line));
            };
            if let Some(def) = inline {
                if type_id.is_some() || !identity_constraints.is_empty() {
                    return Err(invalid(
                        format!("element \"{local}\" has more than one type, or its type follows a constraint"),
                        child.source_line,
                    ));
                }
                type_id = Some(self.add(def, child.source_line));
            }
        }
        let type_id = type_id.ok_or_else(|| invalid(format!("element \"{local}\" has no type"), e.source_line))?;
        let default = e.attribute("default").map(str::to_string);
        if let Some(d) = &default {
            self.element_checks.push((type_id, d.clone(), e.source_line));
        }
        Ok(ElementDecl {
            name,
            type_id,
            min_occurs,
            max_occurs,
            default,
            identity_constraints,
        })
    }

    fn unique(&mut self, e: &XmlElement, scope: &NamespaceMap) -> Result<IdentityConstraint> {
        check_attributes(e, &["name"])?;
        let name = required_ncname(e, "name")?;
        let mut selector = None;
        let mut field = None;
        for child in element_children(e)? {
            let slot = if child.name.is(XS_NS, "selector") && selector.is_none() {
                &mut selector
            } else if child.name.is(XS_NS, "field") && field.is_none() {
                &mut field
            } else {
                return Err(unsupported(child.name.lexical(), child.source_line));
            };
            check_attributes(child, &["xpath"])?;
            let src = required(child, "xpath")?;
            let child_scope = extend_scope(scope, child);
            let expr = compile_expr(src, &child_scope).map_err(|source| SchemaError::XPath {
                source,
                line: child.source_line,
            })?;
            if !expr.is_path_only() {
                return Err(SchemaError::XPath {
                    source: XPathError::InvalidPattern(format!("\"{src}\" is not a path")),
                    line: child.source_line,
                });
            }
            *slot = Some(expr);
        }
        match (selector, field) {
            (Some(selector), Some(field)) => Ok(IdentityConstraint { name, selector, field }),
            _ => Err(invalid(
                format!("unique \"{name}\" needs one selector and one field"),
                e.source_line,
            )),
        }
    }

    fn complex_type(&mut self, e: &XmlElement, scope: &NamespaceMap, named: bool) -> Result<ComplexType> {
        check_attributes(e, if named { &["name"] } else { &[] })?;
        let mut ct = ComplexType::default();
        let children = element_children(e)?;
        for (i, child) in children.iter().enumerate() {
            let child_scope = extend_scope(scope, child);
            if child.name.is(XS_NS, "sequence") && i == 0 {
                check_attributes(child, &[])?;
                for particle in element_children(child)? {
                    if !particle.name.is(XS_NS, "element") {
                        return Err(unsupported(particle.name.lexical(), particle.source_line));
                    }
                    let ps = extend_scope(&child_scope, particle);
                    let decl = self.element(particle, &ps, false)?;
                    ct.content.push(decl);
                }
            } else if child.name.is(XS_NS, "simpleContent") && children.len() == 1 {
                check_attributes(child, &[])?;
                let ext = match element_children(child)?.as_slice() {
                    [ext] if ext.name.is(XS_NS, "extension") => *ext,
                    [other, ..] => return Err(unsupported(other.name.lexical(), other.source_line)),
                    [] => return Err(invalid("simpleContent needs an extension", child.source_line)),
                };
                check_attributes(ext, &["base"])?;
                let ext_scope = extend_scope(&child_scope, ext);
                ct.simple_content_base =
                    Some(self.resolve_type(required(ext, "base")?, &ext_scope, ext.source_line)?);
                for attr in element_children(ext)? {
                    if !attr.name.is(XS_NS, "attribute") {
                        return Err(unsupported(attr.name.lexical(), attr.source_line));
                    }
                    let a = self.attribute(attr, &extend_scope(&ext_scope, attr))?;
                    push_attr(&mut ct, a, attr.source_line)?;
                }
            } else if child.name.is(XS_NS, "attribute") {
                let a = self.attribute(child, &child_scope)?;
                push_attr(&mut ct, a, child.source_line)?;
            } else {
                return Err(unsupported(child.name.lexical(), child.source_line));
            }
        }
        Ok(ct)
    }

    fn attribute(&mut self, e: &XmlElement, scope: &NamespaceMap) -> Result<AttrDecl> {
        check_attributes(e, &["name", "type", "default", "use"])?;
        let name = required_ncname(e, "name")?;
        let required = match e.attribute("use") {
            None | Some("optional") => false,
            Some("required") => true,
            Some(other) => return Err(unsupported(format!("use=\"{other}\""), e.source_line)),
        };
        let mut type_id = match e.attribute("type") {
            Some(t) => Some(self.resolve_type(t, scope, e.source_line)?),
            None => None,
        };
        for child in element_children(e)? {
            if !child.name.is(XS_NS, "simpleType") || type_id.is_some() {
                return Err(unsupported(child.name.lexical(), child.source_line));
            }
            let def = self.simple_type(child, &extend_scope(scope, child), false)?;
            type_id = Some(self.add(def, child.source_line));
        }
        let type_id = type_id.unwrap_or(TypeId(0));
        let default = e.attribute("default").map(str::to_string);
        if let Some(d) = &default {
            if required {
                return Err(invalid(
                    format!("attribute \"{name}\" cannot be both required and defaulted"),
                    e.source_line,
                ));
            }
            self.attr_checks.push((type_id, d.clone(), e.source_line));
        }
        Ok(AttrDecl {
            name,
            type_id,
            default,
            required,
        })
    }

    fn simple_type(&mut self, e: &XmlElement, scope: &NamespaceMap, named: bool) -> Result<TypeDef> {
        check_attributes(e, if named { &["name"] } else { &[] })?;
        let child = match element_children(e)?.as_slice() {
            [only] => *only,
            _ => {
                return Err(invalid(
                    "simpleType needs exactly one restriction or list",
                    e.source_line,
                ))
            }
        };
        let scope = extend_scope(scope, child);
        if child.name.is(XS_NS, "restriction") {
            check_attributes(child, &["base"])?;
            let base = self.resolve_type(required(child, "base")?, &scope, child.source_line)?;
            let mut facets: Vec<Facet> = Vec::new();
            for f in element_children(child)? {
                check_attributes(f, &["value"])?;
                let v = required(f, "value")?;
                let facet = match (f.name.namespace_uri.as_str(), f.name.local_name.as_str()) {
                    (XS_NS, "length") => Facet::Length(
                        v.trim()
                            .parse()
                            .map_err(|_| invalid(format!("bad length \"{v}\""), f.source_line))?,
                    ),
                    (XS_NS, "maxExclusive") => Facet::MaxExclusive(parse_integer(f, v)?),
                    (XS_NS, "maxInclusive") => Facet::MaxInclusive(parse_integer(f, v)?),
                    (XS_NS, "minInclusive") => Facet::MinInclusive(parse_integer(f, v)?),
                    (XS_NS, "enumeration") => {
                        if let Some(Facet::Enumeration(values)) = facets.last_mut() {
                            values.push(v.to_string());
                            continue;
                        }
                        Facet::Enumeration(vec![v.to_string()])
                    }
                    _ => return Err(unsupported(f.name.lexical(), f.source_line)),
                };
                facets.push(facet);
            }
            Ok(TypeDef::Restriction { base, facets })
        } else if child.name.is(XS_NS, "list") {
            check_attributes(child, &["itemType"])?;
            let mut item = match child.attribute("itemType") {
                Some(t) => Some(self.resolve_type(t, &scope, child.source_line)?),
                None => None,
            };
            for inner in element_children(child)? {
                if !inner.name.is(XS_NS, "simpleType") || item.is_some() {
                    return Err(unsupported(inner.name.lexical(), inner.source_line));
                }
                let def = self.simple_type(inner, &extend_scope(&scope, inner), false)?;
                item = Some(self.add(def, inner.source_line));
            }
            let item = item.ok_or_else(|| invalid("list needs an item type", child.source_line))?;
            Ok(TypeDef::List { item })
        } else {
            Err(unsupported(child.name.lexical(), child.source_line))
        }
    }

    fn finish(self, preferred_prefix: Option<String>) -> Result<Schema> {
        let Compiler {
            target_namespace,
            types,
            lines,
            named,
            globals,
            attr_checks,
            element_checks,
        } = self;
        let schema = Schema {
            target_namespace,
            preferred_prefix,
            types,
            named,
            globals,
        };
        let n = schema.types.len();

        // derivation chains must terminate before variety() is trusted
        for (start, &line) in lines.iter().enumerate() {
            let mut cur = TypeId(start);
            let mut steps = 0;
            while let TypeDef::Restriction { base, .. } = schema.type_def(cur) {
                steps += 1;
                if steps > n {
                    return Err(invalid("circular type derivation", line));
                }
                cur = *base;
            }
        }

        for (i, &line) in lines.iter().enumerate() {
            let id = TypeId(i);
            match schema.type_def(id) {
                TypeDef::Restriction { base, facets } => {
                    let Some(variety) = schema.variety(*base) else {
                        return Err(invalid("restriction base must be a simple type", line));
                    };
                    for facet in facets {
                        check_facet(&schema, facet, &variety, *base, line)?;
                    }
                }
                TypeDef::List { item } => match schema.variety(*item) {
                    Some(Variety::Atomic(_)) => {}
                    Some(Variety::List(_)) => return Err(unsupported("list of list", line)),
                    None => return Err(invalid("list item type must be simple", line)),
                },
                TypeDef::Complex(ct) => {
                    if let Some(base) = ct.simple_content_base {
                        if !schema.is_simple(base) {
                            return Err(invalid("simpleContent base must be a simple type", line));
                        }
                    }
                }
                TypeDef::BuiltIn(_) => {}
            }
        }

        for (type_id, value, line) in attr_checks {
            if let Err(problems) = schema.check_simple(type_id, &value) {
                return Err(invalid(
                    format!("default \"{value}\" is not valid: {}", problems[0].1),
                    line,
                ));
            }
        }
        for (type_id, value, line) in element_checks {
            let simple = match schema.complex(type_id) {
                None => Some(type_id),
                Some(ct) => ct.simple_content_base,
            };
            let Some(simple) = simple else {
                return Err(invalid("element default requires simple content", line));
            };
            if let Err(problems) = schema.check_simple(simple, &value) {
                return Err(invalid(
                    format!("default \"{value}\" is not valid: {}", problems[0].1),
                    line,
                ));
            }
        }
        Ok(schema)
    }
}

fn push_attr(ct: &mut ComplexType, a: AttrDecl, line: usize) -> Result<()> {
    if ct.attributes.iter().any(|x| x.name == a.name) {
        return Err(invalid(format!("attribute \"{}\" declared twice", a.name), line));
    }
    ct.attributes.push(a);
    Ok(())
}

fn check_facet(schema: &Schema, facet: &Facet, variety: &Variety, base: TypeId, line: usize) -> Result<()> {
    let inapplicable = || SchemaError::InapplicableFacet {
        facet: facet.name().to_string(),
        base: schema.describe_type(base),
        line,
    };
    match (facet, variety) {
        (Facet::Length(_), Variety::List(_)) => Ok(()),
        (Facet::Length(_), Variety::Atomic(_)) => Err(inapplicable()),
        (_, Variety::List(_)) => Err(inapplicable()),
        (Facet::MaxExclusive(_) | Facet::MaxInclusive(_) | Facet::MinInclusive(_), Variety::Atomic(k)) => {
            if k.is_numeric() {
                Ok(())
            } else {
                Err(inapplicable())
            }
        }
        (Facet::Enumeration(values), Variety::Atomic(k)) => {
            for v in values {
                k.parse(v)
                    .map_err(|m| invalid(format!("enumeration value invalid: {m}"), line))?;
            }
            Ok(())
        }
    }
}
