use super::{
    CopySource, Instruction, OutputMethod, Stylesheet, TemplateRule, VariableDecl, VariableValue, XsltError, XSL_NS,
};
use crate::xml::{extend_scope, is_ncname, NamespaceMap, Node, XmlDocument, XmlElement};
use crate::xpath::{compile_expr, Expr, Pattern};

type Result<T> = std::result::Result<T, XsltError>;

/// Compiles a stylesheet document.
pub fn load_stylesheet(doc: &XmlDocument) -> Result<Stylesheet> {
    let root = &doc.root;
    if !(root.name.is(XSL_NS, "stylesheet") || root.name.is(XSL_NS, "transform")) {
        return Err(unsupported(root));
    }
    let scope = extend_scope(&NamespaceMap::new(), root);
    let mut sheet = Stylesheet {
        templates: Vec::new(),
        variables: Vec::new(),
        output_method: OutputMethod::Xml,
        output_indent: false,
    };
    let mut c = Compiler { globals: Vec::new() };

    // Globals are visible in every template, so collect their names first.
    for child in root.elements() {
        if child.name.is(XSL_NS, "variable") {
            let name = variable_name(child)?;
            if c.globals.contains(&name) {
                return Err(invalid(format!("variable \"{name}\" is declared twice"), child));
            }
            c.globals.push(name);
        }
    }

    for node in &root.children {
        let child = match node {
            Node::Text(t) if t.trim().is_empty() => continue,
            Node::Text(_) => return Err(invalid("text is not allowed at the top level", root)),
            Node::Element(e) => e,
        };
        let scope = extend_scope(&scope, child);
        if child.name.namespace_uri != XSL_NS {
            // top-level elements in other namespaces are user data
            continue;
        }
        match child.name.local_name.as_str() {
            "output" => {
                check_attributes(child, &["method", "indent", "encoding"])?;
                sheet.output_method = match child.attribute("method").unwrap_or("xml") {
                    "text" => OutputMethod::Text,
                    "xml" => OutputMethod::Xml,
                    other => return Err(invalid(format!("unsupported output method \"{other}\""), child)),
                };
                sheet.output_indent = child.attribute("indent") == Some("yes");
            }
            "variable" => {
                let decl = c.variable(child, &scope, &[])?;
                sheet.variables.push(decl);
            }
            "template" => sheet.templates.push(c.template(child, &scope)?),
            _ => return Err(unsupported(child)),
        }
    }
    Ok(sheet)
}

struct Compiler {
    globals: Vec<String>,
}

fn unsupported(e: &XmlElement) -> XsltError {
    XsltError::UnsupportedInstruction {
        name: e.name.lexical(),
        line: e.source_line,
    }
}

fn invalid(message: impl Into<String>, e: &XmlElement) -> XsltError {
    XsltError::Invalid {
        message: message.into(),
        line: e.source_line,
    }
}

fn check_attributes(e: &XmlElement, allowed: &[&str]) -> Result<()> {
    for a in e.plain_attributes() {
        if !(a.name.namespace_uri.is_empty() && allowed.contains(&a.name.local_name.as_str())) {
            return Err(XsltError::UnsupportedInstruction {
                name: format!("{}@{}", e.name.lexical(), a.name.lexical()),
                line: e.source_line,
            });
        }
    }
    Ok(())
}

fn required<'e>(e: &'e XmlElement, attr: &str) -> Result<&'e str> {
    e.attribute(attr)
        .ok_or_else(|| invalid(format!("{} requires a \"{attr}\" attribute", e.name.lexical()), e))
}

fn variable_name(e: &XmlElement) -> Result<String> {
    let name = required(e, "name")?;
    if !is_ncname(name) {
        return Err(invalid(format!("\"{name}\" is not a valid variable name"), e));
    }
    Ok(name.to_string())
}

fn expr(src: &str, scope: &NamespaceMap, e: &XmlElement) -> Result<Expr> {
    compile_expr(src, scope).map_err(|source| XsltError::XPath {
        source,
        line: e.source_line,
    })
}

impl Compiler {
    fn template(&self, e: &XmlElement, scope: &NamespaceMap) -> Result<TemplateRule> {
        check_attributes(e, &["match", "mode"])?;
        let src = required(e, "match")?;
        let pattern = Pattern::from_expr(&expr(src, scope, e)?).map_err(|source| XsltError::XPath {
            source,
            line: e.source_line,
        })?;
        let mut locals = Vec::new();
        Ok(TemplateRule {
            pattern,
            mode: e.attribute("mode").map(str::to_string),
            body: self.body(e, scope, &mut locals)?,
            line: e.source_line,
        })
    }

    fn variable(&self, e: &XmlElement, scope: &NamespaceMap, locals: &[String]) -> Result<VariableDecl> {
        check_attributes(e, &["name", "select"])?;
        let name = variable_name(e)?;
        let value = match e.attribute("select") {
            Some(src) => {
                if e.elements().next().is_some() || !e.has_only_whitespace_text() {
                    return Err(invalid(format!("variable \"{name}\" has both select and content"), e));
                }
                VariableValue::Select(expr(src, scope, e)?)
            }
            None => VariableValue::Content(self.body(e, scope, &mut locals.to_vec())?),
        };
        Ok(VariableDecl {
            name,
            value,
            line: e.source_line,
        })
    }

    /// Compiles element content. A local declared here is visible to its
    /// later siblings and goes out of scope when the body ends.
    fn body(&self, e: &XmlElement, scope: &NamespaceMap, locals: &mut Vec<String>) -> Result<Vec<Instruction>> {
        let mark = locals.len();
        let mut out = Vec::new();
        for node in &e.children {
            let child = match node {
                Node::Text(t) if t.chars().all(|c| matches!(c, ' ' | '\t' | '\n' | '\r')) => continue,
                Node::Text(t) => {
                    out.push(Instruction::LiteralText(t.clone()));
                    continue;
                }
                Node::Element(child) => child,
            };
            if child.name.namespace_uri != XSL_NS {
                return Err(unsupported(child));
            }
            let scope = extend_scope(scope, child);
            let instruction = match child.name.local_name.as_str() {
                "text" => {
                    check_attributes(child, &["disable-output-escaping"])?;
                    if let Some(inner) = child.elements().next() {
                        return Err(unsupported(inner));
                    }
                    Instruction::Text(child.string_value())
                }
                "apply-templates" => {
                    check_attributes(child, &["select", "mode"])?;
                    if let Some(inner) = child.elements().next() {
                        return Err(unsupported(inner));
                    }
                    let select = match child.attribute("select") {
                        Some(src) => Some(expr(src, &scope, child)?),
                        None => None,
                    };
                    Instruction::ApplyTemplates {
                        select,
                        mode: child.attribute("mode").map(str::to_string),
                    }
                }
                "copy-of" => {
                    check_attributes(child, &["select"])?;
                    let src = required(child, "select")?.trim();
                    match src.strip_prefix('$') {
                        Some(name) => {
                            if !locals.iter().any(|l| l == name) && !self.globals.iter().any(|g| g == name) {
                                return Err(XsltError::UndeclaredVariable {
                                    name: name.to_string(),
                                    line: child.source_line,
                                });
                            }
                            Instruction::CopyOf(CopySource::Variable(name.to_string()))
                        }
                        None => Instruction::CopyOf(CopySource::Expr(expr(src, &scope, child)?)),
                    }
                }
                "choose" => self.choose(child, &scope, locals)?,
                "variable" => {
                    let decl = self.variable(child, &scope, locals)?;
                    if locals[mark..].contains(&decl.name) {
                        return Err(invalid(format!("variable \"{}\" is declared twice", decl.name), child));
                    }
                    locals.push(decl.name.clone());
                    Instruction::Variable(decl)
                }
                _ => return Err(unsupported(child)),
            };
            out.push(instruction);
        }
        locals.truncate(mark);
        Ok(out)
    }

    fn choose(&self, e: &XmlElement, scope: &NamespaceMap, locals: &mut Vec<String>) -> Result<Instruction> {
        check_attributes(e, &[])?;
        if !e.has_only_whitespace_text() {
            return Err(invalid("text is not allowed directly inside xsl:choose", e));
        }
        let mut branches = Vec::new();
        let mut otherwise = None;
        for child in e.elements() {
            let scope = extend_scope(scope, child);
            if child.name.is(XSL_NS, "when") && otherwise.is_none() {
                check_attributes(child, &["test"])?;
                let test = expr(required(child, "test")?, &scope, child)?;
                branches.push((test, self.body(child, &scope, locals)?));
            } else if child.name.is(XSL_NS, "otherwise") && otherwise.is_none() {
                check_attributes(child, &[])?;
                otherwise = Some(self.body(child, &scope, locals)?);
            } else {
                return Err(unsupported(child));
            }
        }
        if branches.is_empty() {
            return Err(invalid("xsl:choose needs at least one xsl:when", e));
        }
        Ok(Instruction::Choose { branches, otherwise })
    }
}
