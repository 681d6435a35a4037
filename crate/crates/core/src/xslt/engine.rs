use super::{CopySource, Instruction, OutputMethod, Stylesheet, VariableDecl, VariableValue, XsltError};
use crate::xml::{escape_text, serialize_element, XmlDocument};
use crate::xpath::{evaluate, DocView, EvalContext, NodeId, NodeKind, Specificity, XPathValue};

const MAX_DEPTH: usize = 256;

/// Two or more rules of equal rank matched one node; the last one won.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbiguityWarning {
    pub node_path: String,
    pub mode: Option<String>,
    /// Indices into `Stylesheet::templates`, in declaration order.
    pub rules: Vec<usize>,
}

/// Which rule handled a node. `rule` is `None` for the built-in rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSelection {
    pub node_path: String,
    pub mode: Option<String>,
    pub rule: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformTrace {
    pub output: Vec<u8>,
    pub warnings: Vec<AmbiguityWarning>,
    pub selections: Vec<RuleSelection>,
}

pub fn transform(sheet: &Stylesheet, doc: &XmlDocument) -> Result<Vec<u8>, XsltError> {
    Ok(transform_traced(sheet, doc)?.output)
}

/// Like [`transform`], also reporting rule selections and tie warnings.
pub fn transform_traced(sheet: &Stylesheet, doc: &XmlDocument) -> Result<TransformTrace, XsltError> {
    let view = DocView::new(doc);
    let mut engine = Engine {
        sheet,
        view: &view,
        out: String::new(),
        globals: Vec::new(),
        warnings: Vec::new(),
        selections: Vec::new(),
        depth: 0,
    };
    let root = view.root();
    for decl in &sheet.variables {
        let bound = engine.bind(decl, root, 1, 1, &mut Vec::new())?;
        engine.globals.push((decl.name.clone(), bound));
    }
    engine.process(root, 1, 1, None)?;
    Ok(TransformTrace {
        output: engine.out.into_bytes(),
        warnings: engine.warnings,
        selections: engine.selections,
    })
}

#[derive(Clone, Debug)]
enum Bound {
    Value(XPathValue),
    Fragment(String),
}

type Locals = Vec<(String, Bound)>;

struct Engine<'s, 'v, 'd> {
    sheet: &'s Stylesheet,
    view: &'v DocView<'d>,
    out: String,
    globals: Locals,
    warnings: Vec<AmbiguityWarning>,
    selections: Vec<RuleSelection>,
    depth: usize,
}

fn eval_error(e: crate::xpath::XPathError) -> XsltError {
    XsltError::Evaluation(e.to_string())
}

impl Engine<'_, '_, '_> {
    fn emit_text(&mut self, s: &str) {
        match self.sheet.output_method {
            OutputMethod::Text => self.out.push_str(s),
            OutputMethod::Xml => escape_text(s, &mut self.out),
        }
    }

    fn emit_node(&mut self, node: NodeId) {
        match (self.sheet.output_method, self.view.kind(node)) {
            (OutputMethod::Xml, NodeKind::Element(e)) => self.out.push_str(&serialize_element(e)),
            (OutputMethod::Xml, NodeKind::Document) => {
                let root = self.view.element(self.view.document_element()).expect("element");
                self.out.push_str(&serialize_element(root));
            }
            _ => {
                let text = self.view.string_value(node);
                self.emit_text(&text);
            }
        }
    }

    fn select_rule(&mut self, node: NodeId, mode: Option<&str>) -> Option<usize> {
        let mut best: Option<(Specificity, Vec<usize>)> = None;
        for (i, t) in self.sheet.templates.iter().enumerate() {
            if t.mode.as_deref() != mode {
                continue;
            }
            let Some(spec) = t.pattern.best_match(self.view, node) else {
                continue;
            };
            match &mut best {
                Some((b, ties)) if spec == *b => ties.push(i),
                Some((b, _)) if spec < *b => {}
                _ => best = Some((spec, vec![i])),
            }
        }
        let (_, ties) = best?;
        if ties.len() > 1 {
            self.warnings.push(AmbiguityWarning {
                node_path: self.view.path(node),
                mode: mode.map(str::to_string),
                rules: ties.clone(),
            });
        }
        ties.last().copied()
    }

    fn process(&mut self, node: NodeId, position: usize, size: usize, mode: Option<&str>) -> Result<(), XsltError> {
        if self.depth >= MAX_DEPTH {
            return Err(XsltError::Evaluation(format!(
                "template recursion deeper than {MAX_DEPTH} at {}",
                self.view.path(node)
            )));
        }
        self.depth += 1;
        let rule = self.select_rule(node, mode);
        self.selections.push(RuleSelection {
            node_path: self.view.path(node),
            mode: mode.map(str::to_string),
            rule,
        });
        let result = match rule {
            Some(i) => {
                let body = &self.sheet.templates[i].body;
                self.run(body, node, position, size, &mut Vec::new())
            }
            None => match self.view.kind(node) {
                NodeKind::Document | NodeKind::Element(_) => {
                    let children = self.view.children(node).to_vec();
                    self.apply(&children, mode)
                }
                NodeKind::Text(_) | NodeKind::Attribute(_) => {
                    let text = self.view.string_value(node);
                    self.emit_text(&text);
                    Ok(())
                }
            },
        };
        self.depth -= 1;
        result
    }

    fn apply(&mut self, nodes: &[NodeId], mode: Option<&str>) -> Result<(), XsltError> {
        for (i, &n) in nodes.iter().enumerate() {
            self.process(n, i + 1, nodes.len(), mode)?;
        }
        Ok(())
    }

    fn lookup(&self, name: &str, locals: &Locals) -> Result<Bound, XsltError> {
        locals
            .iter()
            .rev()
            .chain(self.globals.iter().rev())
            .find(|(n, _)| n == name)
            .map(|(_, b)| b.clone())
            .ok_or_else(|| XsltError::Evaluation(format!("variable \"${name}\" is not bound")))
    }

    fn bind(
        &mut self,
        decl: &VariableDecl,
        node: NodeId,
        position: usize,
        size: usize,
        locals: &mut Locals,
    ) -> Result<Bound, XsltError> {
        match &decl.value {
            VariableValue::Select(expr) => {
                let ctx = EvalContext::at(self.view, node, position, size);
                Ok(Bound::Value(evaluate(expr, &ctx).map_err(eval_error)?))
            }
            VariableValue::Content(body) => {
                let saved = std::mem::take(&mut self.out);
                let result = self.run(body, node, position, size, &mut locals.clone());
                let fragment = std::mem::replace(&mut self.out, saved);
                result?;
                Ok(Bound::Fragment(fragment))
            }
        }
    }

    fn run(
        &mut self,
        body: &[Instruction],
        node: NodeId,
        position: usize,
        size: usize,
        locals: &mut Locals,
    ) -> Result<(), XsltError> {
        let mark = locals.len();
        for instruction in body {
            match instruction {
                Instruction::LiteralText(s) | Instruction::Text(s) => self.emit_text(s),
                Instruction::ApplyTemplates { select, mode } => {
                    let nodes = match select {
                        None => self.view.children(node).to_vec(),
                        Some(expr) => {
                            let ctx = EvalContext::at(self.view, node, position, size);
                            evaluate(expr, &ctx).map_err(eval_error)?.into_nodes().ok_or_else(|| {
                                XsltError::Evaluation(format!("apply-templates select=\"{expr}\" is not a node-set"))
                            })?
                        }
                    };
                    self.apply(&nodes, mode.as_deref())?;
                }
                Instruction::CopyOf(source) => {
                    let bound = match source {
                        CopySource::Variable(name) => self.lookup(name, locals)?,
                        CopySource::Expr(expr) => {
                            let ctx = EvalContext::at(self.view, node, position, size);
                            Bound::Value(evaluate(expr, &ctx).map_err(eval_error)?)
                        }
                    };
                    match bound {
                        Bound::Fragment(s) => self.out.push_str(&s),
                        Bound::Value(XPathValue::NodeSet(nodes)) => {
                            for n in nodes {
                                self.emit_node(n);
                            }
                        }
                        Bound::Value(v) => {
                            let s = v.to_string_value(self.view);
                            self.emit_text(&s);
                        }
                    }
                }
                Instruction::Choose { branches, otherwise } => {
                    let mut chosen = otherwise.as_ref();
                    for (test, branch) in branches {
                        let ctx = EvalContext::at(self.view, node, position, size);
                        if evaluate(test, &ctx).map_err(eval_error)?.to_boolean() {
                            chosen = Some(branch);
                            break;
                        }
                    }
                    if let Some(branch) = chosen {
                        self.run(branch, node, position, size, locals)?;
                    }
                }
                Instruction::Variable(decl) => {
                    let bound = self.bind(decl, node, position, size, locals)?;
                    locals.push((decl.name.clone(), bound));
                }
            }
        }
        locals.truncate(mark);
        Ok(())
    }
}
