use super::ast::{Expr, Function, LocationPath, NameTest, Step};
use super::lexer::{tokenize, Spanned, Token};
use super::{Number, XPathError};
use crate::xml::{NamespaceMap, QName, XML_NS};

/// Compiles `source`, resolving every prefix against `ns`.
pub fn compile_expr(source: &str, ns: &NamespaceMap) -> Result<Expr, XPathError> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        ns,
        end: source.len(),
    };
    if p.tokens.is_empty() {
        return Err(p.error("empty expression"));
    }
    let expr = p.or_expr()?;
    if p.pos < p.tokens.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    tokens: Vec<Spanned>,
    pos: usize,
    ns: &'a NamespaceMap,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|s| &s.token)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|s| s.offset).unwrap_or(self.end)
    }

    fn error(&self, message: impl Into<String>) -> XPathError {
        XPathError::Syntax {
            position: self.offset(),
            message: message.into(),
        }
    }

    fn eat(&mut self, t: &Token) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn or_expr(&mut self) -> Result<Expr, XPathError> {
        let mut lhs = self.and_expr()?;
        while self.eat(&Token::Or) {
            let rhs = self.and_expr()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, XPathError> {
        let mut lhs = self.equality_expr()?;
        while self.eat(&Token::And) {
            let rhs = self.equality_expr()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn equality_expr(&mut self) -> Result<Expr, XPathError> {
        let mut lhs = self.union_expr()?;
        while self.eat(&Token::Equals) {
            let rhs = self.union_expr()?;
            lhs = Expr::Equals(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn union_expr(&mut self) -> Result<Expr, XPathError> {
        let mut lhs = self.path_expr()?;
        while self.eat(&Token::Pipe) {
            let rhs = self.path_expr()?;
            lhs = Expr::Union(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn path_expr(&mut self) -> Result<Expr, XPathError> {
        match self.peek() {
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.or_expr()?;
                if !self.eat(&Token::RParen) {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(Token::Literal(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(Expr::Literal(s))
            }
            Some(Token::Number(n)) => {
                let n = n.clone();
                self.pos += 1;
                Ok(Expr::Number(Number::parse(&n)))
            }
            Some(Token::FunctionName(_)) => self.function_call(),
            Some(Token::Slash) => {
                self.pos += 1;
                let steps = if self.starts_step() {
                    self.relative_steps()?
                } else {
                    Vec::new()
                };
                Ok(Expr::Path(LocationPath { absolute: true, steps }))
            }
            Some(Token::DoubleSlash) => Err(self.error("'//' (descendant-or-self) is not supported")),
            _ if self.starts_step() => Ok(Expr::Path(LocationPath {
                absolute: false,
                steps: self.relative_steps()?,
            })),
            Some(_) => Err(self.error("expected an expression")),
            None => Err(self.error("unexpected end of expression")),
        }
    }

    fn starts_step(&self) -> bool {
        matches!(
            self.peek(),
            Some(Token::Dot | Token::DotDot | Token::At | Token::Star | Token::Name(_))
        )
    }

    fn relative_steps(&mut self) -> Result<Vec<Step>, XPathError> {
        let mut steps = vec![self.step()?];
        loop {
            match self.peek() {
                Some(Token::Slash) => {
                    self.pos += 1;
                    steps.push(self.step()?);
                }
                Some(Token::DoubleSlash) => return Err(self.error("'//' (descendant-or-self) is not supported")),
                Some(Token::LParen) => return Err(self.error("node type tests are not supported")),
                _ => return Ok(steps),
            }
        }
    }

    fn step(&mut self) -> Result<Step, XPathError> {
        let step = match self.peek() {
            Some(Token::Dot) => Step::SelfNode,
            Some(Token::DotDot) => Step::Parent,
            Some(Token::At) => {
                self.pos += 1;
                return Ok(Step::Attribute(self.name_test(false)?));
            }
            Some(Token::Star | Token::Name(_)) => return Ok(Step::Child(self.name_test(true)?)),
            Some(Token::FunctionName(_)) => return Err(self.error("node type tests are not supported")),
            _ => return Err(self.error("expected a location step")),
        };
        self.pos += 1;
        Ok(step)
    }

    fn name_test(&mut self, element: bool) -> Result<NameTest, XPathError> {
        let test = match self.peek() {
            Some(Token::Star) => NameTest::Any,
            Some(Token::Name(n)) => {
                let n = n.clone();
                NameTest::Name(self.resolve(&n, element)?)
            }
            _ => return Err(self.error("expected a name test")),
        };
        self.pos += 1;
        if self.peek() == Some(&Token::LParen) {
            return Err(self.error("predicates and node type tests are not supported"));
        }
        Ok(test)
    }

    // Unprefixed names in paths are in no namespace, as in XPath 1.0.
    fn resolve(&self, lexical: &str, _element: bool) -> Result<QName, XPathError> {
        match lexical.split_once(':') {
            Some((prefix, local)) => {
                let uri = if prefix == "xml" {
                    XML_NS.to_string()
                } else {
                    self.ns
                        .get(prefix)
                        .filter(|u| !u.is_empty())
                        .cloned()
                        .ok_or_else(|| XPathError::UnboundPrefix(prefix.to_string()))?
                };
                Ok(QName::prefixed(prefix, uri, local))
            }
            None => Ok(QName::local(lexical)),
        }
    }

    fn function_call(&mut self) -> Result<Expr, XPathError> {
        let name = match self.peek() {
            Some(Token::FunctionName(n)) => n.clone(),
            _ => unreachable!("function_call() called on a non-function token"),
        };
        let Some(func) = Function::lookup(&name) else {
            return Err(self.error(format!("unknown function \"{name}\"")));
        };
        self.pos += 1;
        if !self.eat(&Token::LParen) {
            return Err(self.error("expected '('"));
        }
        let mut args = Vec::new();
        if !self.eat(&Token::RParen) {
            loop {
                args.push(self.or_expr()?);
                if self.eat(&Token::RParen) {
                    break;
                }
                if !self.eat(&Token::Comma) {
                    return Err(self.error("expected ',' or ')'"));
                }
            }
        }
        if !func.arity().contains(&args.len()) {
            return Err(self.error(format!(
                "{}() takes {} argument(s), got {}",
                func.name(),
                describe_arity(func),
                args.len()
            )));
        }
        Ok(Expr::Call(func, args))
    }
}

fn describe_arity(func: Function) -> String {
    let r = func.arity();
    if r.start() == r.end() {
        r.start().to_string()
    } else {
        format!("{} to {}", r.start(), r.end())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stf_ns() -> NamespaceMap {
        let mut ns = NamespaceMap::new();
        ns.insert("stf".into(), "http://glacier.lbl.gov/icecube/daq/stf".into());
        ns
    }

    #[test]
    fn prefixed_single_step() {
        let e = compile_expr("stf:test", &stf_ns()).unwrap();
        assert_eq!(
            e,
            Expr::Path(LocationPath {
                absolute: false,
                steps: vec![Step::Child(NameTest::Name(QName::new(
                    "http://glacier.lbl.gov/icecube/daq/stf",
                    "test"
                )))]
            })
        );
    }

    #[test]
    fn choose_test_expression() {
        let src =
            "((0=count(../outputParameter))or(\"outputParameter\"=local-name()))\n              and(last()=position())";
        let e = compile_expr(src, &stf_ns()).unwrap();
        let Expr::And(lhs, rhs) = &e else {
            panic!("expected and, got {e:?}")
        };
        assert!(matches!(**lhs, Expr::Or(..)));
        assert!(matches!(**rhs, Expr::Equals(..)));
    }

    #[test]
    fn attribute_step() {
        let e = compile_expr("@number", &NamespaceMap::new()).unwrap();
        assert_eq!(
            e,
            Expr::Path(LocationPath {
                absolute: false,
                steps: vec![Step::Attribute(NameTest::Name(QName::local("number")))]
            })
        );
    }

    #[test]
    fn errors() {
        let ns = NamespaceMap::new();
        assert_eq!(compile_expr("q:x", &ns), Err(XPathError::UnboundPrefix("q".into())));
        assert!(matches!(compile_expr("a[1]", &ns), Err(XPathError::Syntax { .. })));
        assert!(matches!(compile_expr("//a", &ns), Err(XPathError::Syntax { .. })));
        assert!(matches!(compile_expr("name()", &ns), Err(XPathError::Syntax { .. })));
        assert!(matches!(compile_expr("count()", &ns), Err(XPathError::Syntax { .. })));
        assert!(matches!(compile_expr("a/", &ns), Err(XPathError::Syntax { .. })));
        assert!(matches!(compile_expr("", &ns), Err(XPathError::Syntax { .. })));
        assert!(matches!(compile_expr("(a", &ns), Err(XPathError::Syntax { .. })));
        assert!(matches!(compile_expr("a b", &ns), Err(XPathError::Syntax { .. })));
        assert!(matches!(compile_expr("text()", &ns), Err(XPathError::Syntax { .. })));
    }

    #[test]
    fn printed_form_recompiles() {
        let ns = stf_ns();
        for src in [
            "boolean|string|unsignedInt|unsignedLong",
            "/",
            "/stf:test/*",
            "../name",
            "count(../outputParameter) = 0 or local-name() = 'x'",
            "(a | b) = \"v\" and position() = last()",
            "1.5 = .5",
        ] {
            let e = compile_expr(src, &ns).unwrap();
            let again = compile_expr(&e.to_string(), &ns).unwrap();
            assert_eq!(e, again, "{src} printed as {e}");
        }
    }
}
