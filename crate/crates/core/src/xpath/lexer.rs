use super::XPathError;
use crate::xml::{is_name_char, is_name_start_char};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Token {
    LParen,
    RParen,
    Slash,
    DoubleSlash,
    Dot,
    DotDot,
    At,
    Star,
    Pipe,
    Equals,
    Comma,
    And,
    Or,
    Literal(String),
    Number(String),
    /// NCName or `prefix:local`.
    Name(String),
    /// A name immediately followed (after optional whitespace) by `(`.
    FunctionName(String),
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub token: Token,
    pub offset: usize,
}

fn syntax(position: usize, message: impl Into<String>) -> XPathError {
    XPathError::Syntax {
        position,
        message: message.into(),
    }
}

/// A preceding token after which a name must be read as an operator name.
fn ends_operand(prev: Option<&Token>) -> bool {
    matches!(
        prev,
        Some(
            Token::RParen
                | Token::Dot
                | Token::DotDot
                | Token::Star
                | Token::Literal(_)
                | Token::Number(_)
                | Token::Name(_)
        )
    )
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Spanned>, XPathError> {
    let mut out: Vec<Spanned> = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (offset, c) = chars[i];
        let prev = out.last().map(|s| &s.token);
        let simple = match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            '|' => Some(Token::Pipe),
            '=' => Some(Token::Equals),
            ',' => Some(Token::Comma),
            '@' => Some(Token::At),
            '*' => {
                if ends_operand(prev) {
                    return Err(syntax(offset, "multiplication is not supported"));
                }
                Some(Token::Star)
            }
            _ => None,
        };
        if let Some(token) = simple {
            out.push(Spanned { token, offset });
            i += 1;
            continue;
        }
        match c {
            '/' => {
                if chars.get(i + 1).map(|p| p.1) == Some('/') {
                    out.push(Spanned {
                        token: Token::DoubleSlash,
                        offset,
                    });
                    i += 2;
                } else {
                    out.push(Spanned {
                        token: Token::Slash,
                        offset,
                    });
                    i += 1;
                }
            }
            '.' => {
                let next = chars.get(i + 1).map(|p| p.1);
                if next == Some('.') {
                    out.push(Spanned {
                        token: Token::DotDot,
                        offset,
                    });
                    i += 2;
                } else if next.is_some_and(|n| n.is_ascii_digit()) {
                    let start = i;
                    i += 1;
                    while i < chars.len() && chars[i].1.is_ascii_digit() {
                        i += 1;
                    }
                    out.push(Spanned {
                        token: Token::Number(collect(&chars, start, i)),
                        offset,
                    });
                } else {
                    out.push(Spanned {
                        token: Token::Dot,
                        offset,
                    });
                    i += 1;
                }
            }
            '"' | '\'' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].1 != c {
                    j += 1;
                }
                if j >= chars.len() {
                    return Err(syntax(offset, "unterminated string literal"));
                }
                out.push(Spanned {
                    token: Token::Literal(collect(&chars, start, j)),
                    offset,
                });
                i = j + 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].1.is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i].1 == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].1.is_ascii_digit() {
                        i += 1;
                    }
                }
                out.push(Spanned {
                    token: Token::Number(collect(&chars, start, i)),
                    offset,
                });
            }
            '$' => return Err(syntax(offset, "variable references are not supported")),
            c if is_name_start_char(c) && c != ':' => {
                let start = i;
                while i < chars.len() && is_name_char(chars[i].1) && chars[i].1 != ':' {
                    i += 1;
                }
                // optional `:local` part
                if i + 1 < chars.len()
                    && chars[i].1 == ':'
                    && is_name_start_char(chars[i + 1].1)
                    && chars[i + 1].1 != ':'
                {
                    i += 1;
                    while i < chars.len() && is_name_char(chars[i].1) && chars[i].1 != ':' {
                        i += 1;
                    }
                } else if i < chars.len() && chars[i].1 == ':' {
                    return Err(syntax(
                        chars[i].0,
                        "axis specifiers and prefix wildcards are not supported",
                    ));
                }
                let name = collect(&chars, start, i);
                let token = if ends_operand(prev) {
                    match name.as_str() {
                        "and" => Token::And,
                        "or" => Token::Or,
                        _ => return Err(syntax(offset, format!("unexpected name \"{name}\""))),
                    }
                } else {
                    let mut j = i;
                    while j < chars.len() && matches!(chars[j].1, ' ' | '\t' | '\n' | '\r') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].1 == '(' {
                        Token::FunctionName(name)
                    } else {
                        Token::Name(name)
                    }
                };
                out.push(Spanned { token, offset });
            }
            c => return Err(syntax(offset, format!("unexpected character '{c}'"))),
        }
    }
    Ok(out)
}

fn collect(chars: &[(usize, char)], from: usize, to: usize) -> String {
    chars[from..to].iter().map(|p| p.1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &str) -> Vec<Token> {
        tokenize(s).unwrap().into_iter().map(|t| t.token).collect()
    }

    #[test]
    fn operator_names_after_operands() {
        assert_eq!(
            kinds("(a)or(b)"),
            vec![
                Token::LParen,
                Token::Name("a".into()),
                Token::RParen,
                Token::Or,
                Token::LParen,
                Token::Name("b".into()),
                Token::RParen
            ]
        );
        // `and` at the start is a name test for an element called "and"
        assert_eq!(kinds("and"), vec![Token::Name("and".into())]);
    }

    #[test]
    fn function_names() {
        assert_eq!(
            kinds("local-name ()"),
            vec![Token::FunctionName("local-name".into()), Token::LParen, Token::RParen]
        );
    }

    #[test]
    fn qualified_names_and_paths() {
        assert_eq!(
            kinds("stf:test/*/..//@x"),
            vec![
                Token::Name("stf:test".into()),
                Token::Slash,
                Token::Star,
                Token::Slash,
                Token::DotDot,
                Token::DoubleSlash,
                Token::At,
                Token::Name("x".into())
            ]
        );
    }

    #[test]
    fn rejects_variables() {
        assert!(matches!(tokenize("$x"), Err(XPathError::Syntax { position: 0, .. })));
    }
}
