//! Lexer and recursive-descent parser for the symbol language.

use num_complex::Complex64 as Cx;

use super::SymbolExpr;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum TokenKind {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub offset: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        match c {
            '+' | '-' | '*' | '/' | '^' => {
                tokens.push(Token {
                    kind: TokenKind::Op(c),
                    lexeme: c.to_string(),
                    offset: start,
                });
                i += 1;
            }
            '(' => {
                tokens.push(Token {
                    kind: TokenKind::LParen,
                    lexeme: "(".into(),
                    offset: start,
                });
                i += 1;
            }
            ')' => {
                tokens.push(Token {
                    kind: TokenKind::RParen,
                    lexeme: ")".into(),
                    offset: start,
                });
                i += 1;
            }
            ',' => {
                tokens.push(Token {
                    kind: TokenKind::Comma,
                    lexeme: ",".into(),
                    offset: start,
                });
                i += 1;
            }
            '0'..='9' | '.' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j < bytes.len() && bytes[j] == b'.' {
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                // exponent part only if followed by a digit (with optional sign)
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let lexeme = &text[i..j];
                let value: f64 = lexeme.parse().map_err(|_| Error::SyntaxError {
                    offset: start,
                    message: format!("malformed number `{lexeme}`"),
                })?;
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    lexeme: lexeme.to_string(),
                    offset: start,
                });
                i = j;
            }
            'a'..='z' | 'A'..='Z' => {
                let mut j = i;
                while j < bytes.len()
                    && ((bytes[j] as char).is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                let lexeme = &text[i..j];
                tokens.push(Token {
                    kind: TokenKind::Ident(lexeme.to_string()),
                    lexeme: lexeme.to_string(),
                    offset: start,
                });
                i = j;
            }
            _ => {
                return Err(Error::SyntaxError {
                    offset: start,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end_offset: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> usize {
        self.peek().map(|t| t.offset).unwrap_or(self.end_offset)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        if let Some(Token {
            kind: TokenKind::Op(c),
            ..
        }) = self.peek()
        {
            if ops.contains(c) {
                let c = *c;
                self.pos += 1;
                return Some(c);
            }
        }
        None
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::RParen,
                ..
            }) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(Error::SyntaxError {
                offset: self.here(),
                message: "expected `)`".into(),
            }),
        }
    }

    fn expr(&mut self) -> Result<SymbolExpr> {
        let mut acc = self.term()?;
        while let Some(op) = self.eat_op(&['+', '-']) {
            let rhs = self.term()?;
            acc = if op == '+' {
                SymbolExpr::Add(Box::new(acc), Box::new(rhs))
            } else {
                SymbolExpr::Sub(Box::new(acc), Box::new(rhs))
            };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<SymbolExpr> {
        let mut acc = self.factor()?;
        while let Some(op) = self.eat_op(&['*', '/']) {
            let rhs = self.factor()?;
            acc = if op == '*' {
                SymbolExpr::Mul(Box::new(acc), Box::new(rhs))
            } else {
                SymbolExpr::Div(Box::new(acc), Box::new(rhs))
            };
        }
        Ok(acc)
    }

    /// `factor := '-' factor | atom ('^' integer)?`; the power binds tighter
    /// than unary minus.
    fn factor(&mut self) -> Result<SymbolExpr> {
        if self.eat_op(&['-']).is_some() {
            return Ok(SymbolExpr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            let off = self.here();
            match self.bump() {
                Some(Token {
                    kind: TokenKind::Number(v),
                    lexeme,
                    ..
                }) => {
                    if v.fract() != 0.0 || *v < 0.0 || *v > u32::MAX as f64 {
                        return Err(Error::BadExponent {
                            offset: off,
                            message: format!(
                                "exponent `{lexeme}` must be a nonnegative integer"
                            ),
                        });
                    }
                    return Ok(SymbolExpr::Pow(Box::new(base), *v as u32));
                }
                _ => {
                    return Err(Error::BadExponent {
                        offset: off,
                        message: "exponent must be a nonnegative integer".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<SymbolExpr> {
        let off = self.here();
        let token = match self.bump() {
            Some(t) => t.clone(),
            None => {
                return Err(Error::SyntaxError {
                    offset: off,
                    message: "expected an expression".into(),
                })
            }
        };
        match token.kind {
            TokenKind::Number(v) => Ok(SymbolExpr::Const(Cx::new(v, 0.0))),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokenKind::Ident(name) => match name.as_str() {
                "i" => Ok(SymbolExpr::Const(Cx::new(0.0, 1.0))),
                "pi" => Ok(SymbolExpr::Const(Cx::new(std::f64::consts::PI, 0.0))),
                "re" | "im" | "abs" | "conj" | "exp" => {
                    let args = self.call_args(&name, off)?;
                    if args.len() != 1 {
                        return Err(Error::BadArity {
                            offset: off,
                            message: format!(
                                "`{name}` takes exactly one argument, got {}",
                                args.len()
                            ),
                        });
                    }
                    let arg = Box::new(args.into_iter().next().unwrap());
                    Ok(match name.as_str() {
                        "re" => SymbolExpr::Re(arg),
                        "im" => SymbolExpr::Im(arg),
                        "abs" => SymbolExpr::Abs(arg),
                        "conj" => SymbolExpr::Conj(arg),
                        _ => SymbolExpr::Exp(arg),
                    })
                }
                "bump" => {
                    let args = self.call_args(&name, off)?;
                    if args.len() < 2 {
                        return Err(Error::BadArity {
                            offset: off,
                            message: format!(
                                "`bump` takes center coordinates and a radius, got {} arguments",
                                args.len()
                            ),
                        });
                    }
                    let mut consts = Vec::with_capacity(args.len());
                    for a in &args {
                        if a.max_var_index() != 0 {
                            return Err(Error::SyntaxError {
                                offset: off,
                                message: "bump arguments must be constant expressions".into(),
                            });
                        }
                        consts.push(a.eval(&[]).map_err(|_| Error::SyntaxError {
                            offset: off,
                            message: "bump arguments must be evaluable constants".into(),
                        })?);
                    }
                    let radius = consts.pop().unwrap();
                    if radius.im != 0.0 || !(radius.re > 0.0) {
                        return Err(Error::SyntaxError {
                            offset: off,
                            message: "bump radius must be a positive real".into(),
                        });
                    }
                    Ok(SymbolExpr::Bump {
                        center: consts,
                        radius: radius.re,
                    })
                }
                _ => {
                    if let Some(rest) = name.strip_prefix('z') {
                        if rest.len() == 1 && rest.as_bytes()[0].is_ascii_digit() {
                            let k = (rest.as_bytes()[0] - b'0') as usize;
                            if k >= 1 {
                                return Ok(SymbolExpr::Var(k));
                            }
                        }
                    }
                    Err(Error::UnknownIdentifier { offset: off, name })
                }
            },
            TokenKind::Op(c) => Err(Error::SyntaxError {
                offset: off,
                message: format!("unexpected operator `{c}`"),
            }),
            TokenKind::RParen => Err(Error::SyntaxError {
                offset: off,
                message: "unexpected `)`".into(),
            }),
            TokenKind::Comma => Err(Error::SyntaxError {
                offset: off,
                message: "unexpected `,`".into(),
            }),
        }
    }

    fn call_args(&mut self, name: &str, off: usize) -> Result<Vec<SymbolExpr>> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::LParen,
                ..
            }) => {
                self.pos += 1;
            }
            _ => {
                return Err(Error::BadArity {
                    offset: off,
                    message: format!("`{name}` must be called with parentheses"),
                })
            }
        }
        let mut args = vec![self.expr()?];
        while let Some(Token {
            kind: TokenKind::Comma,
            ..
        }) = self.peek()
        {
            self.pos += 1;
            args.push(self.expr()?);
        }
        self.expect_rparen()?;
        Ok(args)
    }
}

/// Parse a symbol expression. Errors carry byte offsets into `text`.
pub fn parse(text: &str) -> Result<SymbolExpr> {
    if text.trim().is_empty() {
        return Err(Error::SyntaxError {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        end_offset: text.len(),
    };
    let expr = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(Error::SyntaxError {
            offset: t.offset,
            message: format!("unexpected trailing `{}`", t.lexeme),
        });
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_example() {
        let e = parse("1 - abs(z1)^2").unwrap();
        assert_eq!(
            e,
            SymbolExpr::Sub(
                Box::new(SymbolExpr::Const(Cx::new(1.0, 0.0))),
                Box::new(SymbolExpr::Pow(
                    Box::new(SymbolExpr::Abs(Box::new(SymbolExpr::Var(1)))),
                    2
                ))
            )
        );
    }

    #[test]
    fn bump_node() {
        let e = parse("bump(0, 0.5)").unwrap();
        assert_eq!(
            e,
            SymbolExpr::Bump {
                center: vec![Cx::new(0.0, 0.0)],
                radius: 0.5
            }
        );
        // two-dimensional center
        let e = parse("bump(1.15, 0, 0.25)").unwrap();
        assert_eq!(
            e,
            SymbolExpr::Bump {
                center: vec![Cx::new(1.15, 0.0), Cx::new(0.0, 0.0)],
                radius: 0.25
            }
        );
    }

    #[test]
    fn error_offsets() {
        match parse("z1 +") {
            Err(Error::SyntaxError { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse("z10 + 1") {
            Err(Error::UnknownIdentifier { offset, name }) => {
                assert_eq!(offset, 0);
                assert_eq!(name, "z10");
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
        match parse("exp(1, 2)") {
            Err(Error::BadArity { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("expected bad arity, got {other:?}"),
        }
        match parse("z1^-2") {
            Err(Error::BadExponent { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected bad exponent, got {other:?}"),
        }
        match parse("z1^2.5") {
            Err(Error::BadExponent { .. }) => {}
            other => panic!("expected bad exponent, got {other:?}"),
        }
        match parse("bump(0.5)") {
            Err(Error::BadArity { .. }) => {}
            other => panic!("expected bad arity, got {other:?}"),
        }
    }

    #[test]
    fn precedence_pow_over_neg() {
        // -z1^2 must parse as -(z1^2)
        let e = parse("-z1^2").unwrap();
        assert_eq!(
            e,
            SymbolExpr::Neg(Box::new(SymbolExpr::Pow(Box::new(SymbolExpr::Var(1)), 2)))
        );
        let v = e.eval(&[Cx::new(0.0, 1.0)]).unwrap();
        // (i)^2 = -1, negated = 1
        assert!((v - Cx::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn left_associativity() {
        let e = parse("8 - 4 - 2").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), Cx::new(2.0, 0.0));
        let e = parse("8 / 4 / 2").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), Cx::new(1.0, 0.0));
    }

    #[test]
    fn round_trip_corpus() {
        let corpus = [
            "1 - abs(z1)^2",
            "bump(0, 0.5)",
            "(1 - abs(z1)^2) * re(z1)",
            "abs(z1)^2",
            "re(z1) + 1.5",
            "z1^3 - 2 * z1",
            "conj(z1) * z1",
            "exp(z1)",
            "exp(1 - 1 / (1 - abs(z1)^2))",
            "i * z1",
            "pi * abs(z2)^2",
            "z1 * z2 - z2^2",
            "im(z1)^2 + re(z2)^2",
            "-z1",
            "-(z1 + z2)",
            "1 / (2 + abs(z1)^2)",
            "bump(1.15, 0, 0.25)",
            "(z1 + z2) * (z1 - z2)",
            "2.5e-1 * z1",
            "abs(z1 * z2)^4",
        ];
        for text in corpus {
            let e = parse(text).unwrap();
            let printed = e.to_string();
            let again = parse(&printed)
                .unwrap_or_else(|err| panic!("reparse of `{printed}` failed: {err}"));
            assert_eq!(e, again, "round trip failed for `{text}` -> `{printed}`");
        }
    }
}
