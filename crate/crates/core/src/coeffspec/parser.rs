//! Recursive-descent parser for coefficient expressions.
//!
//! Grammar (usual precedence, `^` right-associative and tighter than unary
//! minus, so `-x^2` is `-(x^2)` and `x^-1` is accepted):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'x' | 'pi' | 'inf' | param | func '(' expr ')' | '(' expr ')'
//! func  := abs | exp | log | ln | sqrt
//! ```

use super::expr::Expr;
use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn tokenize(src: &str, line: usize, col0: usize) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit())
        {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| ParseError {
                line,
                column: col0 + start + 1,
                message: format!("malformed number `{text}`"),
            })?;
            out.push(Token {
                tok: Tok::Num(value),
                offset: start,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                offset: start,
            });
        } else if "+-*/^(),=".contains(c) {
            out.push(Token {
                tok: Tok::Op(c),
                offset: start,
            });
            i += 1;
        } else {
            return Err(ParseError {
                line,
                column: col0 + start + 1,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

/// Name resolution for parameters referenced by an expression.
pub trait ParamResolver {
    fn resolve(&self, name: &str) -> Option<usize>;
}

impl<F: Fn(&str) -> Option<usize>> ParamResolver for F {
    fn resolve(&self, name: &str) -> Option<usize> {
        self(name)
    }
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src_len: usize,
    line: usize,
    col0: usize,
    params: &'a dyn ParamResolver,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|t| t.offset)
            .unwrap_or(self.src_len)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.col0 + self.offset() + 1,
            message: message.into(),
        }
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = lhs + self.term()?;
            } else if self.eat_op('-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = lhs * self.unary()?;
            } else if self.eat_op('/') {
                lhs = lhs / self.unary()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_op('-') {
            return Ok(match self.unary()? {
                Expr::Const(c) => Expr::Const(-c),
                e => -e,
            });
        }
        if self.eat_op('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat_op('^') {
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat_op(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Op('(')) {
                    let wrap: fn(Box<Expr>) -> Expr = match name.as_str() {
                        "abs" => Expr::Abs,
                        "exp" => Expr::Exp,
                        "log" | "ln" => Expr::Log,
                        "sqrt" => Expr::Sqrt,
                        _ => {
                            self.pos -= 1;
                            return Err(self.error(format!("unknown function `{name}`")));
                        }
                    };
                    self.pos += 1;
                    let arg = self.expr()?;
                    if !self.eat_op(')') {
                        return Err(self.error("expected `)` after function argument"));
                    }
                    return Ok(wrap(Box::new(arg)));
                }
                match name.as_str() {
                    "x" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                    "inf" => Ok(Expr::Const(f64::INFINITY)),
                    _ => match self.params.resolve(&name) {
                        Some(slot) => Ok(Expr::param(slot, &name)),
                        None => {
                            self.pos -= 1;
                            Err(self.error(format!("unknown identifier `{name}`")))
                        }
                    },
                }
            }
            Some(Tok::Op(c)) => Err(self.error(format!("unexpected `{c}`"))),
            None => Err(self.error("unexpected end of expression")),
        }
    }
}

/// Parse a complete expression; trailing tokens are an error.
pub fn parse_expr(src: &str, params: &dyn ParamResolver) -> Result<Expr, ParseError> {
    parse_expr_at(src, params, 1, 0)
}

pub(crate) fn parse_expr_at(
    src: &str,
    params: &dyn ParamResolver,
    line: usize,
    col0: usize,
) -> Result<Expr, ParseError> {
    let (expr, consumed) = parse_expr_prefix(src, params, line, col0)?;
    if src[consumed..].trim().is_empty() {
        Ok(expr)
    } else {
        Err(ParseError {
            line,
            column: col0 + consumed + 1,
            message: format!("unexpected trailing input `{}`", src[consumed..].trim()),
        })
    }
}

/// Parse the longest expression prefix of `src`; returns it with the
/// number of bytes consumed.
pub(crate) fn parse_expr_prefix(
    src: &str,
    params: &dyn ParamResolver,
    line: usize,
    col0: usize,
) -> Result<(Expr, usize), ParseError> {
    let tokens = tokenize(src, line, col0)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        src_len: src.len(),
        line,
        col0,
        params,
    };
    let expr = parser.expr()?;
    Ok((expr, parser.offset()))
}
