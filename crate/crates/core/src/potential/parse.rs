//! Recursive-descent parser for potential expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := base ('^' exponent)?
//! base   := number | 'i' | 'z' | func '(' expr ')' | '(' expr ')'
//! func   := 'exp' | 'sin' | 'cos' | 'sinh' | 'cosh'
//! ```
//!
//! Unary minus binds looser than `^`, so `-z^4` is `-(z^4)`.

use num_complex::Complex64;
use thiserror::Error;

use super::{Func, Node};

/// Functions that are recognised but rejected because they are not entire.
const NON_ENTIRE: &[&str] = &[
    "log", "ln", "sqrt", "cbrt", "abs", "arg", "conj", "re", "im", "tan", "cot", "sec", "csc",
    "tanh", "coth", "sech", "csch", "asin", "acos", "atan", "asinh", "acosh", "atanh", "pow",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error(
        "unsupported construct at byte {pos}: {what}; only entire potentials are accepted \
         (branch cuts and poles are not handled)"
    )]
    UnsupportedFunction { pos: usize, what: String },
    #[error("division by zero at byte {pos}")]
    DivisionByZero { pos: usize },
    #[error("constant subexpression ending at byte {pos} is not finite")]
    NonFiniteConstant { pos: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("number {x}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn syntax(pos: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { pos, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        let start = i;
        match ch {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((start, Tok::Plus)),
            b'-' => out.push((start, Tok::Minus)),
            b'*' => out.push((start, Tok::Star)),
            b'/' => out.push((start, Tok::Slash)),
            b'^' => out.push((start, Tok::Caret)),
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // Optional exponent, e.g. 1.5e-3.
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let value: f64 = lit
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{lit}`")))?;
                out.push((start, Tok::Num(value)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                let c = text[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{c}`")));
            }
        }
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.pos(),
                format!("expected {}, found {}", want.describe(), self.peek().describe()),
            ))
        }
    }

    fn finite(&self, node: Node) -> Result<Node, ParseError> {
        match node.as_const() {
            Some(c) if !(c.re.is_finite() && c.im.is_finite()) => {
                Err(ParseError::NonFiniteConstant { pos: self.pos() })
            }
            _ => Ok(node),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = self.finite(Node::add(lhs, rhs))?;
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = self.finite(Node::sub(lhs, rhs))?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = self.finite(Node::mul(lhs, rhs))?;
                }
                Tok::Slash => {
                    let pos = self.pos();
                    self.bump();
                    let rhs = self.unary()?;
                    match rhs.as_const() {
                        None => {
                            return Err(ParseError::UnsupportedFunction {
                                pos,
                                what: "division by a z-dependent expression (poles)".into(),
                            })
                        }
                        Some(c) if c == Complex64::new(0.0, 0.0) => {
                            return Err(ParseError::DivisionByZero { pos })
                        }
                        Some(_) => lhs = self.finite(Node::div(lhs, rhs))?,
                    }
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(Node::neg(inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let pos = self.pos();
        self.bump();
        let n = self.exponent(pos)?;
        if *self.peek() == Tok::Caret {
            return Err(syntax(self.pos(), "chained `^`; use parentheses"));
        }
        self.finite(Node::pow(base, n))
    }

    fn exponent(&mut self, caret: usize) -> Result<u32, ParseError> {
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let pos = self.pos();
        let value = match self.bump() {
            (_, Tok::Num(x)) => Complex64::new(x, 0.0),
            (_, Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                match e.as_const() {
                    Some(c) => c,
                    None => {
                        return Err(ParseError::UnsupportedFunction {
                            pos,
                            what: "z-dependent exponent".into(),
                        })
                    }
                }
            }
            (p, Tok::Ident(name)) => {
                return Err(ParseError::UnsupportedFunction {
                    pos: p,
                    what: format!("non-integer exponent `{name}` (branch cut)"),
                })
            }
            (p, t) => {
                return Err(syntax(p, format!("expected integer exponent, found {}", t.describe())))
            }
        };
        let value = if negative { -value } else { value };
        if value.im != 0.0 || value.re.fract() != 0.0 {
            return Err(ParseError::UnsupportedFunction {
                pos: caret,
                what: format!("non-integer power {value} (branch cut)"),
            });
        }
        if value.re < 0.0 {
            return Err(ParseError::UnsupportedFunction {
                pos: caret,
                what: format!("negative power {} (pole at z = 0)", value.re),
            });
        }
        if value.re > u32::MAX as f64 {
            return Err(syntax(pos, "exponent too large"));
        }
        Ok(value.re as u32)
    }

    fn base(&mut self) -> Result<Node, ParseError> {
        let (pos, tok) = self.bump();
        match tok {
            Tok::Num(x) => Ok(Node::real(x)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "i" => Ok(Node::imag_unit()),
                "z" => Ok(Node::Var),
                _ => {
                    if let Some(func) = Func::from_name(&name) {
                        self.expect(Tok::LParen)?;
                        let arg = self.expr()?;
                        self.expect(Tok::RParen)?;
                        self.finite(Node::app(func, arg))
                    } else if NON_ENTIRE.contains(&name.as_str()) || *self.peek() == Tok::LParen {
                        Err(ParseError::UnsupportedFunction {
                            pos,
                            what: format!("function `{name}` is not entire"),
                        })
                    } else {
                        Err(syntax(pos, format!("unknown identifier `{name}`")))
                    }
                }
            },
            other => Err(syntax(pos, format!("unexpected {}", other.describe()))),
        }
    }
}

pub(super) fn parse(text: &str) -> Result<Node, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0 };
    if *p.peek() == Tok::End {
        return Err(syntax(0, "empty expression"));
    }
    let node = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.pos(), format!("unexpected {}", p.peek().describe())));
    }
    Ok(node)
}
