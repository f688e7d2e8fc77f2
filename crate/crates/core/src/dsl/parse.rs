use std::fmt;

use super::ast::{Ast, Atom, Sign};
use crate::grid::Axis;

/// Malformed DSL input, located at the first offending token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    /// Byte offset into the input.
    pub offset: usize,
    /// One-based line.
    pub line: usize,
    /// One-based column, counted in characters.
    pub col: usize,
}

impl ParseError {
    fn at(input: &str, offset: usize, message: impl Into<String>) -> ParseError {
        let before = &input[..offset];
        let line = before.matches('\n').count() + 1;
        let line_start = before.rfind('\n').map_or(0, |i| i + 1);
        let col = input[line_start..offset].chars().count() + 1;
        ParseError { message: message.into(), offset, line, col }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Atom(Atom),
    Int(u64),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Atom(a) => format!("'{a}'"),
            Tok::Int(n) => format!("'{n}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Comma => "','".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(input: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = input.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'[' => Some(Tok::LBracket),
            b']' => Some(Tok::RBracket),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, start));
            i += 1;
        } else if c == b'|' {
            if bytes.get(i + 1..i + 3) != Some(b"p|".as_slice()) {
                return Err(ParseError::at(input, start, "expected '|p|'"));
            }
            out.push((Tok::Atom(Atom::AbsP), start));
            i += 3;
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = input[start..i]
                .parse::<u64>()
                .map_err(|_| ParseError::at(input, start, "integer literal too large"))?;
            out.push((Tok::Int(n), start));
        } else if c.is_ascii_alphabetic() {
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word = &input[start..i];
            let atom = match word {
                "x1" => Atom::X(Axis::X),
                "x2" => Atom::X(Axis::Y),
                "x3" => Atom::X(Axis::Z),
                "p1" => Atom::P(Axis::X),
                "p2" => Atom::P(Axis::Y),
                "p3" => Atom::P(Axis::Z),
                "i" => Atom::I,
                "hbar" => Atom::Hbar,
                "t" => Atom::T,
                _ => return Err(ParseError::at(input, start, format!("unknown identifier '{word}'"))),
            };
            out.push((Tok::Atom(atom), start));
        } else {
            let ch = input[start..].chars().next().unwrap_or('?');
            return Err(ParseError::at(input, start, format!("unexpected character '{ch}'")));
        }
    }
    out.push((Tok::Eof, input.len()));
    Ok(out)
}

struct Parser<'a> {
    input: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Tok {
        self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.peek();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::at(self.input, self.offset(), message)
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", tok.describe(), self.peek().describe())))
        }
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut terms = Vec::new();
        let mut sign = Sign::Plus;
        if self.peek() == Tok::Minus {
            self.bump();
            sign = Sign::Minus;
        }
        loop {
            terms.push((sign, self.term()?));
            sign = match self.peek() {
                Tok::Plus => Sign::Plus,
                Tok::Minus => Sign::Minus,
                _ => break,
            };
            self.bump();
        }
        if terms.len() == 1 && terms[0].0 == Sign::Plus {
            return Ok(terms.pop().map(|(_, t)| t).unwrap_or(Ast::Sum(Vec::new())));
        }
        Ok(Ast::Sum(terms))
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut factors = vec![self.factor()?];
        while self.peek() == Tok::Star {
            self.bump();
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap_or(Ast::Product(Vec::new())) } else { Ast::Product(factors) })
    }

    fn factor(&mut self) -> Result<Ast, ParseError> {
        let base = self.atom()?;
        if self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = if self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let Tok::Int(n) = self.peek() else {
            return Err(self.error("expected integer exponent"));
        };
        let e = i64::try_from(n).map_err(|_| self.error("exponent too large"))?;
        self.bump();
        Ok(Ast::Power(Box::new(base), if negative { -e } else { e }))
    }

    fn atom(&mut self) -> Result<Ast, ParseError> {
        match self.peek() {
            Tok::Atom(a) => {
                self.bump();
                Ok(Ast::Atom(a))
            }
            Tok::Int(num) => {
                self.bump();
                if self.peek() != Tok::Slash {
                    return Ok(Ast::Atom(Atom::Rational { num, den: 1 }));
                }
                self.bump();
                match self.peek() {
                    Tok::Int(0) => Err(self.error("denominator must be positive")),
                    Tok::Int(den) => {
                        self.bump();
                        Ok(Ast::Atom(Atom::Rational { num, den }))
                    }
                    _ => Err(self.error("expected integer denominator")),
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::LBracket => {
                self.bump();
                let a = self.expr()?;
                self.expect(Tok::Comma)?;
                let b = self.expr()?;
                self.expect(Tok::RBracket)?;
                Ok(Ast::Commutator(Box::new(a), Box::new(b)))
            }
            t => Err(self.error(format!("expected operand, found {}", t.describe()))),
        }
    }
}

/// Parses DSL text into an [`Ast`].
pub fn parse(text: &str) -> Result<Ast, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { input: text, toks, pos: 0 };
    let ast = p.expr()?;
    if p.peek() != Tok::Eof {
        let msg = match p.peek() {
            Tok::Atom(_) | Tok::Int(_) | Tok::LParen | Tok::LBracket => {
                format!("expected operator before {}", p.peek().describe())
            }
            t => format!("unexpected {}", t.describe()),
        };
        return Err(p.error(msg));
    }
    Ok(ast)
}
