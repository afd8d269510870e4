//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' '-'? integer)*
//! atom   := number | 'x' index | name '(' expr ')' | '(' expr ')'
//! ```

use super::{Node, Primitive, MAX_ARITY};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num { value: f64, integral: bool },
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

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lexer = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lexer.next()?;
            let done = tok == Tok::End;
            out.push((tok, at));
            if done {
                return Ok(out);
            }
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn eat_digits(&mut self) -> usize {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.pos - start
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok((Tok::End, start));
        };
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((tok, start));
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self
                .peek()
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
            {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(Error::Syntax {
            offset: start,
            message: format!("unexpected character {ch:?}"),
        })
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize)> {
        let mut digits = self.eat_digits();
        let mut integral = true;
        if self.peek() == Some(b'.') {
            self.pos += 1;
            integral = false;
            digits += self.eat_digits();
        }
        if digits == 0 {
            return Err(Error::Syntax {
                offset: start,
                message: "malformed number".into(),
            });
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            integral = false;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.eat_digits() == 0 {
                return Err(Error::Syntax {
                    offset: self.pos,
                    message: "missing exponent digits".into(),
                });
            }
        }
        let text = &self.src[start..self.pos];
        let value = text.parse::<f64>().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number {text:?}"),
        })?;
        Ok((Tok::Num { value, integral }, start))
    }
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<(Tok, usize)>,
    idx: usize,
    arity: usize,
}

pub(super) fn parse(src: &str, arity: usize) -> Result<Node> {
    if arity > MAX_ARITY {
        return Err(Error::ArityMismatch {
            expected: MAX_ARITY,
            found: arity,
        });
    }
    let mut p = Parser {
        src,
        tokens: Lexer::tokens(src)?,
        idx: 0,
        arity,
    };
    let node = p.expr()?;
    match p.peek() {
        Tok::End => Ok(node),
        _ => Err(p.unexpected("end of input")),
    }
}

fn negate(node: Node) -> Node {
    match node {
        Node::Const(c) => Node::Const(-c),
        other => Node::Mul(Box::new(Node::Const(-1.0)), Box::new(other)),
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.idx].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.idx].1
    }

    fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.idx].0.clone();
        if tok != Tok::End {
            self.idx += 1;
        }
        tok
    }

    fn unexpected(&self, wanted: &str) -> Error {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            _ => {
                let at = self.offset();
                let end = self
                    .tokens
                    .get(self.idx + 1)
                    .map_or(self.src.len(), |t| t.1);
                format!("{:?}", self.src[at..end].trim())
            }
        };
        Error::Syntax {
            offset: self.offset(),
            message: format!("expected {wanted}, found {found}"),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Add(Box::new(lhs), Box::new(rhs));
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Add(Box::new(lhs), Box::new(negate(rhs)));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Node::Mul(Box::new(lhs), Box::new(rhs));
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    let recip = Node::Prim(Primitive::Recip, Box::new(rhs));
                    lhs = Node::Mul(Box::new(lhs), Box::new(recip));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(negate(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let mut base = self.atom()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let negative = *self.peek() == Tok::Minus;
            if negative {
                self.bump();
            }
            let exponent = match self.peek() {
                Tok::Num {
                    value,
                    integral: true,
                } if *value <= i32::MAX as f64 => *value as i32,
                _ => return Err(self.unexpected("integer exponent")),
            };
            self.bump();
            let exponent = if negative { -exponent } else { exponent };
            base = Node::Pow(Box::new(base), exponent);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num { value, .. } => {
                self.bump();
                Ok(Node::Const(value))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(index) = variable_index(&name) {
                    if index == 0 || index > self.arity {
                        return Err(Error::VariableOutOfRange {
                            index,
                            arity: self.arity,
                        });
                    }
                    return Ok(Node::Var(index));
                }
                let Some(prim) = Primitive::from_name(&name) else {
                    return Err(Error::UnknownIdentifier { name, offset: at });
                };
                self.expect(Tok::LParen, "`(` after function name")?;
                let arg = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Node::Prim(prim, Box::new(arg)))
            }
            _ => Err(self.unexpected("an operand")),
        }
    }
}

/// `x1` … `x999` (no leading zeros); `x0` yields index 0 so it reports as out of range.
fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty()
        || digits.len() > 3
        || !digits.bytes().all(|b| b.is_ascii_digit())
        || (digits.len() > 1 && digits.starts_with('0'))
    {
        return None;
    }
    digits.parse().ok()
}
