//! Parser for map expressions: rational expressions in `x` and `y` with
//! integer literals, `+ - * / ^`, and parentheses.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::field::Rational;

/// Abstract syntax of a map expression.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    X,
    Y,
    Const(Rational),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    X,
    Y,
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

const MAX_EXPONENT: i64 = 4096;

fn token_text(t: &Token) -> String {
    match t {
        Token::X => "x".to_string(),
        Token::Y => "y".to_string(),
        Token::Int(n) => n.to_string(),
        Token::Plus => "+".to_string(),
        Token::Minus => "-".to_string(),
        Token::Star => "*".to_string(),
        Token::Slash => "/".to_string(),
        Token::Caret => "^".to_string(),
        Token::LParen => "(".to_string(),
        Token::RParen => ")".to_string(),
    }
}

// Tokens paired with the byte offset of their first character.
fn lex(text: &str) -> Result<Vec<(Token, usize)>> {
    let bytes = text.as_bytes();
    let mut out = vec![];
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let single = match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            'x' => Some(Token::X),
            'y' => Some(Token::Y),
            '+' => Some(Token::Plus),
            '-' => Some(Token::Minus),
            '*' => Some(Token::Star),
            '/' => Some(Token::Slash),
            '^' => Some(Token::Caret),
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, i));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let lit: BigInt = text[start..i]
                .parse()
                .map_err(|e| Error::invalid(format!("bad integer literal: {e}")))?;
            out.push((Token::Int(lit), start));
            continue;
        }
        return Err(Error::invalid(format!(
            "syntax error at offset {i}: unexpected character '{c}'"
        )));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, want: &Token) -> bool {
        if self.peek() == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// Byte offset of the next token, or one past the input at its end.
    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn syntax(&self, msg: &str) -> Error {
        Error::invalid(format!("syntax error at offset {}: {msg}", self.offset()))
    }

    // expr := ['-'] term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr> {
        let mut acc = if self.eat(&Token::Minus) {
            Expr::Neg(Box::new(self.term()?))
        } else {
            self.term()?
        };
        loop {
            if self.eat(&Token::Plus) {
                acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat(&Token::Minus) {
                acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    // term := factor (('*'|'/') factor)*
    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(&Token::Star) {
                acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
            } else if self.eat(&Token::Slash) {
                acc = Expr::Div(Box::new(acc), Box::new(self.factor()?));
            } else {
                return Ok(acc);
            }
        }
    }

    // factor := base ('^' ['-'] integer)?
    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if !self.eat(&Token::Caret) {
            return Ok(base);
        }
        let negative = self.eat(&Token::Minus);
        let off = self.offset();
        match self.bump() {
            Some(Token::Int(n)) => {
                let mut e: i64 = n.try_into().map_err(|_| {
                    Error::invalid(format!("syntax error at offset {off}: exponent out of range"))
                })?;
                if e > MAX_EXPONENT {
                    return Err(Error::invalid(format!(
                        "syntax error at offset {off}: exponent {e} exceeds {MAX_EXPONENT}"
                    )));
                }
                if negative {
                    e = -e;
                }
                Ok(Expr::Pow(Box::new(base), e))
            }
            _ => Err(Error::invalid(format!(
                "syntax error at offset {off}: '^' must be followed by an integer exponent"
            ))),
        }
    }

    // base := 'x' | 'y' | integer | '(' expr ')'
    fn base(&mut self) -> Result<Expr> {
        let off = self.offset();
        match self.bump() {
            Some(Token::X) => Ok(Expr::X),
            Some(Token::Y) => Ok(Expr::Y),
            Some(Token::Int(n)) => Ok(Expr::Const(Rational::from(n))),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                if self.eat(&Token::RParen) {
                    Ok(inner)
                } else {
                    Err(self.syntax("missing closing parenthesis"))
                }
            }
            Some(t) => Err(Error::invalid(format!(
                "syntax error at offset {off}: unexpected `{}`",
                token_text(&t)
            ))),
            None => Err(Error::invalid(format!(
                "syntax error at offset {off}: unexpected end of map expression"
            ))),
        }
    }
}

/// Parse a map expression into its syntax tree.
pub fn parse_map_expression(text: &str) -> Result<Expr> {
    let tokens = lex(text)?;
    if tokens.is_empty() {
        return Err(Error::invalid("empty map expression"));
    }
    let mut parser = Parser { tokens, pos: 0, end: text.len() };
    let e = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.syntax("trailing input after expression"));
    }
    Ok(e)
}
