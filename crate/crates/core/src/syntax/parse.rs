//! Recursive-descent parser for the concrete syntax
//!
//! ```text
//! t ::= x | \x. t | t t | S x. t | < t >
//! ```
//!
//! Application associates to the left; lambda and shift bodies extend as far
//! right as possible. `S` on its own is the shift keyword. Identifiers are an
//! ASCII letter followed by letters, digits, `_` or `'`. Alias names (such as
//! `THETA-SHIFT`) may additionally contain `-` between letters; they are only
//! accepted when the alias resolver knows them.

use std::fmt;

use thiserror::Error;

use super::{Name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {line}:{column}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Lambda,
    Shift,
    Dot,
    LParen,
    RParen,
    LAngle,
    RAngle,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "identifier `{s}`"),
            Token::Lambda => f.write_str("`\\`"),
            Token::Shift => f.write_str("`S`"),
            Token::Dot => f.write_str("`.`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
            Token::LAngle => f.write_str("`<`"),
            Token::RAngle => f.write_str("`>`"),
        }
    }
}

pub fn parse(text: &str) -> Result<Term, ParseError> {
    parse_with_aliases(text, &|_| None)
}

/// Parses `text`, replacing free occurrences of alias names by the closed
/// terms returned by `aliases`.
pub fn parse_with_aliases(
    text: &str,
    aliases: &dyn Fn(&str) -> Option<Term>,
) -> Result<Term, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        text,
        tokens,
        pos: 0,
        bound: Vec::new(),
        aliases,
    };
    let t = parser.term()?;
    if let Some((tok, off)) = parser.tokens.get(parser.pos) {
        return Err(error_at(text, *off, format!("unexpected {tok}")));
    }
    Ok(t)
}

fn error_at(text: &str, offset: usize, message: String) -> ParseError {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    ParseError {
        offset,
        line,
        column,
        message,
    }
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'\\' => Token::Lambda,
            b'.' => Token::Dot,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'<' => Token::LAngle,
            b'>' => Token::RAngle,
            c if c.is_ascii_alphabetic() => {
                let start = i;
                i += 1;
                while i < bytes.len() {
                    let d = bytes[i];
                    let continues_alias = d == b'-'
                        && bytes.get(i + 1).is_some_and(|n| n.is_ascii_alphabetic());
                    if d.is_ascii_alphanumeric() || d == b'_' || d == b'\'' || continues_alias {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let word = &text[start..i];
                let tok = if word == "S" {
                    Token::Shift
                } else {
                    Token::Ident(word.to_string())
                };
                out.push((tok, start));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(error_at(text, i, format!("unexpected character `{ch}`")));
            }
        };
        out.push((tok, i));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    text: &'a str,
    tokens: Vec<(Token, usize)>,
    pos: usize,
    bound: Vec<String>,
    aliases: &'a dyn Fn(&str) -> Option<Term>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map_or(self.text.len(), |(_, off)| *off)
    }

    fn error(&self, message: String) -> ParseError {
        error_at(self.text, self.offset(), message)
    }

    fn expect(&mut self, want: Token) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.error(format!("expected {want}, found {t}"))),
            None => Err(self.error(format!("expected {want}, found end of input"))),
        }
    }

    fn binder_name(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Token::Ident(x)) if !x.contains('-') => {
                let x = x.clone();
                self.pos += 1;
                Ok(x)
            }
            Some(t) => Err(self.error(format!("expected a variable name, found {t}"))),
            None => Err(self.error("expected a variable name, found end of input".into())),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some(Token::Lambda) | Some(Token::Shift) => self.binder(),
            _ => self.application(),
        }
    }

    fn binder(&mut self) -> Result<Term, ParseError> {
        let is_shift = matches!(self.peek(), Some(Token::Shift));
        self.pos += 1;
        let x = self.binder_name()?;
        self.expect(Token::Dot)?;
        self.bound.push(x.clone());
        let body = self.term();
        self.bound.pop();
        let body = Box::new(body?);
        let x = Name::from(x);
        Ok(if is_shift {
            Term::Shift(x, body)
        } else {
            Term::Lam(x, body)
        })
    }

    fn application(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.atom()?;
        loop {
            match self.peek() {
                Some(Token::Ident(_)) | Some(Token::LParen) | Some(Token::LAngle) => {
                    let arg = self.atom()?;
                    acc = Term::app(acc, arg);
                }
                Some(Token::Lambda) | Some(Token::Shift) => {
                    let arg = self.binder()?;
                    return Ok(Term::app(acc, arg));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Token::Ident(x)) => {
                let is_bound = self.bound.contains(&x);
                if !is_bound {
                    if let Some(t) = (self.aliases)(&x) {
                        self.pos += 1;
                        return Ok(t);
                    }
                }
                if x.contains('-') {
                    return Err(self.error(format!("unknown alias `{x}`")));
                }
                self.pos += 1;
                Ok(Term::var(&x))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(Token::RParen)?;
                Ok(t)
            }
            Some(Token::LAngle) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(Token::RAngle)?;
                Ok(Term::reset(t))
            }
            Some(t) => Err(self.error(format!("expected a term, found {t}"))),
            None => Err(self.error("expected a term, found end of input".into())),
        }
    }
}
