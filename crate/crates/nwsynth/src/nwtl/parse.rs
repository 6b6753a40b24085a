//! Recursive descent parser for the NWTL concrete syntax.
//!
//! Grammar, loosest binding first: `|`, `&`, `Us`/`Ss` (right
//! associative), unary (`!`, `X`, `Xmu`, `Y`, `Ymu`, `Fs`, `Gs`).
//! `Fs f` and `Gs f` are sugar for `true Us f` and `!(true Us !f)`.

use super::Formula;
use crate::nested_word::Alphabet;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown {kind} symbol '{name}' at byte {pos}")]
    UnknownSymbol { kind: &'static str, name: String, pos: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Word(String),
    InAtom(String),
    OutAtom(String),
    Bang,
    Amp,
    Pipe,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(mut self) -> Result<Vec<(Token, usize)>, ParseError> {
        let mut out = Vec::new();
        while self.pos < self.bytes.len() {
            let start = self.pos;
            let c = self.bytes[self.pos] as char;
            match c {
                ' ' | '\t' | '\n' | '\r' => {
                    self.pos += 1;
                }
                '!' => {
                    self.pos += 1;
                    out.push((Token::Bang, start));
                }
                '&' => {
                    self.pos += 1;
                    out.push((Token::Amp, start));
                }
                '|' => {
                    self.pos += 1;
                    out.push((Token::Pipe, start));
                }
                '(' => {
                    self.pos += 1;
                    out.push((Token::LParen, start));
                }
                ')' => {
                    self.pos += 1;
                    out.push((Token::RParen, start));
                }
                c if c.is_ascii_alphanumeric() || c == '_' => {
                    let word = self.take_ident();
                    if (word == "in" || word == "out") && self.peek_char() == Some(':') {
                        self.pos += 1;
                        let name = self.take_ident();
                        if name.is_empty() {
                            return Err(ParseError::Syntax {
                                pos: self.pos,
                                msg: format!("expected symbol name after '{}:'", word),
                            });
                        }
                        let tok = if word == "in" {
                            Token::InAtom(name)
                        } else {
                            Token::OutAtom(name)
                        };
                        out.push((tok, start));
                    } else {
                        out.push((Token::Word(word), start));
                    }
                }
                other => {
                    return Err(ParseError::Syntax {
                        pos: start,
                        msg: format!("unexpected character '{}'", other),
                    });
                }
            }
        }
        let _ = self.src;
        Ok(out)
    }

    fn peek_char(&self) -> Option<char> {
        self.bytes.get(self.pos).map(|&b| b as char)
    }

    fn take_ident(&mut self) -> String {
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .map_or(false, |&b| (b as char).is_ascii_alphanumeric() || b == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned()
    }
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    cursor: usize,
    alphabet: &'a Alphabet,
    end: usize,
}

/// Parses one formula; the whole input must be consumed.
pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Formula, ParseError> {
    let tokens = Lexer { src: text, bytes: text.as_bytes(), pos: 0 }.tokens()?;
    let mut p = Parser { tokens, cursor: 0, alphabet, end: text.len() };
    let f = p.or_expr()?;
    if let Some((tok, pos)) = p.tokens.get(p.cursor) {
        return Err(ParseError::Syntax { pos: *pos, msg: format!("unexpected token {:?}", tok) });
    }
    Ok(f)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.cursor).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.cursor).map_or(self.end, |(_, p)| *p)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.cursor).map(|(t, _)| t.clone());
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn or_expr(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and_expr()?;
        while matches!(self.peek(), Some(Token::Pipe)) {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.until_expr()?;
        while matches!(self.peek(), Some(Token::Amp)) {
            self.bump();
            let rhs = self.until_expr()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until_expr(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary_expr()?;
        match self.peek() {
            Some(Token::Word(w)) if w == "Us" => {
                self.bump();
                let rhs = self.until_expr()?;
                Ok(Formula::until(lhs, rhs))
            }
            Some(Token::Word(w)) if w == "Ss" => {
                self.bump();
                let rhs = self.until_expr()?;
                Ok(Formula::since(lhs, rhs))
            }
            _ => Ok(lhs),
        }
    }

    fn unary_expr(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.peek() {
            Some(Token::Bang) => {
                self.bump();
                Ok(Formula::not(self.unary_expr()?))
            }
            Some(Token::Word(w)) => match w.as_str() {
                "X" => {
                    self.bump();
                    Ok(Formula::next(self.unary_expr()?))
                }
                "Xmu" => {
                    self.bump();
                    Ok(Formula::next_mu(self.unary_expr()?))
                }
                "Y" => {
                    self.bump();
                    Ok(Formula::prev(self.unary_expr()?))
                }
                "Ymu" => {
                    self.bump();
                    Ok(Formula::prev_mu(self.unary_expr()?))
                }
                "Fs" => {
                    self.bump();
                    Ok(Formula::eventually(self.unary_expr()?))
                }
                "Gs" => {
                    self.bump();
                    Ok(Formula::globally(self.unary_expr()?))
                }
                _ => self.atom(),
            },
            Some(_) => self.atom(),
            None => Err(ParseError::Syntax { pos, msg: "unexpected end of input".into() }),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Token::Word(w)) => match w.as_str() {
                "true" => Ok(Formula::True),
                "call" => Ok(Formula::Call),
                "ret" => Ok(Formula::Ret),
                other => Err(ParseError::Syntax {
                    pos,
                    msg: format!("expected a formula, found '{}'", other),
                }),
            },
            Some(Token::InAtom(name)) => match self.alphabet.input_id(&name) {
                Some(s) => Ok(Formula::InAtom(s)),
                None => Err(ParseError::UnknownSymbol { kind: "input", name, pos }),
            },
            Some(Token::OutAtom(name)) => match self.alphabet.output_id(&name) {
                Some(s) => Ok(Formula::OutAtom(s)),
                None => Err(ParseError::UnknownSymbol { kind: "output", name, pos }),
            },
            Some(Token::LParen) => {
                let f = self.or_expr()?;
                match self.bump() {
                    Some(Token::RParen) => Ok(f),
                    _ => Err(ParseError::Syntax { pos, msg: "unclosed '('".into() }),
                }
            }
            Some(tok) => {
                Err(ParseError::Syntax { pos, msg: format!("expected a formula, found {:?}", tok) })
            }
            None => Err(ParseError::Syntax { pos, msg: "unexpected end of input".into() }),
        }
    }
}
