//! Low-level scanning shared by the CCS and CSP parsers: position tracking,
//! identifier and action-name lexing, and positioned errors.

use std::fmt;

use thiserror::Error;

use crate::term::{ActName, Decoration, Polarity};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// A character scanner over source text with 1-based line/column tracking.
pub struct Scanner<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Scanner<'a> {
    pub fn new(src: &'a str) -> Self {
        Scanner {
            src,
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    pub fn source(&self) -> &'a str {
        self.src
    }

    pub fn error(&self, msg: impl fmt::Display) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            msg: msg.to_string(),
        }
    }

    pub fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    pub fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    pub fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    /// Skips whitespace and `#`-to-end-of-line comments.
    pub fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    pub fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.peek().is_none()
    }

    /// Consumes `lit` if the input starts with it (after whitespace).
    pub fn eat(&mut self, lit: &str) -> bool {
        self.skip_ws();
        let mut probe = self.pos;
        for c in lit.chars() {
            if self.chars.get(probe) != Some(&c) {
                return false;
            }
            probe += 1;
        }
        // Keywords must not run into a following identifier character.
        if lit.chars().all(|c| c.is_ascii_alphanumeric()) {
            if let Some(c) = self.chars.get(probe) {
                if c.is_ascii_alphanumeric() || *c == '_' {
                    return false;
                }
            }
        }
        for _ in lit.chars() {
            self.bump();
        }
        true
    }

    /// True iff the input (after whitespace) starts with the keyword `lit`
    /// followed by a non-identifier character. Consumes nothing.
    pub fn peek_keyword(&mut self, lit: &str) -> bool {
        self.skip_ws();
        let mut probe = self.pos;
        for c in lit.chars() {
            if self.chars.get(probe) != Some(&c) {
                return false;
            }
            probe += 1;
        }
        match self.chars.get(probe) {
            Some(c) => !(c.is_ascii_alphanumeric() || *c == '_'),
            None => true,
        }
    }

    pub fn expect(&mut self, lit: &str) -> Result<(), ParseError> {
        if self.eat(lit) {
            Ok(())
        } else {
            self.skip_ws();
            Err(self.error(format!(
                "expected `{lit}`{}",
                match self.peek() {
                    Some(c) => format!(", found `{c}`"),
                    None => ", found end of input".to_string(),
                }
            )))
        }
    }

    /// A process-variable identifier: `[A-Z][A-Za-z0-9_]*`.
    pub fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_uppercase() => {
                let mut s = String::new();
                s.push(self.bump().unwrap());
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(self.bump().unwrap());
                    } else {
                        break;
                    }
                }
                Ok(s)
            }
            _ => Err(self.error("expected a process variable (starting with an uppercase letter)")),
        }
    }

    pub fn peek_ident(&mut self) -> bool {
        self.skip_ws();
        matches!(self.peek(), Some(c) if c.is_ascii_uppercase())
    }

    /// An action name: `[a-z][A-Za-z0-9]*` with an optional `'` or `''`
    /// decoration suffix. `allow_coname` additionally accepts a leading `'`.
    pub fn act_name(&mut self, allow_coname: bool) -> Result<ActName, ParseError> {
        self.skip_ws();
        let polarity = if allow_coname && self.peek() == Some('\'') {
            self.bump();
            Polarity::Coname
        } else {
            Polarity::Name
        };
        let mut base = String::new();
        match self.peek() {
            Some(c) if c.is_ascii_lowercase() => {
                base.push(self.bump().unwrap());
            }
            _ => {
                return Err(self.error(
                    "expected an action name (starting with a lowercase letter)",
                ))
            }
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() {
                base.push(self.bump().unwrap());
            } else {
                break;
            }
        }
        let mut primes = 0;
        while primes < 2 && self.peek() == Some('\'') {
            self.bump();
            primes += 1;
        }
        let decoration = match primes {
            0 => Decoration::Plain,
            1 => Decoration::Primed,
            _ => Decoration::DoublyPrimed,
        };
        Ok(ActName {
            base,
            decoration,
            polarity,
        })
    }

    pub fn peek_act_start(&mut self, allow_coname: bool) -> bool {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_lowercase() => true,
            Some('\'') if allow_coname => true,
            _ => false,
        }
    }
}
