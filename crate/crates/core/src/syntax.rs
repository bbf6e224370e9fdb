//! Tokenizer shared by the formula, theory, program, hypergraph and π-term readers.

use std::fmt;

use crate::error::ParseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Zero,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Plus,
    Bar,
    ParBar,
    And,
    Or,
    Imp,
    CImp,
    Bang,
    Question,
    Assign,
    Semi,
    Lt,
    Gt,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Zero => "`0`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Comma => "`,`",
            Tok::Dot => "`.`",
            Tok::Plus => "`+`",
            Tok::Bar => "`|`",
            Tok::ParBar => "`||`",
            Tok::And => "`/\\`",
            Tok::Or => "`\\/`",
            Tok::Imp => "`->`",
            Tok::CImp => "`->>`",
            Tok::Bang => "`!`",
            Tok::Question => "`?`",
            Tok::Assign => "`:=`",
            Tok::Semi => "`;`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('0', _) => (Tok::Zero, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            (',', _) => (Tok::Comma, 1),
            ('.', _) => (Tok::Dot, 1),
            ('+', _) => (Tok::Plus, 1),
            ('|', Some('|')) => (Tok::ParBar, 2),
            ('|', _) => (Tok::Bar, 1),
            ('/', Some('\\')) => (Tok::And, 2),
            ('\\', Some('/')) => (Tok::Or, 2),
            ('-', Some('>')) => {
                if chars.get(i + 2) == Some(&'>') {
                    (Tok::CImp, 3)
                } else {
                    (Tok::Imp, 2)
                }
            }
            ('!', _) => (Tok::Bang, 1),
            ('?', _) => (Tok::Question, 1),
            (':', Some('=')) => (Tok::Assign, 2),
            (';', _) => (Tok::Semi, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            _ => {
                return Err(ParseError::new(pos, format!("unexpected character `{c}`")));
            }
        };
        advance(len, &mut i, &mut col);
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// Cursor over a token vector.
pub struct Cursor {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Cursor {
            toks: tokenize(src)?,
            at: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let idx = (self.at + k).min(self.toks.len() - 1);
        &self.toks[idx].0
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {tok}, found {}", self.peek())))
        }
    }

    pub fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.error(format!("expected identifier, found {other}"))),
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.pos(), msg)
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrows_and_bars() {
        let toks: Vec<Tok> = tokenize("a ->> b -> c || d | e /\\ f \\/ g # trailing")
            .unwrap()
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        assert_eq!(
            toks,
            vec![
                Tok::Ident("a".into()),
                Tok::CImp,
                Tok::Ident("b".into()),
                Tok::Imp,
                Tok::Ident("c".into()),
                Tok::ParBar,
                Tok::Ident("d".into()),
                Tok::Bar,
                Tok::Ident("e".into()),
                Tok::And,
                Tok::Ident("f".into()),
                Tok::Or,
                Tok::Ident("g".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn reports_position() {
        let err = tokenize("a\n  $").unwrap_err();
        assert_eq!(err.pos, Pos { line: 2, col: 3 });
    }
}
