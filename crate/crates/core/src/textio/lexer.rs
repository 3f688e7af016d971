use std::fmt;

use super::{ParseError, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(u64),
    Str(String),
    Eq,
    Bar,
    Amp,
    Bang,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    /// `--`
    Dash2,
    /// `-->`
    Arrow,
    Newline,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Dash2 => f.write_str("`--`"),
            Tok::Arrow => f.write_str("`-->`"),
            Tok::Newline => f.write_str("end of line"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut line_start = 0;
    let mut chars = text.char_indices().peekable();
    let span_at = |offset: usize, line: usize, line_start: usize| SourceSpan {
        line,
        column: text[line_start..offset].chars().count() + 1,
        offset,
    };
    while let Some(&(at, c)) = chars.peek() {
        let span = span_at(at, line, line_start);
        let simple = match c {
            '=' => Some(Tok::Eq),
            '|' => Some(Tok::Bar),
            '&' => Some(Tok::Amp),
            '!' => Some(Tok::Bang),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(tok) = simple {
            chars.next();
            out.push(Token { tok, span });
            continue;
        }
        match c {
            '\n' => {
                chars.next();
                out.push(Token { tok: Tok::Newline, span });
                line += 1;
                line_start = at + 1;
            }
            '#' => {
                while let Some(&(_, c)) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '-' => {
                if text[at..].starts_with("-->") {
                    chars.nth(2);
                    out.push(Token { tok: Tok::Arrow, span });
                } else if text[at..].starts_with("--") {
                    chars.nth(1);
                    out.push(Token { tok: Tok::Dash2, span });
                } else {
                    return Err(ParseError::new(span, "unexpected character `-`"));
                }
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some((_, '"')) => break,
                        Some((_, '\\')) => match chars.next() {
                            Some((_, c @ ('"' | '\\'))) => s.push(c),
                            Some((i, c)) => {
                                return Err(ParseError::new(
                                    span_at(i, line, line_start),
                                    format!("invalid escape `\\{c}`"),
                                ))
                            }
                            None => return Err(ParseError::new(span, "unterminated string")),
                        },
                        Some((_, '\n')) | None => {
                            return Err(ParseError::new(span, "unterminated string"))
                        }
                        Some((_, c)) => s.push(c),
                    }
                }
                out.push(Token { tok: Tok::Str(s), span });
            }
            c if c.is_ascii_digit() => {
                let mut end = at;
                while let Some(&(i, c)) = chars.peek() {
                    if !c.is_ascii_digit() {
                        break;
                    }
                    end = i + c.len_utf8();
                    chars.next();
                }
                let n = text[at..end]
                    .parse()
                    .map_err(|_| ParseError::new(span, format!("number `{}` too large", &text[at..end])))?;
                out.push(Token { tok: Tok::Int(n), span });
            }
            c if is_ident_start(c) => {
                let mut end = at;
                while let Some(&(i, c)) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    end = i + c.len_utf8();
                    chars.next();
                }
                out.push(Token { tok: Tok::Ident(text[at..end].to_string()), span });
            }
            other => {
                return Err(ParseError::new(span, format!("unexpected character `{other}`")));
            }
        }
    }
    let span = span_at(text.len(), line, line_start);
    out.push(Token { tok: Tok::Eof, span });
    Ok(out)
}

/// A cursor over a token list.
pub(crate) struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Self {
        Cursor { toks, pos: 0 }
    }

    pub fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    pub fn peek_at(&self, n: usize) -> &Token {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)]
    }

    pub fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<Token, ParseError> {
        if &self.peek().tok == tok {
            Ok(self.next())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    pub fn unexpected(&self, wanted: &str) -> ParseError {
        let t = self.peek();
        ParseError::new(t.span, format!("expected {wanted}, found {}", t.tok))
    }

    pub fn ident(&mut self) -> Result<(String, SourceSpan), ParseError> {
        match self.peek().tok.clone() {
            Tok::Ident(s) => Ok((s, self.next().span)),
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub fn int(&mut self) -> Result<(u64, SourceSpan), ParseError> {
        match self.peek().tok {
            Tok::Int(n) => Ok((n, self.next().span)),
            _ => Err(self.unexpected("number")),
        }
    }

    pub fn skip_newlines(&mut self) {
        while self.peek().tok == Tok::Newline {
            self.next();
        }
    }

    pub fn at_line_end(&self) -> bool {
        matches!(self.peek().tok, Tok::Newline | Tok::Eof)
    }

    pub fn end_line(&mut self) -> Result<(), ParseError> {
        if self.at_line_end() {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected("end of line"))
        }
    }

    /// Index of the current token, used to rewind.
    pub fn mark(&self) -> usize {
        self.pos
    }

    pub fn reset(&mut self, mark: usize) {
        self.pos = mark;
    }
}
