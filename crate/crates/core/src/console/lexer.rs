use std::fmt;

use super::{ConsoleError, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Number,
    Str,
    Open,
    Close,
    Op,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl Token {
    pub fn is_op(&self, op: &str) -> bool {
        self.kind == TokenKind::Op && self.text == op
    }

    pub fn is_word(&self, w: &str) -> bool {
        self.kind == TokenKind::Word && self.text == w
    }

    pub fn is_open(&self, b: char) -> bool {
        self.kind == TokenKind::Open && self.text.starts_with(b)
    }

    pub fn is_close(&self, b: char) -> bool {
        self.kind == TokenKind::Close && self.text.starts_with(b)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TokenKind::Word => write!(f, "word `{}`", self.text),
            TokenKind::Number => write!(f, "number {}", self.text),
            TokenKind::Str => write!(f, "string {}", self.text),
            _ => write!(f, "`{}`", self.text),
        }
    }
}

fn is_word_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '-'
}

/// Splits `text` into tokens. Whitespace and `;` comments are dropped;
/// every other byte belongs to exactly one token.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ConsoleError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    let mut line = 1u32;
    let mut line_start = 0usize;
    let span = |start: usize, end: usize, line: u32, line_start: usize| Span {
        start,
        end,
        line,
        col: (text[line_start..start].chars().count() + 1) as u32,
    };
    while let Some(&(start, c)) = chars.peek() {
        if c == '\n' {
            chars.next();
            line += 1;
            line_start = start + 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == ';' {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }
        let (kind, end) = if is_word_start(c) {
            let mut end = start;
            while let Some(&(i, c)) = chars.peek() {
                if !is_word_char(c) {
                    break;
                }
                end = i + c.len_utf8();
                chars.next();
            }
            (TokenKind::Word, end)
        } else if c.is_ascii_digit() {
            let mut end = start;
            let mut seen_dot = false;
            while let Some(&(i, c)) = chars.peek() {
                if c.is_ascii_digit() {
                    end = i + 1;
                    chars.next();
                } else if c == '.' && !seen_dot {
                    // only a fraction if a digit follows
                    let mut look = chars.clone();
                    look.next();
                    if look.peek().is_some_and(|&(_, d)| d.is_ascii_digit()) {
                        seen_dot = true;
                        end = i + 1;
                        chars.next();
                    } else {
                        break;
                    }
                } else {
                    break;
                }
            }
            if chars.peek().is_some_and(|&(_, c)| is_word_start(c)) {
                let (i, _) = *chars.peek().unwrap();
                return Err(ConsoleError::lex(
                    "a number cannot run into a word",
                    span(i, i + 1, line, line_start),
                ));
            }
            (TokenKind::Number, end)
        } else if c == '"' {
            chars.next();
            let mut end = None;
            while let Some((i, c)) = chars.next() {
                match c {
                    '\\' => {
                        chars.next();
                    }
                    '"' => {
                        end = Some(i + 1);
                        break;
                    }
                    '\n' => break,
                    _ => {}
                }
            }
            match end {
                Some(end) => (TokenKind::Str, end),
                None => {
                    return Err(ConsoleError::lex(
                        "unterminated string",
                        span(start, text.len().min(start + 1), line, line_start),
                    ))
                }
            }
        } else {
            chars.next();
            match c {
                '[' | '(' => (TokenKind::Open, start + 1),
                ']' | ')' => (TokenKind::Close, start + 1),
                '+' | '-' | '*' | '/' => (TokenKind::Op, start + 1),
                '<' | '>' => {
                    if chars.peek().is_some_and(|&(_, n)| n == '=') {
                        chars.next();
                        (TokenKind::Op, start + 2)
                    } else {
                        (TokenKind::Op, start + 1)
                    }
                }
                '=' => (TokenKind::Op, start + 1),
                '!' if chars.peek().is_some_and(|&(_, n)| n == '=') => {
                    chars.next();
                    (TokenKind::Op, start + 2)
                }
                other => {
                    return Err(ConsoleError::lex(
                        format!("illegal character {other:?}"),
                        span(start, start + other.len_utf8(), line, line_start),
                    ))
                }
            }
        };
        tokens.push(Token {
            kind,
            text: text[start..end].to_string(),
            span: span(start, end, line, line_start),
        });
    }
    Ok(tokens)
}
