//! Tokenizer for the expression grammar.

use super::parser::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(super) enum TokenKind {
    Number(f64),
    Z,
    ImagUnit,
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Token {
    pub kind: TokenKind,
    pub offset: usize,
    pub text: String,
}

impl Token {
    /// Human-readable description used in error messages.
    pub fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Number(_) => format!("number `{}`", self.text),
            TokenKind::Z => "`z`".to_string(),
            TokenKind::ImagUnit => "`i`".to_string(),
            TokenKind::Ident(name) => format!("identifier `{}`", name),
            TokenKind::Eof => "end of input".to_string(),
            _ => format!("`{}`", self.text),
        }
    }
}

pub(super) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let b = bytes[pos];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                pos += 1;
            }
            b'+' | b'-' | b'*' | b'/' | b'^' | b'(' | b')' => {
                let kind = match b {
                    b'+' => TokenKind::Plus,
                    b'-' => TokenKind::Minus,
                    b'*' => TokenKind::Star,
                    b'/' => TokenKind::Slash,
                    b'^' => TokenKind::Caret,
                    b'(' => TokenKind::LParen,
                    _ => TokenKind::RParen,
                };
                toks.push(Token {
                    kind,
                    offset: pos,
                    text: (b as char).to_string(),
                });
                pos += 1;
            }
            b'0'..=b'9' => {
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'.' {
                    if pos + 1 >= bytes.len() || !bytes[pos + 1].is_ascii_digit() {
                        return Err(ParseError {
                            offset: pos,
                            expected: "a digit after the decimal point".to_string(),
                            found: "none".to_string(),
                        });
                    }
                    pos += 1;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                }
                // Optional exponent part, accepted on input for convenience.
                if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
                    let mut probe = pos + 1;
                    if probe < bytes.len() && (bytes[probe] == b'+' || bytes[probe] == b'-') {
                        probe += 1;
                    }
                    if probe < bytes.len() && bytes[probe].is_ascii_digit() {
                        pos = probe;
                        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                            pos += 1;
                        }
                    }
                }
                let text = &src[start..pos];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    expected: "a decimal literal".to_string(),
                    found: format!("`{}`", text),
                })?;
                toks.push(Token {
                    kind: TokenKind::Number(value),
                    offset: start,
                    text: text.to_string(),
                });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = pos;
                while pos < bytes.len()
                    && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_')
                {
                    pos += 1;
                }
                let text = &src[start..pos];
                let kind = match text {
                    "z" => TokenKind::Z,
                    "i" => TokenKind::ImagUnit,
                    _ => TokenKind::Ident(text.to_string()),
                };
                toks.push(Token {
                    kind,
                    offset: start,
                    text: text.to_string(),
                });
            }
            _ => {
                return Err(ParseError {
                    offset: pos,
                    expected: "a token".to_string(),
                    found: format!("`{}`", &src[pos..pos + b.leading_ones().max(1) as usize]),
                });
            }
        }
    }
    toks.push(Token {
        kind: TokenKind::Eof,
        offset: src.len(),
        text: String::new(),
    });
    Ok(toks)
}
