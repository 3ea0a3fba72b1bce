//! Recursive-descent parser for disc-function expressions.
//!
//! Grammar, loosest to tightest binding, all binary operators
//! left-associative:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' uint)*
//! atom   := number | 'z' | 'i' | name '(' expr ')' | '(' expr ')'
//! name   := 'conj' | 're' | 'im' | 'abs2' | 'exp'
//! ```
//!
//! Exponents must be nonnegative integer literals. The pretty-printer in
//! [`super::ast`] emits this same grammar, so printing and re-parsing
//! reproduces the tree.

use std::sync::Arc;

use thiserror::Error;

use super::ast::Expr;
use super::lexer::{tokenize, Token, TokenKind};

/// Syntax error with the byte offset of the offending token.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at byte {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

/// Parses a source string into an [`Expr`]. The tree mirrors the grammar
/// derivation; no simplification is applied.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    let t = p.peek();
    if t.kind != TokenKind::Eof {
        return Err(ParseError {
            offset: t.offset,
            expected: "an operator or end of input".to_string(),
            found: t.describe(),
        });
    }
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().kind {
                TokenKind::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Add(Arc::new(lhs), Arc::new(rhs));
                }
                TokenKind::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Arc::new(lhs), Arc::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().kind {
                TokenKind::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Expr::Mul(Arc::new(lhs), Arc::new(rhs));
                }
                TokenKind::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Expr::Div(Arc::new(lhs), Arc::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().kind == TokenKind::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr::Neg(Arc::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.atom()?;
        while self.peek().kind == TokenKind::Caret {
            self.bump();
            let t = self.bump();
            let exponent = match t.kind {
                TokenKind::Number(v) if v.fract() == 0.0 && v >= 0.0 && v <= u32::MAX as f64 => {
                    v as u32
                }
                _ => {
                    return Err(ParseError {
                        offset: t.offset,
                        expected: "a nonnegative integer exponent".to_string(),
                        found: t.describe(),
                    })
                }
            };
            base = Expr::Pow(Arc::new(base), exponent);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match t.kind {
            TokenKind::Number(v) => Ok(Expr::real(v)),
            TokenKind::Z => Ok(Expr::Z),
            TokenKind::ImagUnit => Ok(Expr::complex(0.0, 1.0)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.close_paren()?;
                Ok(inner)
            }
            TokenKind::Ident(ref name) => {
                let wrap: fn(Arc<Expr>) -> Expr = match name.as_str() {
                    "conj" => Expr::Conj,
                    "re" => Expr::Re,
                    "im" => Expr::Im,
                    "abs2" => Expr::Abs2,
                    "exp" => Expr::Exp,
                    _ => {
                        return Err(ParseError {
                            offset: t.offset,
                            expected: "one of `conj`, `re`, `im`, `abs2`, `exp`".to_string(),
                            found: t.describe(),
                        })
                    }
                };
                let open = self.bump();
                if open.kind != TokenKind::LParen {
                    return Err(ParseError {
                        offset: open.offset,
                        expected: format!("`(` after `{}`", name),
                        found: open.describe(),
                    });
                }
                let inner = self.expr()?;
                self.close_paren()?;
                Ok(wrap(Arc::new(inner)))
            }
            _ => Err(ParseError {
                offset: t.offset,
                expected: "an operand (number, `z`, `i`, a function call, or `(`)".to_string(),
                found: t.describe(),
            }),
        }
    }

    fn close_paren(&mut self) -> Result<(), ParseError> {
        let t = self.bump();
        if t.kind != TokenKind::RParen {
            return Err(ParseError {
                offset: t.offset,
                expected: "`)`".to_string(),
                found: t.describe(),
            });
        }
        Ok(())
    }
}
