//! Expression language for functions of `z` on the closed unit disc:
//! parsing, evaluation, pretty-printing, and exact symbolic Wirtinger
//! differentiation.

mod ast;
mod deriv;
mod lexer;
mod parser;

pub use ast::{EvalError, Expr};
pub use deriv::desugar;
pub use parser::{parse, ParseError};
