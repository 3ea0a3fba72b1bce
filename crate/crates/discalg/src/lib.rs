//! `discalg` — a numerical laboratory for uniform algebras on the closed
//! unit disc generated by `z` and a close-to-harmonic function `h + R`.
//!
//! The library checks the hypotheses under which polynomials in the two
//! generators are dense in the continuous functions, certifies the
//! plurisubharmonicity of the graph-distance function used in the
//! polynomial-convexity argument, probes the polynomial hull of the graph by
//! an explicit separation construction, and measures density directly with
//! sup-norm polynomial fits.
//!
//! Modules:
//! - [`expr`]: expression parsing, evaluation, symbolic Wirtinger calculus;
//! - [`grid`]: polar sampling of the disc, finite differences, sup norms,
//!   dilation modulus of continuity;
//! - [`hypotheses`]: the two smallness conditions on `(h, R)` and derived
//!   constants;
//! - [`levi`]: Levi forms of `|w - f(rz)|^2` and plurisubharmonicity
//!   certificates over polydiscs;
//! - [`hull`]: separation-based exclusion probe for the polynomial hull of
//!   the graph;
//! - [`approx`]: polynomial fitting in the generators `z`, `f` with
//!   least-squares and Lawson (minimax-oriented) weighting;
//! - [`cli`]: the `discalg` command-line pipeline and report types.

pub mod approx;
pub mod cli;
pub mod expr;
pub mod grid;
pub mod hull;
pub mod hypotheses;
pub mod levi;

pub use expr::{parse, EvalError, Expr, ParseError};
