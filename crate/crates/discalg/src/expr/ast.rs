//! Expression trees for functions of one complex variable on the closed disc.
//!
//! An [`Expr`] is an immutable AST. Subtrees are shared through `Arc`, so
//! clones are cheap and evaluation is safe to run from many threads at once.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

/// AST of a function of `z` on the closed unit disc.
///
/// `Pow` exponents are nonnegative integers; `re`, `im` and `abs2` are kept
/// as explicit nodes so user input prints back exactly, and are rewritten in
/// terms of `conj` before differentiation.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Z,
    Conj(Arc<Expr>),
    Neg(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, u32),
    Re(Arc<Expr>),
    Im(Arc<Expr>),
    Abs2(Arc<Expr>),
    Exp(Arc<Expr>),
}

/// Evaluation failure. The only runtime failure mode is division by zero;
/// the offending denominator is reported in printed form.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero at z = {at}: denominator `{denominator}` evaluated to 0")]
    DivisionByZero { at: Complex64, denominator: String },
}

fn finite(c: Complex64) -> bool {
    c.re.is_finite() && c.im.is_finite()
}

impl Expr {
    pub fn real(x: f64) -> Expr {
        Expr::Const(Complex64::new(x, 0.0))
    }

    pub fn complex(re: f64, im: f64) -> Expr {
        Expr::Const(Complex64::new(re, im))
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_const_eq(&self, v: f64) -> bool {
        matches!(self, Expr::Const(c) if c.im == 0.0 && c.re == v)
    }

    /// Sum with constant folding (`0 + x -> x`, constant pairs evaluated).
    pub fn add(a: impl Into<Arc<Expr>>, b: impl Into<Arc<Expr>>) -> Expr {
        let (a, b) = (a.into(), b.into());
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if finite(x + y) {
                return Expr::Const(x + y);
            }
        }
        if a.is_const_eq(0.0) {
            return (*b).clone();
        }
        if b.is_const_eq(0.0) {
            return (*a).clone();
        }
        Expr::Add(a, b)
    }

    pub fn sub(a: impl Into<Arc<Expr>>, b: impl Into<Arc<Expr>>) -> Expr {
        let (a, b) = (a.into(), b.into());
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if finite(x - y) {
                return Expr::Const(x - y);
            }
        }
        if b.is_const_eq(0.0) {
            return (*a).clone();
        }
        if a.is_const_eq(0.0) {
            return Expr::neg(b);
        }
        Expr::Sub(a, b)
    }

    /// Product with constant folding (`0 * x -> 0`, `1 * x -> x`).
    pub fn mul(a: impl Into<Arc<Expr>>, b: impl Into<Arc<Expr>>) -> Expr {
        let (a, b) = (a.into(), b.into());
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if finite(x * y) {
                return Expr::Const(x * y);
            }
        }
        if a.is_const_eq(0.0) || b.is_const_eq(0.0) {
            return Expr::real(0.0);
        }
        if a.is_const_eq(1.0) {
            return (*b).clone();
        }
        if b.is_const_eq(1.0) {
            return (*a).clone();
        }
        Expr::Mul(a, b)
    }

    /// Quotient. Folds only constant/constant with nonzero denominator, and
    /// `x / 1 -> x`; a zero constant denominator is kept so evaluation can
    /// report it.
    pub fn div(a: impl Into<Arc<Expr>>, b: impl Into<Arc<Expr>>) -> Expr {
        let (a, b) = (a.into(), b.into());
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if y != Complex64::new(0.0, 0.0) && finite(x / y) {
                return Expr::Const(x / y);
            }
        }
        if b.is_const_eq(1.0) {
            return (*a).clone();
        }
        Expr::Div(a, b)
    }

    pub fn neg(a: impl Into<Arc<Expr>>) -> Expr {
        let a = a.into();
        if let Some(x) = a.as_const() {
            return Expr::Const(-x);
        }
        Expr::Neg(a)
    }

    pub fn conj(a: impl Into<Arc<Expr>>) -> Expr {
        let a = a.into();
        if let Some(x) = a.as_const() {
            return Expr::Const(x.conj());
        }
        Expr::Conj(a)
    }

    pub fn pow(a: impl Into<Arc<Expr>>, n: u32) -> Expr {
        let a = a.into();
        if n == 0 {
            return Expr::real(1.0);
        }
        if n == 1 {
            return (*a).clone();
        }
        if let Some(x) = a.as_const() {
            let v = x.powu(n);
            if finite(v) {
                return Expr::Const(v);
            }
        }
        Expr::Pow(a, n)
    }

    pub fn exp(a: impl Into<Arc<Expr>>) -> Expr {
        let a = a.into();
        if let Some(x) = a.as_const() {
            let v = x.exp();
            if finite(v) {
                return Expr::Const(v);
            }
        }
        Expr::Exp(a)
    }

    /// Evaluate at a point. Pure; the only error is division by zero.
    pub fn eval(&self, z: Complex64) -> Result<Complex64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Z => z,
            Expr::Conj(u) => u.eval(z)?.conj(),
            Expr::Neg(u) => -u.eval(z)?,
            Expr::Add(u, v) => u.eval(z)? + v.eval(z)?,
            Expr::Sub(u, v) => u.eval(z)? - v.eval(z)?,
            Expr::Mul(u, v) => u.eval(z)? * v.eval(z)?,
            Expr::Div(u, v) => {
                let d = v.eval(z)?;
                if d == Complex64::new(0.0, 0.0) {
                    return Err(EvalError::DivisionByZero {
                        at: z,
                        denominator: v.to_string(),
                    });
                }
                u.eval(z)? / d
            }
            Expr::Pow(u, n) => u.eval(z)?.powu(*n),
            Expr::Re(u) => Complex64::new(u.eval(z)?.re, 0.0),
            Expr::Im(u) => Complex64::new(u.eval(z)?.im, 0.0),
            Expr::Abs2(u) => Complex64::new(u.eval(z)?.norm_sqr(), 0.0),
            Expr::Exp(u) => u.eval(z)?.exp(),
        })
    }
}

// Printing. Precedence levels: add/sub 1, mul/div 2, unary minus 3, power 4,
// atoms 5. Right operands of left-associative binary nodes require one level
// more, so structure survives a print/parse round trip.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn fmt_f64(x: f64) -> String {
    // `{}` on f64 prints the shortest decimal that parses back to the same
    // bits and never uses exponent notation, which keeps it inside the
    // expression grammar.
    format!("{}", x)
}

/// Renders a complex constant as grammar text plus its effective precedence.
fn fmt_const(c: Complex64) -> (String, u8) {
    let re = if c.re == 0.0 { 0.0 } else { c.re }; // normalize -0.0
    let im = if c.im == 0.0 { 0.0 } else { c.im };
    if im == 0.0 {
        if re < 0.0 {
            (format!("-{}", fmt_f64(-re)), PREC_NEG)
        } else {
            (fmt_f64(re), PREC_ATOM)
        }
    } else if re == 0.0 {
        match im {
            1.0 => ("i".to_string(), PREC_ATOM),
            -1.0 => ("-i".to_string(), PREC_NEG),
            v if v > 0.0 => (format!("{}*i", fmt_f64(v)), PREC_MUL),
            v => (format!("-{}*i", fmt_f64(-v)), PREC_MUL),
        }
    } else {
        let (re_s, _) = fmt_const(Complex64::new(re, 0.0));
        let im_part = match im {
            1.0 => "i".to_string(),
            -1.0 => "i".to_string(),
            v if v > 0.0 => format!("{}*i", fmt_f64(v)),
            v => format!("{}*i", fmt_f64(-v)),
        };
        let op = if im > 0.0 { '+' } else { '-' };
        (format!("{}{}{}", re_s, op, im_part), PREC_ADD)
    }
}

fn write_prec(e: &Expr, min: u8, out: &mut String) {
    let prec = match e {
        Expr::Const(c) => fmt_const(*c).1,
        Expr::Z | Expr::Re(_) | Expr::Im(_) | Expr::Abs2(_) | Expr::Conj(_) | Expr::Exp(_) => {
            PREC_ATOM
        }
        Expr::Neg(_) => PREC_NEG,
        Expr::Add(..) | Expr::Sub(..) => PREC_ADD,
        Expr::Mul(..) | Expr::Div(..) => PREC_MUL,
        Expr::Pow(..) => PREC_POW,
    };
    let paren = prec < min;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Const(c) => out.push_str(&fmt_const(*c).0),
        Expr::Z => out.push('z'),
        Expr::Conj(u) => func(out, "conj", u),
        Expr::Re(u) => func(out, "re", u),
        Expr::Im(u) => func(out, "im", u),
        Expr::Abs2(u) => func(out, "abs2", u),
        Expr::Exp(u) => func(out, "exp", u),
        Expr::Neg(u) => {
            out.push('-');
            write_prec(u, PREC_NEG, out);
        }
        Expr::Add(u, v) => {
            write_prec(u, PREC_ADD, out);
            out.push('+');
            write_prec(v, PREC_ADD + 1, out);
        }
        Expr::Sub(u, v) => {
            write_prec(u, PREC_ADD, out);
            out.push('-');
            write_prec(v, PREC_ADD + 1, out);
        }
        Expr::Mul(u, v) => {
            write_prec(u, PREC_MUL, out);
            out.push('*');
            write_prec(v, PREC_MUL + 1, out);
        }
        Expr::Div(u, v) => {
            write_prec(u, PREC_MUL, out);
            out.push('/');
            write_prec(v, PREC_MUL + 1, out);
        }
        Expr::Pow(u, n) => {
            write_prec(u, PREC_POW, out);
            out.push('^');
            out.push_str(&n.to_string());
        }
    }
    if paren {
        out.push(')');
    }
}

fn func(out: &mut String, name: &str, arg: &Expr) {
    out.push_str(name);
    out.push('(');
    write_prec(arg, 0, out);
    out.push(')');
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_prec(self, 0, &mut s);
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_basics() {
        let e = Expr::Conj(Arc::new(Expr::Z));
        assert_eq!(e.eval(c(0.3, 0.4)).unwrap(), c(0.3, -0.4));

        let zzbar = Expr::Mul(Arc::new(Expr::Z), Arc::new(Expr::Conj(Arc::new(Expr::Z))));
        let v = zzbar.eval(c(0.6, 0.8)).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);

        let e = Expr::Exp(Arc::new(Expr::Z));
        assert_eq!(e.eval(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn division_by_zero_reports_denominator() {
        let e = Expr::Div(Arc::new(Expr::real(1.0)), Arc::new(Expr::Z));
        let err = e.eval(c(0.0, 0.0)).unwrap_err();
        match err {
            EvalError::DivisionByZero { denominator, .. } => assert_eq!(denominator, "z"),
        }
    }

    #[test]
    fn folding_keeps_identities() {
        assert_eq!(Expr::add(Expr::real(0.0), Expr::Z), Expr::Z);
        assert_eq!(Expr::mul(Expr::real(1.0), Expr::Z), Expr::Z);
        assert_eq!(Expr::mul(Expr::real(0.0), Expr::Z), Expr::real(0.0));
        assert_eq!(Expr::pow(Expr::Z, 0), Expr::real(1.0));
        assert_eq!(Expr::pow(Expr::Z, 1), Expr::Z);
        assert_eq!(
            Expr::mul(Expr::real(2.0), Expr::real(3.0)),
            Expr::real(6.0)
        );
    }

    #[test]
    fn const_printing() {
        assert_eq!(Expr::real(2.5).to_string(), "2.5");
        assert_eq!(Expr::real(-2.0).to_string(), "-2");
        assert_eq!(Expr::complex(0.0, 1.0).to_string(), "i");
        assert_eq!(Expr::complex(0.0, -2.0).to_string(), "-2*i");
        assert_eq!(Expr::complex(3.0, -2.0).to_string(), "3-2*i");
        assert_eq!(
            Expr::mul(Expr::complex(0.0, -2.0), Expr::Z).to_string(),
            "-2*i*z"
        );
        assert_eq!(
            Expr::mul(Expr::Z, Expr::complex(0.0, -2.0)).to_string(),
            "z*(-2*i)"
        );
    }
}
