//! Symbolic Wirtinger calculus on [`Expr`] trees.
//!
//! The two first-order operators are
//!
//! ```text
//! d/dz    = (d/dx - i d/dy) / 2        d/dzbar = (d/dx + i d/dy) / 2
//! ```
//!
//! and the Laplacian is taken as `4 * d/dz d/dzbar`. Conjugation swaps the
//! two slots: `dz(conj u) = conj(dzbar u)` and vice versa. `re`, `im` and
//! `abs2` are rewritten in conjugate arithmetic before differentiating, so a
//! single set of rules covers every node kind. Results are simplified by
//! constant folding only; no algebraic rewriting is attempted.

use std::sync::Arc;

use super::ast::Expr;

/// Rewrites `re`, `im` and `abs2` in terms of `conj`:
/// `re(u) = (u + conj u)/2`, `im(u) = (u - conj u)/(2i)`,
/// `abs2(u) = u * conj(u)`.
pub fn desugar(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Z => e.clone(),
        Expr::Conj(u) => Expr::conj(desugar(u)),
        Expr::Neg(u) => Expr::neg(desugar(u)),
        Expr::Add(u, v) => Expr::add(desugar(u), desugar(v)),
        Expr::Sub(u, v) => Expr::sub(desugar(u), desugar(v)),
        Expr::Mul(u, v) => Expr::mul(desugar(u), desugar(v)),
        Expr::Div(u, v) => Expr::div(desugar(u), desugar(v)),
        Expr::Pow(u, n) => Expr::pow(desugar(u), *n),
        Expr::Exp(u) => Expr::exp(desugar(u)),
        Expr::Re(u) => {
            let u = Arc::new(desugar(u));
            Expr::div(
                Expr::add(u.clone(), Expr::conj(u)),
                Expr::real(2.0),
            )
        }
        Expr::Im(u) => {
            let u = Arc::new(desugar(u));
            Expr::div(
                Expr::sub(u.clone(), Expr::conj(u)),
                Expr::complex(0.0, 2.0),
            )
        }
        Expr::Abs2(u) => {
            let u = Arc::new(desugar(u));
            Expr::mul(u.clone(), Expr::conj(u))
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Holo,
    Anti,
}

impl Slot {
    fn flip(self) -> Slot {
        match self {
            Slot::Holo => Slot::Anti,
            Slot::Anti => Slot::Holo,
        }
    }
}

// Differentiates a desugared tree in the requested slot. `exp` and integer
// powers use the holomorphic chain rule, which is valid per slot because the
// outer functions are holomorphic in their argument.
fn diff(e: &Expr, slot: Slot) -> Expr {
    match e {
        Expr::Const(_) => Expr::real(0.0),
        Expr::Z => match slot {
            Slot::Holo => Expr::real(1.0),
            Slot::Anti => Expr::real(0.0),
        },
        Expr::Conj(u) => Expr::conj(diff(u, slot.flip())),
        Expr::Neg(u) => Expr::neg(diff(u, slot)),
        Expr::Add(u, v) => Expr::add(diff(u, slot), diff(v, slot)),
        Expr::Sub(u, v) => Expr::sub(diff(u, slot), diff(v, slot)),
        Expr::Mul(u, v) => Expr::add(
            Expr::mul(diff(u, slot), v.clone()),
            Expr::mul(u.clone(), diff(v, slot)),
        ),
        Expr::Div(u, v) => Expr::div(
            Expr::sub(
                Expr::mul(diff(u, slot), v.clone()),
                Expr::mul(u.clone(), diff(v, slot)),
            ),
            Expr::pow(v.clone(), 2),
        ),
        Expr::Pow(u, n) => {
            if *n == 0 {
                Expr::real(0.0)
            } else {
                Expr::mul(
                    Expr::mul(Expr::real(*n as f64), Expr::pow(u.clone(), n - 1)),
                    diff(u, slot),
                )
            }
        }
        Expr::Exp(u) => Expr::mul(Expr::exp(u.clone()), diff(u, slot)),
        Expr::Re(_) | Expr::Im(_) | Expr::Abs2(_) => {
            unreachable!("re/im/abs2 are desugared before differentiation")
        }
    }
}

impl Expr {
    /// Holomorphic Wirtinger derivative `d/dz`.
    pub fn wirtinger_dz(&self) -> Expr {
        diff(&desugar(self), Slot::Holo)
    }

    /// Anti-holomorphic Wirtinger derivative `d/dzbar`.
    pub fn wirtinger_dzbar(&self) -> Expr {
        diff(&desugar(self), Slot::Anti)
    }

    /// Laplacian `4 * d/dz d/dzbar` (equals `d2/dx2 + d2/dy2`).
    pub fn laplacian(&self) -> Expr {
        Expr::mul(Expr::real(4.0), self.wirtinger_dzbar().wirtinger_dz())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn zbar() -> Expr {
        Expr::Conj(Arc::new(Expr::Z))
    }

    fn zzbar() -> Expr {
        Expr::Mul(Arc::new(Expr::Z), Arc::new(zbar()))
    }

    #[test]
    fn conj_z_derivatives() {
        assert_eq!(zbar().wirtinger_dzbar(), Expr::real(1.0));
        assert_eq!(zbar().wirtinger_dz(), Expr::real(0.0));
    }

    #[test]
    fn product_rule_on_modulus_squared() {
        // dzbar(z * zbar) = z after folding away the zero branch.
        assert_eq!(zzbar().wirtinger_dzbar(), Expr::Z);
        assert_eq!(zzbar().wirtinger_dz(), zbar());
    }

    #[test]
    fn laplacian_constants() {
        assert_eq!(zzbar().laplacian(), Expr::real(4.0));
        assert_eq!(Expr::Re(Arc::new(Expr::Z)).laplacian(), Expr::real(0.0));
    }

    /// Five-point-stencil Laplacian, the independent oracle for the
    /// symbolic one.
    fn fd_laplacian(e: &Expr, z: Complex64, h: f64) -> Complex64 {
        let f = |dz: Complex64| e.eval(z + dz).unwrap();
        (f(c(h, 0.0)) + f(c(-h, 0.0)) + f(c(0.0, h)) + f(c(0.0, -h)) - 4.0 * f(c(0.0, 0.0)))
            / (h * h)
    }

    #[test]
    fn scaled_laplacian_value() {
        // 0.05 * z * zbar has Laplacian identically 0.2; cross-checked by
        // finite differences at 10 pseudo-random interior points.
        let e = Expr::Mul(Arc::new(Expr::real(0.05)), Arc::new(zzbar()));
        let lap = e.laplacian();
        for k in 0..10 {
            let t = k as f64 / 10.0;
            let z = Complex64::from_polar(0.85 * t, 6.0 * t + 0.3);
            let v = lap.eval(z).unwrap();
            assert!((v - c(0.2, 0.0)).norm() < 1e-15, "got {v}");
            let fd = fd_laplacian(&e, z, 1e-4);
            assert!((fd - v).norm() < 1e-6, "fd {fd} vs symbolic {v} at {z}");
        }
    }

    #[test]
    fn exp_chain_rule() {
        // dz exp(z) = exp(z); dzbar exp(z) = 0.
        let e = Expr::Exp(Arc::new(Expr::Z));
        assert_eq!(e.wirtinger_dzbar(), Expr::real(0.0));
        let d = e.wirtinger_dz();
        let z0 = c(0.2, 0.5);
        let expect = z0.exp();
        assert!((d.eval(z0).unwrap() - expect).norm() < 1e-15);
    }

    #[test]
    fn desugar_matches_eval() {
        // Desugared trees evaluate to the same values as the originals.
        let exprs = [
            Expr::Re(Arc::new(Expr::Exp(Arc::new(Expr::Z)))),
            Expr::Im(Arc::new(zzbar())),
            Expr::Abs2(Arc::new(Expr::Add(
                Arc::new(Expr::Z),
                Arc::new(Expr::complex(0.0, 1.0)),
            ))),
        ];
        for e in &exprs {
            let d = desugar(e);
            for z in [c(0.1, 0.2), c(-0.4, 0.6), c(0.0, -0.9)] {
                let a = e.eval(z).unwrap();
                let b = d.eval(z).unwrap();
                assert!((a - b).norm() < 1e-14, "{e} vs {d} at {z}");
            }
        }
    }
}
