//! Shared fixtures for the integration and acceptance suites.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;

/// Expression corpus covering every node kind, nesting, and the precedence
/// corner cases; all division denominators are bounded away from zero on
/// the closed disc.
pub const EXPR_CORPUS: &[&str] = &[
    "z",
    "conj(z)",
    "i",
    "2.5",
    "z+conj(z)",
    "z*conj(z)",
    "re(z)",
    "im(z)",
    "abs2(z)",
    "exp(z)",
    "exp(conj(z))",
    "z^2",
    "conj(z)^3",
    "z^2*conj(z)",
    "0.05*z*conj(z)",
    "conj(z)+0.05*z*conj(z)",
    "re(z)^2",
    "im(z)^2+re(z)^2",
    "z^3-2*z+1",
    "(z+i)*(z-i)",
    "1/(2+z)",
    "conj(z)/(2+z*conj(z))",
    "exp(z*conj(z))",
    "exp(i*z)",
    "abs2(z+i)",
    "re(z*z)",
    "im(exp(z))",
    "-z",
    "-(z^2)+conj(z)",
    "(1+i)*z+(1-i)*conj(z)",
    "abs2(exp(z))",
    "re(z)*im(z)",
    "z/(4+abs2(z))",
    "exp(-abs2(z))",
    "z^2^3",
    "2*re(exp(z))-exp(re(z))",
];

/// `(h, R, C)` configurations with harmonic `h`; the first two satisfy both
/// hypotheses, the later ones break one of them on purpose.
pub const PAIR_CORPUS: &[(&str, &str, f64)] = &[
    ("conj(z)", "0", 0.5),
    ("conj(z)", "0.05*z*conj(z)", 0.25),
    ("re(z)", "0.02*abs2(z)", 0.9),
    ("z", "0", 0.5),
    ("conj(z)", "z*conj(z)", 0.9),
];

/// Uniform point in the closed disc of the given radius.
pub fn random_disc_point(rng: &mut impl Rng, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
    Complex64::from_polar(r, theta)
}

/// `|a - b| <= tol * max(1, |a|, |b|)`: relative comparison with a unit
/// floor so identically-zero quantities compare absolutely.
pub fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

pub fn close_f(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Relative change with a small absolute floor, for grid-stability checks
/// on quantities that may sit at roundoff level.
pub fn relative_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-9)
}
