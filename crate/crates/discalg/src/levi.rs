//! Levi forms of the squared graph distance
//! `psi_r(z, w) = |w - f(rz)|^2` and plurisubharmonicity certificates over
//! the polydisc `D(0; 1/r) x D(0; M + 2 delta0)`.
//!
//! With `g(z) = f(rz)` and real `r`, the second Wirtinger derivatives are
//!
//! ```text
//! d2 psi / dz dzbar = 2 Re( g_zzbar * conj(g - w) ) + |g_z|^2 + |g_zbar|^2
//! d2 psi / dz dwbar = -g_z
//! d2 psi / dw dwbar = 1
//! ```
//!
//! where the dilation contributes chain-rule factors `g_z = r f_z(rz)`,
//! `g_zbar = r f_zbar(rz)` and `g_zzbar = r^2 f_zzbar(rz)`. The quadratic
//! form on `V = (V1, V2)` is Hermitian, so its minimum over unit vectors is
//! the smaller eigenvalue of the 2x2 Levi matrix, which is what the
//! certificate scans. The form also satisfies, identically,
//!
//! ```text
//! L(V) = |g_z V1 - V2|^2 + (2 Re(g_zzbar conj(g - w)) + |g_zbar|^2) |V1|^2
//! ```
//!
//! which is the completed-square identity `verify_lemma_bound` spot-checks.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::grid::{DiscGrid, GridError};
use crate::hypotheses::{ConditionB, DiscFunction};

/// Roundoff allowance when deciding that an assembled eigenvalue is
/// nonnegative.
pub const PSH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LeviError {
    #[error("dilation radius must lie in (0, 1), got {0}")]
    BadRadius(f64),
    #[error("point z = {0} lies outside the disc of radius 1/r")]
    OutsideDomain(Complex64),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// The squared graph distance `psi_r(z, w) = |w - f(rz)|^2` for a fixed
/// dilation radius `r`, with the symbolic derivatives of `f` it needs.
#[derive(Debug, Clone)]
pub struct PsiFunction {
    base: DiscFunction,
    r: f64,
    dz_f: Expr,
    /// `d2 f / dz dzbar`; equals a quarter of the Laplacian of `f`.
    mixed: Expr,
}

/// Certification domain `D(0; 1/r) x D(0; M + 2 delta0)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Polydisc {
    pub z_radius: f64,
    pub w_radius: f64,
}

impl PsiFunction {
    /// Dilated variant used everywhere in certification; requires
    /// `0 < r < 1`.
    pub fn new(base: &DiscFunction, r: f64) -> Result<PsiFunction, LeviError> {
        if !(r > 0.0 && r < 1.0) {
            return Err(LeviError::BadRadius(r));
        }
        Ok(Self::with_radius(base, r))
    }

    /// Undilated variant (`r = 1`) for direct Levi-form evaluation on the
    /// closed disc; not accepted by the polydisc certificate.
    pub fn closure_limit(base: &DiscFunction) -> PsiFunction {
        Self::with_radius(base, 1.0)
    }

    fn with_radius(base: &DiscFunction, r: f64) -> PsiFunction {
        PsiFunction {
            dz_f: base.f.wirtinger_dz(),
            mixed: base.f.wirtinger_dzbar().wirtinger_dz(),
            base: base.clone(),
            r,
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn base(&self) -> &DiscFunction {
        &self.base
    }

    pub fn polydisc(&self) -> Polydisc {
        Polydisc {
            z_radius: 1.0 / self.r,
            w_radius: self.base.m + 2.0 * self.base.delta0,
        }
    }

    /// Value of `psi_r` at `(z, w)`.
    pub fn value(&self, z: Complex64, w: Complex64) -> Result<f64, LeviError> {
        let u = self.base.f.eval(self.r * z)?;
        Ok((w - u).norm_sqr())
    }

    fn coefficients(&self, z: Complex64) -> Result<LeviCoefficients, LeviError> {
        if self.r * z.norm() > 1.0 + 1e-12 {
            return Err(LeviError::OutsideDomain(z));
        }
        let zz = self.r * z;
        let r2 = self.r * self.r;
        Ok(LeviCoefficients {
            value: self.base.f.eval(zz)?,
            g_z: self.r * self.dz_f.eval(zz)?,
            g_zbar_sq: r2 * self.base.dzbar_f.eval(zz)?.norm_sqr(),
            g_mixed: r2 * self.mixed.eval(zz)?,
        })
    }

    /// Exact Levi form of `psi_r` at `(z, w)` applied to `V`.
    pub fn levi_form(
        &self,
        z: Complex64,
        w: Complex64,
        v: (Complex64, Complex64),
    ) -> Result<f64, LeviError> {
        Ok(self.coefficients(z)?.quadratic_form(w, v))
    }

    /// The lower-bound side of the Levi inequality: the coefficient of
    /// `|V1|^2` that survives after completing the square in `V2`.
    pub fn lemma_lower_bound(&self, z: Complex64, w: Complex64) -> Result<f64, LeviError> {
        let co = self.coefficients(z)?;
        Ok(co.bracket(w))
    }
}

struct LeviCoefficients {
    value: Complex64,
    g_z: Complex64,
    g_zbar_sq: f64,
    g_mixed: Complex64,
}

impl LeviCoefficients {
    /// `2 Re(g_zzbar conj(g - w)) + |g_zbar|^2`
    fn bracket(&self, w: Complex64) -> f64 {
        2.0 * (self.g_mixed * (self.value - w).conj()).re + self.g_zbar_sq
    }

    /// `d2 psi / dz dzbar`
    fn zz(&self, w: Complex64) -> f64 {
        self.bracket(w) + self.g_z.norm_sqr()
    }

    fn quadratic_form(&self, w: Complex64, v: (Complex64, Complex64)) -> f64 {
        self.zz(w) * v.0.norm_sqr() - 2.0 * (self.g_z * v.0 * v.1.conj()).re + v.1.norm_sqr()
    }

    /// Smaller eigenvalue of the Hermitian matrix
    /// `[[zz, -g_z], [-conj(g_z), 1]]`.
    fn min_eigenvalue(&self, w: Complex64) -> f64 {
        let a = self.zz(w);
        ((a + 1.0) - f64::hypot(a - 1.0, 2.0 * self.g_z.norm())) / 2.0
    }
}

/// Result of the random-sample check of the Levi inequality and the
/// completed-square identity.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub samples: usize,
    /// Smallest observed `L(V) - bound * |V1|^2`.
    pub min_gap: f64,
    /// Largest relative mismatch between the gap and
    /// `|g_z V1 - V2|^2`.
    pub max_identity_error: f64,
    pub pass: bool,
}

/// Draws `samples` random `(z, w, V)` tuples with `z` in the polydisc base,
/// `w` in its fiber and `V` in the unit bidisc, and checks that the Levi
/// form dominates the `|V1|^2` lower bound and matches the completed-square
/// identity.
pub fn verify_lemma_bound(
    psi: &PsiFunction,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<LemmaCheck, LeviError> {
    let pd = psi.polydisc();
    let mut min_gap = f64::INFINITY;
    let mut max_identity_error: f64 = 0.0;
    let random_disc = |radius: f64, rng: &mut dyn rand::RngCore| {
        let r = radius * rng.gen::<f64>().sqrt();
        let theta = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
        Complex64::from_polar(r, theta)
    };
    for _ in 0..samples.max(1) {
        let z = random_disc(pd.z_radius, rng);
        let w = random_disc(pd.w_radius, rng);
        let v = (random_disc(1.0, rng), random_disc(1.0, rng));
        let co = psi.coefficients(z)?;
        let levi = co.quadratic_form(w, v);
        let bound = co.bracket(w) * v.0.norm_sqr();
        let gap = levi - bound;
        let square = (co.g_z * v.0 - v.1).norm_sqr();
        min_gap = min_gap.min(gap);
        let err = (gap - square).abs() / square.max(1.0);
        max_identity_error = max_identity_error.max(err);
    }
    Ok(LemmaCheck {
        samples,
        min_gap,
        max_identity_error,
        pass: min_gap >= -PSH_TOLERANCE && max_identity_error <= PSH_TOLERANCE,
    })
}

/// Grid resolution for the certificate: a polar grid scaled to the
/// `z`-radius `1/r`, and concentric circles in `w` out to the fiber radius.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CertificationGrid {
    pub z_n_r: usize,
    pub z_n_theta: usize,
    pub w_radii: usize,
    pub w_angles: usize,
}

impl Default for CertificationGrid {
    fn default() -> Self {
        CertificationGrid { z_n_r: 32, z_n_theta: 128, w_radii: 8, w_angles: 32 }
    }
}

/// Plurisubharmonicity certificate for one dilation radius.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeviReport {
    pub r: f64,
    pub polydisc: Polydisc,
    pub grid: CertificationGrid,
    pub points_checked: usize,
    /// Global minimum of the smaller Levi eigenvalue over the sampled
    /// polydisc.
    pub min_eigenvalue: f64,
    pub min_at_z: Complex64,
    pub min_at_w: Complex64,
    pub tolerance: f64,
    pub pass: bool,
    /// Fraction of sampled points where the analytic sufficient inequality
    /// `|f_zbar(rz)|^2 >= 2 |f(rz) - w| |lap R(rz)| / 4` held.
    pub sufficient_inequality_fraction: f64,
    /// Outcome of the condition (b) check this certificate leans on.
    pub condition_b: ConditionB,
}

/// Scans the Levi matrix over a grid on the polydisc and certifies
/// nonnegativity of its smaller eigenvalue. `cond_b` is embedded so a
/// certificate can always be traced back to the hypothesis evidence it
/// relied on.
pub fn certify_psh(
    psi: &PsiFunction,
    cond_b: &ConditionB,
    grid: CertificationGrid,
) -> Result<LeviReport, LeviError> {
    if !(psi.r > 0.0 && psi.r < 1.0) {
        return Err(LeviError::BadRadius(psi.r));
    }
    let pd = psi.polydisc();
    let zg = DiscGrid::new(grid.z_n_r, grid.z_n_theta)?;
    let w_points: Vec<Complex64> = (0..grid.w_radii)
        .flat_map(|j| {
            let radius = pd.w_radius * (j + 1) as f64 / grid.w_radii as f64;
            (0..grid.w_angles).map(move |k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / grid.w_angles as f64;
                Complex64::from_polar(radius, theta)
            })
        })
        .collect();

    struct PointScan {
        min_eig: f64,
        at_z: Complex64,
        at_w: Complex64,
        sufficient_ok: usize,
    }

    let scans = zg
        .points()
        .par_iter()
        .map(|&base_z| -> Result<PointScan, LeviError> {
            let z = base_z * pd.z_radius;
            let co = psi.coefficients(z)?;
            let lap_r = psi.base.lap_r.eval(psi.r * z)?.norm();
            let mut scan = PointScan {
                min_eig: f64::INFINITY,
                at_z: z,
                at_w: Complex64::new(0.0, 0.0),
                sufficient_ok: 0,
            };
            for &w in &w_points {
                let eig = co.min_eigenvalue(w);
                if eig < scan.min_eig {
                    scan.min_eig = eig;
                    scan.at_w = w;
                }
                let fzbar_sq = co.g_zbar_sq / (psi.r * psi.r);
                if fzbar_sq >= 2.0 * (co.value - w).norm() * lap_r / 4.0 {
                    scan.sufficient_ok += 1;
                }
            }
            Ok(scan)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut min_eigenvalue = f64::INFINITY;
    let mut min_at_z = Complex64::new(0.0, 0.0);
    let mut min_at_w = Complex64::new(0.0, 0.0);
    let mut sufficient_ok = 0usize;
    for scan in &scans {
        sufficient_ok += scan.sufficient_ok;
        if scan.min_eig < min_eigenvalue {
            min_eigenvalue = scan.min_eig;
            min_at_z = scan.at_z;
            min_at_w = scan.at_w;
        }
    }
    let points_checked = scans.len() * w_points.len();
    Ok(LeviReport {
        r: psi.r,
        polydisc: pd,
        grid,
        points_checked,
        min_eigenvalue,
        min_at_z,
        min_at_w,
        tolerance: PSH_TOLERANCE,
        pass: min_eigenvalue >= -PSH_TOLERANCE,
        sufficient_inequality_fraction: sufficient_ok as f64 / points_checked as f64,
        condition_b: *cond_b,
    })
}
