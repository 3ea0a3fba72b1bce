//! Machine checks for the two hypotheses on a pair `(h, R)`:
//!
//! (a) the set where `d/dzbar (h + R)` vanishes should be negligible, and
//! (b) `|lap R| <= C |d/dzbar (h + R)|^2 / M` on the open disc, where
//!     `M = sup |h + R|` and `C` is a fixed constant in `(0, 1)`.
//!
//! Both are sampled evidence on a finite grid, not proofs; every report
//! records the tolerances and thresholds it used. The derived constant
//! `delta0 = (1/C - 1) M` rewrites (b) as
//! `|lap R| <= |d/dzbar f|^2 / (M + delta0)`, the form the
//! plurisubharmonicity certificate consumes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Expr;
use crate::grid::{sup_norm, DiscGrid, GridError};

/// Grid fraction of near-critical points above which condition (a) is
/// considered violated.
pub const CONDITION_A_MAX_FRACTION: f64 = 0.01;

/// Default tolerance for "near-critical": `|d/dzbar f| <= tau`.
pub const CONDITION_A_DEFAULT_TAU: f64 = 1e-8;

/// Points with `|d/dzbar f|` below this are treated as exact critical points
/// in condition (b); any Laplacian mass there makes the bound unattainable.
pub const CRITICAL_GUARD: f64 = 1e-14;

/// `h` is flagged non-harmonic when `max |lap h|` exceeds this.
pub const HARMONICITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HypothesisError {
    #[error("constant C must lie strictly between 0 and 1, got {0}")]
    BadConstant(f64),
    #[error("condition (b) is undefined for the zero function (M = 0)")]
    ZeroSupNorm,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// A pair `(h, R)` with the derived function `f = h + R`, its symbolic
/// derivatives, and cached constants.
#[derive(Debug, Clone)]
pub struct DiscFunction {
    pub h: Expr,
    pub r: Expr,
    pub f: Expr,
    pub dzbar_f: Expr,
    pub lap_r: Expr,
    pub lap_h: Expr,
    /// Grid estimate of `sup |f|` over the closed disc.
    pub m: f64,
    /// Target constant in `(0, 1)` for condition (b).
    pub c: f64,
    /// `(1/C - 1) * M`, or 1 when `M = 0`.
    pub delta0: f64,
    /// Mesh width of the grid that produced `m`.
    pub grid_spacing: f64,
}

/// Builds the derived data for `(h, R)` with target constant `c`, measuring
/// `M` on the supplied grid.
pub fn build(h: &Expr, r: &Expr, c: f64, g: &DiscGrid) -> Result<DiscFunction, HypothesisError> {
    if !(c > 0.0 && c < 1.0) {
        return Err(HypothesisError::BadConstant(c));
    }
    let f = Expr::Add(h.clone().into(), r.clone().into());
    let est = sup_norm(&f, g)?;
    let m = est.value;
    let delta0 = if m > 0.0 { (1.0 / c - 1.0) * m } else { 1.0 };
    Ok(DiscFunction {
        dzbar_f: f.wirtinger_dzbar(),
        lap_r: r.laplacian(),
        lap_h: h.laplacian(),
        h: h.clone(),
        r: r.clone(),
        f,
        m,
        c,
        delta0,
        grid_spacing: est.grid_spacing,
    })
}

/// Outcome of the condition (a) sampling check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConditionA {
    /// Area-weighted fraction of interior grid points with
    /// `|d/dzbar f| <= tau`.
    pub near_critical_fraction: f64,
    pub tau: f64,
    /// Fraction threshold the pass flag compares against.
    pub threshold: f64,
    pub pass: bool,
}

/// Outcome of the condition (b) bound check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConditionB {
    /// `max |lap R| * M / |d/dzbar f|^2` over interior points where the
    /// derivative is above the critical guard.
    pub max_ratio: f64,
    /// Smallest admissible constant, `None` when a guarded critical point
    /// carries Laplacian mass (no constant works).
    pub minimal_c: Option<f64>,
    /// Interior points with `|d/dzbar f| <= CRITICAL_GUARD` and
    /// `|lap R| > 0`.
    pub guard_violations: usize,
    pub c: f64,
    pub pass: bool,
}

/// Hypothesis evidence for one `(h, R, C)` configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// `max |lap h|` over interior grid points.
    pub harmonicity_residual: f64,
    pub harmonic: bool,
    pub condition_a: ConditionA,
    pub condition_b: ConditionB,
    pub m: f64,
    pub delta0: f64,
    pub c: f64,
    pub grid_n_r: usize,
    pub grid_n_theta: usize,
    pub grid_spacing: f64,
    /// Sampling caveat carried into every serialized report.
    pub note: String,
}

/// Area-weighted near-critical fraction over interior points.
pub fn check_condition_a(
    d: &DiscFunction,
    g: &DiscGrid,
    tau: f64,
) -> Result<ConditionA, HypothesisError> {
    let interior = g.interior_points();
    let mut values = Vec::with_capacity(interior.len());
    for &z in interior {
        values.push((z, d.dzbar_f.eval(z).map_err(GridError::from)?.norm()));
    }
    let mut idx = 0;
    let near_critical_fraction = DiscGrid::weighted_fraction(interior, |_| {
        let hit = values[idx].1 <= tau;
        idx += 1;
        hit
    });
    Ok(ConditionA {
        near_critical_fraction,
        tau,
        threshold: CONDITION_A_MAX_FRACTION,
        pass: near_critical_fraction <= CONDITION_A_MAX_FRACTION,
    })
}

/// Checks `|lap R| <= C |d/dzbar f|^2 / M` over interior grid points and
/// reports the smallest constant that would pass.
pub fn check_condition_b(d: &DiscFunction, g: &DiscGrid) -> Result<ConditionB, HypothesisError> {
    if d.m <= 0.0 {
        return Err(HypothesisError::ZeroSupNorm);
    }
    let mut max_ratio: f64 = 0.0;
    let mut guard_violations = 0usize;
    for &z in g.interior_points() {
        let lap = d.lap_r.eval(z).map_err(GridError::from)?.norm();
        let deriv = d.dzbar_f.eval(z).map_err(GridError::from)?.norm();
        if deriv <= CRITICAL_GUARD {
            if lap > 0.0 {
                guard_violations += 1;
            }
            continue;
        }
        max_ratio = max_ratio.max(lap * d.m / (deriv * deriv));
    }
    let minimal_c = if guard_violations == 0 { Some(max_ratio) } else { None };
    Ok(ConditionB {
        max_ratio,
        minimal_c,
        guard_violations,
        c: d.c,
        pass: guard_violations == 0 && max_ratio <= d.c,
    })
}

/// Max of `|lap h|` over interior grid points.
pub fn check_harmonicity(d: &DiscFunction, g: &DiscGrid) -> Result<f64, HypothesisError> {
    let mut worst: f64 = 0.0;
    for &z in g.interior_points() {
        worst = worst.max(d.lap_h.eval(z).map_err(GridError::from)?.norm());
    }
    Ok(worst)
}

/// Runs all three checks and assembles the report.
pub fn report(
    d: &DiscFunction,
    g: &DiscGrid,
    tau: f64,
) -> Result<HypothesisReport, HypothesisError> {
    let harmonicity_residual = check_harmonicity(d, g)?;
    let condition_a = check_condition_a(d, g, tau)?;
    let condition_b = check_condition_b(d, g)?;
    Ok(HypothesisReport {
        harmonicity_residual,
        harmonic: harmonicity_residual <= HARMONICITY_TOLERANCE,
        condition_a,
        condition_b,
        m: d.m,
        delta0: d.delta0,
        c: d.c,
        grid_n_r: g.n_r(),
        grid_n_theta: g.n_theta(),
        grid_spacing: g.spacing(),
        note: "grid sampling evidence, not a proof; conditions are checked only at the \
               sampled points"
            .to_string(),
    })
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.harmonic && self.condition_a.pass && self.condition_b.pass
    }
}

/// Pointwise condition (b) in its original form,
/// `|lap R| * M <= C * |d/dzbar f|^2`.
pub fn bound_holds_at(d: &DiscFunction, z: Complex64) -> Result<bool, HypothesisError> {
    let lap = d.lap_r.eval(z).map_err(GridError::from)?.norm();
    let deriv = d.dzbar_f.eval(z).map_err(GridError::from)?.norm();
    Ok(lap * d.m <= d.c * deriv * deriv)
}

/// Pointwise condition (b) in its shifted form,
/// `|lap R| * (M + delta0) <= |d/dzbar f|^2`. With `delta0 = (1/C - 1) M`
/// this is the same inequality, so the two predicates must agree at every
/// point.
pub fn shifted_bound_holds_at(d: &DiscFunction, z: Complex64) -> Result<bool, HypothesisError> {
    let lap = d.lap_r.eval(z).map_err(GridError::from)?.norm();
    let deriv = d.dzbar_f.eval(z).map_err(GridError::from)?.norm();
    Ok(lap * (d.m + d.delta0) <= deriv * deriv)
}
