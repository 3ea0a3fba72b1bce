//! Polar sampling of the closed unit disc, finite-difference Wirtinger
//! estimators, sup-norm estimation, and the dilation modulus of continuity.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr};

/// Default step for the finite-difference stencils.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Safety factor inside the continuity modulus: grid maxima under-estimate
/// true suprema, so a dilation gap is accepted only below `0.9 * epsilon`.
pub const MODULUS_SAFETY: f64 = 0.1;

/// Smallest tabulated dilation parameter is `2^-MODULUS_MAX_K`.
pub const MODULUS_MAX_K: u32 = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least 2 radii and 8 angles, got {n_r} x {n_theta}")]
    TooCoarse { n_r: usize, n_theta: usize },
    #[error("finite-difference stencil at z = {at} with step {step} leaves the open disc")]
    StencilOutsideDisc { at: Complex64, step: f64 },
    #[error("continuity modulus needs positive epsilon values, got {0}")]
    NonPositiveEpsilon(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Polar grid on the closed unit disc: the center once, plus `n_r - 1`
/// concentric rings at radii `j / (n_r - 1)` with `n_theta` equispaced
/// angles each. The boundary circle is always included.
#[derive(Debug, Clone)]
pub struct DiscGrid {
    n_r: usize,
    n_theta: usize,
    points: Vec<Complex64>,
}

impl DiscGrid {
    pub fn new(n_r: usize, n_theta: usize) -> Result<DiscGrid, GridError> {
        if n_r < 2 || n_theta < 8 {
            return Err(GridError::TooCoarse { n_r, n_theta });
        }
        let mut points = Vec::with_capacity((n_r - 1) * n_theta + 1);
        points.push(Complex64::new(0.0, 0.0));
        for j in 1..n_r {
            let r = j as f64 / (n_r - 1) as f64;
            for k in 0..n_theta {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / n_theta as f64;
                points.push(Complex64::from_polar(r, theta));
            }
        }
        Ok(DiscGrid { n_r, n_theta, points })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    /// All sample points, center first, rings in increasing radius.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Points strictly inside the open disc (center plus all rings except
    /// the boundary circle). Selected by construction index, not by a float
    /// comparison.
    pub fn interior_points(&self) -> &[Complex64] {
        &self.points[..1 + (self.n_r - 2) * self.n_theta]
    }

    /// Characteristic mesh width: the larger of the radial spacing and the
    /// boundary arc length between consecutive angles.
    pub fn spacing(&self) -> f64 {
        let dr = 1.0 / (self.n_r - 1) as f64;
        let darc = 2.0 * std::f64::consts::PI / self.n_theta as f64;
        dr.max(darc)
    }

    /// Area-weighted fraction of `points` satisfying `pred`, with each polar
    /// point weighted by its radius (the polar area element). The center
    /// carries zero weight.
    pub fn weighted_fraction(
        points: &[Complex64],
        mut pred: impl FnMut(Complex64) -> bool,
    ) -> f64 {
        let mut total = 0.0;
        let mut hit = 0.0;
        for &z in points {
            let w = z.norm();
            total += w;
            if pred(z) {
                hit += w;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            hit / total
        }
    }
}

/// A grid sup-norm together with the mesh width it was measured on, so
/// callers can budget a Lipschitz safety margin.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SupNormEstimate {
    pub value: f64,
    pub grid_spacing: f64,
}

/// Max of `|e|` over the grid.
pub fn sup_norm(e: &Expr, g: &DiscGrid) -> Result<SupNormEstimate, GridError> {
    let value = g
        .points()
        .par_iter()
        .map(|&z| e.eval(z).map(|v| v.norm()))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    Ok(SupNormEstimate {
        value,
        grid_spacing: g.spacing(),
    })
}

/// Central-difference estimates of the Wirtinger derivatives at `z`:
/// `dz = (dx - i dy)/2`, `dzbar = (dx + i dy)/2`. The stencil must stay in
/// the open disc.
pub fn fd_wirtinger(
    e: &Expr,
    z: Complex64,
    step: f64,
) -> Result<(Complex64, Complex64), GridError> {
    let reach = z.norm() + step;
    if step <= 0.0 || reach >= 1.0 || reach.is_nan() {
        return Err(GridError::StencilOutsideDisc { at: z, step });
    }
    let h = Complex64::new(step, 0.0);
    let ih = Complex64::new(0.0, step);
    let dx = (e.eval(z + h)? - e.eval(z - h)?) / (2.0 * step);
    let dy = (e.eval(z + ih)? - e.eval(z - ih)?) / (2.0 * step);
    let i = Complex64::new(0.0, 1.0);
    Ok(((dx - i * dy) / 2.0, (dx + i * dy) / 2.0))
}

/// One row of the modulus table: for tolerance `epsilon`, dilating the
/// argument by `1 - delta` keeps the function within `epsilon` on the grid.
/// `certified` is false when even the smallest tabulated delta failed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModulusEntry {
    pub epsilon: f64,
    pub delta: f64,
    pub certified: bool,
}

/// Uniform-continuity data along the dilation family `z -> (1-delta) z`,
/// for delta in the dyadic table `{2^-1, ..., 2^-20}`.
///
/// The struct stores the measured dilation gaps
/// `gap[k-1] = max_z |f((1 - 2^-k) z) - f(z)|`, which determine `delta(eps)`
/// for every requested tolerance; the `entries` table is the view for the
/// epsilon list it was built with.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuityModulus {
    pub entries: Vec<ModulusEntry>,
    dilation_gap: Vec<f64>,
    pub n_r: usize,
    pub n_theta: usize,
}

impl ContinuityModulus {
    /// Largest tabulated delta whose measured dilation gap is below
    /// `0.9 * eps`, or `None` when the table cannot certify one.
    pub fn delta_for(&self, eps: f64) -> Option<f64> {
        if eps <= 0.0 {
            return None;
        }
        let bound = eps * (1.0 - MODULUS_SAFETY);
        for (idx, &gap) in self.dilation_gap.iter().enumerate() {
            if gap < bound {
                return Some(0.5f64.powi(idx as i32 + 1));
            }
        }
        None
    }
}

/// Measures the dilation modulus of `f` on the grid for each epsilon in
/// `eps_list`. Epsilons must be positive; for an epsilon that not even
/// `2^-20` satisfies, the entry reports `2^-20` with `certified = false`.
pub fn continuity_modulus(
    f: &Expr,
    g: &DiscGrid,
    eps_list: &[f64],
) -> Result<ContinuityModulus, GridError> {
    for &eps in eps_list {
        if eps <= 0.0 {
            return Err(GridError::NonPositiveEpsilon(eps));
        }
    }
    let dilation_gap = (1..=MODULUS_MAX_K)
        .map(|k| {
            let delta = 0.5f64.powi(k as i32);
            g.points()
                .par_iter()
                .map(|&z| {
                    let a = f.eval((1.0 - delta) * z)?;
                    let b = f.eval(z)?;
                    Ok((a - b).norm())
                })
                .try_reduce(|| 0.0, |a, b| Ok(f64::max(a, b)))
        })
        .collect::<Result<Vec<f64>, GridError>>()?;

    let modulus = ContinuityModulus {
        entries: Vec::new(),
        dilation_gap,
        n_r: g.n_r(),
        n_theta: g.n_theta(),
    };
    let entries = eps_list
        .iter()
        .map(|&eps| match modulus.delta_for(eps) {
            Some(delta) => ModulusEntry { epsilon: eps, delta, certified: true },
            None => ModulusEntry {
                epsilon: eps,
                delta: 0.5f64.powi(MODULUS_MAX_K as i32),
                certified: false,
            },
        })
        .collect();
    Ok(ContinuityModulus { entries, ..modulus })
}
