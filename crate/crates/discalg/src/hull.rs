//! Exclusion probe for the polynomial hull of the graph of `f` over the
//! closed disc.
//!
//! For a query point `p = (z0, w0)` off the graph, let
//! `eps^2 = |w0 - f(z0)|^2` and pick the dilation `r = 1 - delta(eps/3)`
//! from the dilation modulus of continuity. Then `psi_r = |w - f(rz)|^2`
//! separates `p` from the graph:
//!
//! ```text
//! psi_r(p) > 4 eps^2 / 9      and      psi_r < eps^2 / 9 on the graph,
//! ```
//!
//! and since `psi_r` is plurisubharmonic on a Runge polydisc containing
//! both (certified separately by [`crate::levi`]), the psh characterization
//! of hulls on pseudoconvex domains excludes `p`. The probe verifies the
//! two displayed inequalities numerically and reports a verdict; `sweep`
//! runs it over a lattice of queries.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{ContinuityModulus, DiscGrid, GridError};
use crate::hypotheses::DiscFunction;

/// Membership tolerance on `psi_1(p)`; squared distances below this count
/// as lying on the graph.
pub const GRAPH_TOLERANCE: f64 = 1e-10;

/// Default radius of the tube around the graph removed from query lattices.
pub const DEFAULT_TUBE_RADIUS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Excluded,
    OnGraph,
    Inconclusive,
}

/// Outcome of probing one query point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HullProbeResult {
    pub p: (Complex64, Complex64),
    /// `|w0 - f(z0)|^2`; `None` only for points outside the unit disc in z,
    /// where `f` is not defined.
    pub psi1: Option<f64>,
    pub eps: Option<f64>,
    /// Dilation radius `1 - delta(eps/3)` when the modulus certified one.
    pub r_p: Option<f64>,
    /// `psi_{r_p}(p)`.
    pub lhs: Option<f64>,
    /// Max of `psi_{r_p}` over the sampled graph.
    pub rhs_sup: Option<f64>,
    pub verdict: Verdict,
    /// True when the point was excluded simply for leaving the enclosing
    /// box `closed disc x D(0; M + 2 delta0)`; the separation inequalities
    /// are not evaluated in that case.
    pub excluded_by_box: bool,
}

/// Numeric slack on the separation inequalities.
fn separation_tolerance(eps: f64) -> f64 {
    1e-12 * (1.0 + eps * eps)
}

/// Max of `|f(z) - f(rz)|^2` over the graph grid.
fn graph_rhs_sup(d: &DiscFunction, g: &DiscGrid, r: f64) -> Result<f64, GridError> {
    g.points()
        .par_iter()
        .map(|&z| {
            let a = d.f.eval(z)?;
            let b = d.f.eval(r * z)?;
            Ok((a - b).norm_sqr())
        })
        .try_reduce(|| 0.0, |a, b| Ok(f64::max(a, b)))
}

fn probe_with(
    d: &DiscFunction,
    modulus: &ContinuityModulus,
    p: (Complex64, Complex64),
    mut rhs_for: impl FnMut(f64) -> Result<f64, GridError>,
) -> Result<HullProbeResult, GridError> {
    let (z0, w0) = p;
    let rho = d.m + 2.0 * d.delta0;
    if z0.norm() > 1.0 || w0.norm() > rho {
        let psi1 = if z0.norm() <= 1.0 {
            Some((w0 - d.f.eval(z0)?).norm_sqr())
        } else {
            None
        };
        return Ok(HullProbeResult {
            p,
            eps: psi1.map(f64::sqrt),
            psi1,
            r_p: None,
            lhs: None,
            rhs_sup: None,
            verdict: Verdict::Excluded,
            excluded_by_box: true,
        });
    }
    let psi1 = (w0 - d.f.eval(z0)?).norm_sqr();
    let eps = psi1.sqrt();
    if psi1 <= GRAPH_TOLERANCE {
        return Ok(HullProbeResult {
            p,
            psi1: Some(psi1),
            eps: Some(eps),
            r_p: None,
            lhs: None,
            rhs_sup: None,
            verdict: Verdict::OnGraph,
            excluded_by_box: false,
        });
    }
    let Some(delta) = modulus.delta_for(eps / 3.0) else {
        return Ok(HullProbeResult {
            p,
            psi1: Some(psi1),
            eps: Some(eps),
            r_p: None,
            lhs: None,
            rhs_sup: None,
            verdict: Verdict::Inconclusive,
            excluded_by_box: false,
        });
    };
    let r_p = 1.0 - delta;
    let lhs = (w0 - d.f.eval(r_p * z0)?).norm_sqr();
    let rhs_sup = rhs_for(r_p)?;
    let tol = separation_tolerance(eps);
    let separated = lhs > 4.0 * psi1 / 9.0 - tol && rhs_sup < psi1 / 9.0 + tol;
    Ok(HullProbeResult {
        p,
        psi1: Some(psi1),
        eps: Some(eps),
        r_p: Some(r_p),
        lhs: Some(lhs),
        rhs_sup: Some(rhs_sup),
        verdict: if separated { Verdict::Excluded } else { Verdict::Inconclusive },
        excluded_by_box: false,
    })
}

/// Probes a single query point against the graph sampled on `g`.
pub fn probe(
    d: &DiscFunction,
    modulus: &ContinuityModulus,
    p: (Complex64, Complex64),
    g: &DiscGrid,
) -> Result<HullProbeResult, GridError> {
    probe_with(d, modulus, p, |r| graph_rhs_sup(d, g, r))
}

/// Aggregated verdict counts for a query sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub total: usize,
    pub excluded: usize,
    /// Subset of `excluded` that never needed the separation argument.
    pub excluded_by_box: usize,
    pub on_graph: usize,
    pub inconclusive: usize,
    /// `excluded / (excluded + inconclusive)`; `None` when every query was
    /// on the graph or the sweep was empty.
    pub excluded_fraction: Option<f64>,
}

/// Runs the probe over a query set. The dilation radius only takes the
/// dyadic values of the modulus table, so the graph-side sup for each value
/// is computed once and shared across queries.
pub fn sweep(
    d: &DiscFunction,
    modulus: &ContinuityModulus,
    queries: &[(Complex64, Complex64)],
    g: &DiscGrid,
) -> Result<SweepSummary, GridError> {
    // Collect the dilation radii the sweep will need.
    let mut radii: Vec<f64> = Vec::new();
    for &(z0, w0) in queries {
        let rho = d.m + 2.0 * d.delta0;
        if z0.norm() > 1.0 || w0.norm() > rho {
            continue;
        }
        let psi1 = (w0 - d.f.eval(z0).map_err(GridError::from)?).norm_sqr();
        if psi1 <= GRAPH_TOLERANCE {
            continue;
        }
        if let Some(delta) = modulus.delta_for(psi1.sqrt() / 3.0) {
            let r = 1.0 - delta;
            if !radii.contains(&r) {
                radii.push(r);
            }
        }
    }
    let rhs_cache: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| Ok((r, graph_rhs_sup(d, g, r)?)))
        .collect::<Result<_, GridError>>()?;
    let cached = |r: f64| -> Result<f64, GridError> {
        match rhs_cache.iter().find(|(rr, _)| *rr == r) {
            Some((_, v)) => Ok(*v),
            None => graph_rhs_sup(d, g, r),
        }
    };

    let results = queries
        .par_iter()
        .map(|&p| probe_with(d, modulus, p, cached))
        .collect::<Result<Vec<_>, GridError>>()?;

    let mut summary = SweepSummary {
        total: results.len(),
        excluded: 0,
        excluded_by_box: 0,
        on_graph: 0,
        inconclusive: 0,
        excluded_fraction: None,
    };
    for r in &results {
        match r.verdict {
            Verdict::Excluded => {
                summary.excluded += 1;
                if r.excluded_by_box {
                    summary.excluded_by_box += 1;
                }
            }
            Verdict::OnGraph => summary.on_graph += 1,
            Verdict::Inconclusive => summary.inconclusive += 1,
        }
    }
    let decidable = summary.excluded + summary.inconclusive;
    if decidable > 0 {
        summary.excluded_fraction = Some(summary.excluded as f64 / decidable as f64);
    }
    Ok(summary)
}

/// Query-lattice shape: a Cartesian grid in `z` over the square enclosing
/// the disc, times concentric circles in `w` out to `M + 2 delta0`, minus a
/// tube around the graph.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LatticeParams {
    pub z_side: usize,
    pub w_radii: usize,
    pub w_angles: usize,
    pub tube_radius: f64,
}

impl Default for LatticeParams {
    fn default() -> Self {
        LatticeParams { z_side: 16, w_radii: 8, w_angles: 16, tube_radius: DEFAULT_TUBE_RADIUS }
    }
}

/// Builds the default query lattice for `d`.
pub fn default_lattice(
    d: &DiscFunction,
    params: LatticeParams,
) -> Result<Vec<(Complex64, Complex64)>, GridError> {
    let rho = d.m + 2.0 * d.delta0;
    let n = params.z_side.max(2);
    let mut queries = Vec::new();
    for ix in 0..n {
        for iy in 0..n {
            let x = -1.0 + 2.0 * ix as f64 / (n - 1) as f64;
            let y = -1.0 + 2.0 * iy as f64 / (n - 1) as f64;
            let z = Complex64::new(x, y);
            if z.norm() > 1.0 {
                continue;
            }
            let fz = d.f.eval(z).map_err(GridError::from)?;
            for j in 0..params.w_radii {
                let radius = rho * (j + 1) as f64 / params.w_radii as f64;
                for k in 0..params.w_angles {
                    let theta = 2.0 * std::f64::consts::PI * k as f64 / params.w_angles as f64;
                    let w = Complex64::from_polar(radius, theta);
                    if (w - fz).norm() > params.tube_radius {
                        queries.push((z, w));
                    }
                }
            }
        }
    }
    Ok(queries)
}
