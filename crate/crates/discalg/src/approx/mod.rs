//! Density measurements: sup-norm approximation of continuous targets by
//! polynomials in the two generators `z` and `f`.
//!
//! A [`GeneratorBasis`] evaluates the monomials `z^a f^b`, `a + b <= d`,
//! over a disc grid, with columns scaled to unit max magnitude for
//! conditioning. [`fit`] solves the discrete approximation problem either by
//! plain least squares or by Lawson's iteratively reweighted least squares,
//! which pushes the solution toward the minimax fit. [`density_curve`]
//! tracks the error degree by degree; a curve falling toward zero is the
//! observable consequence of density, a flat curve its failure.

mod solver;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::grid::DiscGrid;
use crate::hypotheses::DiscFunction;
use solver::{predictions, Cgs2};

/// Relative threshold below which an orthogonalized basis column counts as
/// dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Lawson iteration budget and the weight-change stopping tolerance.
pub const LAWSON_MAX_ITER: usize = 30;
pub const LAWSON_WEIGHT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApproxError {
    #[error("grid with {points} points undersamples {columns} basis columns (need >= 2x)")]
    Undersampled { points: usize, columns: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Evaluation matrix of the monomials `z^a f^b` with `a + b <= degree`,
/// ordered by total degree and, within a degree, by decreasing `z`-power.
/// This ordering nests: the basis of degree `d` is a prefix of degree
/// `d + 1`.
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    pub degree: usize,
    /// `(a, b)` exponent pairs, one per column.
    pub monomials: Vec<(u32, u32)>,
    /// Column-major evaluations, each scaled by `1 / scales[j]`.
    columns: Vec<Vec<Complex64>>,
    /// Max row magnitude of each raw column (1 for identically zero
    /// columns), so original-monomial coefficients stay recoverable.
    scales: Vec<f64>,
    points: Vec<Complex64>,
}

/// Number of monomials of total degree at most `d`.
pub fn basis_size(d: usize) -> usize {
    (d + 1) * (d + 2) / 2
}

/// Evaluates the generator monomials over the grid.
pub fn build_basis(
    d: &DiscFunction,
    degree: usize,
    g: &DiscGrid,
) -> Result<GeneratorBasis, ApproxError> {
    let points = g.points().to_vec();
    let f_vals = points
        .iter()
        .map(|&z| d.f.eval(z))
        .collect::<Result<Vec<_>, _>>()?;
    let mut monomials = Vec::with_capacity(basis_size(degree));
    for t in 0..=degree as u32 {
        for a in (0..=t).rev() {
            monomials.push((a, t - a));
        }
    }
    let mut columns = Vec::with_capacity(monomials.len());
    let mut scales = Vec::with_capacity(monomials.len());
    for &(a, b) in &monomials {
        let mut col: Vec<Complex64> = points
            .iter()
            .zip(&f_vals)
            .map(|(&z, &fz)| z.powu(a) * fz.powu(b))
            .collect();
        let scale = col.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        for v in &mut col {
            *v /= scale;
        }
        columns.push(col);
        scales.push(scale);
    }
    Ok(GeneratorBasis { degree, monomials, columns, scales, points })
}

impl GeneratorBasis {
    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Raw (unscaled) value of column `j` at point index `i`.
    pub fn monomial_value(&self, j: usize, i: usize) -> Complex64 {
        self.columns[j][i] * self.scales[j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    LeastSquares,
    Lawson,
}

/// One fitted degree: coefficients are for the raw monomials `z^a f^b` in
/// basis order, zero on dependent columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitEntry {
    pub degree: usize,
    pub coefficients: Vec<Complex64>,
    /// Discrete sup-norm error over the grid.
    pub sup_error: f64,
    /// Root-mean-square error over the grid.
    pub ls_error: f64,
    /// Indices of basis columns excluded as linearly dependent.
    pub dependent_columns: Vec<usize>,
}

/// Error curve of one target across degrees.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApproxResult {
    pub target: String,
    pub method: FitMethod,
    pub entries: Vec<FitEntry>,
    /// Whether `ls_error` was nonincreasing in the degree (guaranteed for
    /// least squares on nested bases, recorded for the report).
    pub ls_monotone: bool,
    /// Whether `sup_error` happened to be nonincreasing as well; least
    /// squares minimizes the mean square, so this is observed, not implied.
    pub sup_monotone: bool,
}

fn errors(target: &[Complex64], pred: &[Complex64]) -> (f64, f64) {
    let mut sup: f64 = 0.0;
    let mut sum = 0.0;
    for (t, p) in target.iter().zip(pred) {
        let e = (t - p).norm();
        sup = sup.max(e);
        sum += e * e;
    }
    (sup, (sum / target.len() as f64).sqrt())
}

struct RawFit {
    scaled_coeffs: Vec<Complex64>,
    sup_error: f64,
    ls_error: f64,
    dependent: Vec<usize>,
}

fn least_squares_raw(columns: &[Vec<Complex64>], target: &[Complex64]) -> RawFit {
    let fac = Cgs2::factorize(columns, RANK_TOLERANCE);
    let scaled_coeffs = fac.solve_prefix(target, columns.len());
    let pred = predictions(columns, &scaled_coeffs);
    let (sup_error, ls_error) = errors(target, &pred);
    RawFit { scaled_coeffs, sup_error, ls_error, dependent: fac.dependent_in_prefix(columns.len()) }
}

/// Lawson reweighting: weights are multiplied by the current residual
/// magnitudes and renormalized each round; the best iterate in the sup norm
/// is kept, starting from the plain least-squares solution.
fn lawson_raw(columns: &[Vec<Complex64>], target: &[Complex64]) -> RawFit {
    let m = target.len();
    let mut best = least_squares_raw(columns, target);
    let mut weights = vec![1.0 / m as f64; m];
    let mut residual: Vec<f64> = {
        let pred = predictions(columns, &best.scaled_coeffs);
        target.iter().zip(&pred).map(|(t, p)| (t - p).norm()).collect()
    };
    for _ in 0..LAWSON_MAX_ITER {
        let total: f64 = weights.iter().zip(&residual).map(|(w, r)| w * r).sum();
        if total <= 0.0 {
            break;
        }
        let mut max_change: f64 = 0.0;
        for (w, r) in weights.iter_mut().zip(&residual) {
            let next = *w * r / total;
            max_change = max_change.max((next - *w).abs());
            *w = next;
        }
        if max_change < LAWSON_WEIGHT_TOL {
            break;
        }
        let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let wcols: Vec<Vec<Complex64>> = columns
            .iter()
            .map(|col| col.iter().zip(&sqrt_w).map(|(v, s)| v * s).collect())
            .collect();
        let wtarget: Vec<Complex64> =
            target.iter().zip(&sqrt_w).map(|(t, s)| t * s).collect();
        let fac = Cgs2::factorize(&wcols, RANK_TOLERANCE);
        let coeffs = fac.solve_prefix(&wtarget, wcols.len());
        let pred = predictions(columns, &coeffs);
        let (sup, rms) = errors(target, &pred);
        residual = target.iter().zip(&pred).map(|(t, p)| (t - p).norm()).collect();
        if sup < best.sup_error {
            best = RawFit {
                scaled_coeffs: coeffs,
                sup_error: sup,
                ls_error: rms,
                dependent: fac.dependent_in_prefix(wcols.len()),
            };
        }
    }
    best
}

fn entry_from_raw(basis: &GeneratorBasis, raw: RawFit, n_cols: usize) -> FitEntry {
    let coefficients = raw
        .scaled_coeffs
        .iter()
        .zip(&basis.scales[..n_cols])
        .map(|(c, s)| c / s)
        .collect();
    FitEntry {
        degree: degree_of(n_cols),
        coefficients,
        sup_error: raw.sup_error,
        ls_error: raw.ls_error,
        dependent_columns: raw.dependent,
    }
}

fn degree_of(n_cols: usize) -> usize {
    let mut d = 0;
    while basis_size(d) < n_cols {
        d += 1;
    }
    d
}

/// Fits `target` against the full basis with the requested method.
pub fn fit(
    basis: &GeneratorBasis,
    target: &Expr,
    method: FitMethod,
) -> Result<FitEntry, ApproxError> {
    let n = basis.n_columns();
    if basis.points.len() < 2 * n {
        return Err(ApproxError::Undersampled { points: basis.points.len(), columns: n });
    }
    let tvals = basis
        .points
        .iter()
        .map(|&z| target.eval(z))
        .collect::<Result<Vec<_>, _>>()?;
    let raw = match method {
        FitMethod::LeastSquares => least_squares_raw(&basis.columns, &tvals),
        FitMethod::Lawson => lawson_raw(&basis.columns, &tvals),
    };
    Ok(entry_from_raw(basis, raw, n))
}

/// Fits `target` for every degree `0..=d_max` on nested bases and returns
/// the error curve. Least-squares degrees share a single factorization;
/// Lawson reweights per degree.
pub fn density_curve(
    d: &DiscFunction,
    target: &Expr,
    d_max: usize,
    g: &DiscGrid,
    method: FitMethod,
) -> Result<ApproxResult, ApproxError> {
    let basis = build_basis(d, d_max, g)?;
    if basis.points.len() < 2 * basis.n_columns() {
        return Err(ApproxError::Undersampled {
            points: basis.points.len(),
            columns: basis.n_columns(),
        });
    }
    let tvals = basis
        .points
        .iter()
        .map(|&z| target.eval(z))
        .collect::<Result<Vec<_>, _>>()?;
    let mut entries = Vec::with_capacity(d_max + 1);
    match method {
        FitMethod::LeastSquares => {
            let fac = Cgs2::factorize(&basis.columns, RANK_TOLERANCE);
            for deg in 0..=d_max {
                let n = basis_size(deg);
                let coeffs = fac.solve_prefix(&tvals, n);
                let pred = predictions(&basis.columns[..n], &coeffs);
                let (sup, rms) = errors(&tvals, &pred);
                entries.push(entry_from_raw(
                    &basis,
                    RawFit {
                        scaled_coeffs: coeffs,
                        sup_error: sup,
                        ls_error: rms,
                        dependent: fac.dependent_in_prefix(n),
                    },
                    n,
                ));
            }
        }
        FitMethod::Lawson => {
            for deg in 0..=d_max {
                let n = basis_size(deg);
                let raw = lawson_raw(&basis.columns[..n], &tvals);
                entries.push(entry_from_raw(&basis, raw, n));
            }
        }
    }
    let ls_monotone = entries.windows(2).all(|w| w[1].ls_error <= w[0].ls_error + 1e-12);
    let sup_monotone = entries.windows(2).all(|w| w[1].sup_error <= w[0].sup_error + 1e-12);
    Ok(ApproxResult { target: target.to_string(), method, entries, ls_monotone, sup_monotone })
}

/// Area-weighted fraction of the grid where `|d/dzbar f| > tau` — the set
/// on which the uniform-algebra argument has traction. Its complement
/// should agree with the near-critical fraction of the hypothesis report.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WermerDiagnostic {
    pub fraction: f64,
    pub tau: f64,
}

pub fn wermer_set(
    d: &DiscFunction,
    g: &DiscGrid,
    tau: f64,
) -> Result<WermerDiagnostic, ApproxError> {
    let points = g.points();
    let mut values = Vec::with_capacity(points.len());
    for &z in points {
        values.push(d.dzbar_f.eval(z)?.norm());
    }
    let mut idx = 0;
    let fraction = DiscGrid::weighted_fraction(points, |_| {
        let hit = values[idx] > tau;
        idx += 1;
        hit
    });
    Ok(WermerDiagnostic { fraction, tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::hypotheses::build;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disc_fn(h: &str, r: &str) -> (DiscFunction, DiscGrid) {
        let g = DiscGrid::new(32, 128).unwrap();
        let d = build(&parse(h).unwrap(), &parse(r).unwrap(), 0.5, &g).unwrap();
        (d, g)
    }

    #[test]
    fn basis_shapes() {
        let (d, g) = disc_fn("conj(z)", "0");
        let b0 = build_basis(&d, 0, &g).unwrap();
        assert_eq!(b0.n_columns(), 1);
        assert!(b0.columns[0].iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-15));

        let b1 = build_basis(&d, 1, &g).unwrap();
        assert_eq!(b1.monomials, vec![(0, 0), (1, 0), (0, 1)]);
        // third column is conj(z) evaluated at the grid
        for (i, &z) in g.points().iter().enumerate() {
            assert!((b1.monomial_value(2, i) - z.conj()).norm() < 1e-15);
        }

        let b2 = build_basis(&d, 2, &g).unwrap();
        assert_eq!(b2.n_columns(), 6);
        assert!(b2.monomials.contains(&(1, 1)));
        // nesting: degree-1 monomials are a prefix of degree-2
        assert_eq!(&b2.monomials[..3], &b1.monomials[..]);
    }

    #[test]
    fn exact_span_fit() {
        // target z * conj(z) = monomial (1,1) when f = conj(z)
        let (d, g) = disc_fn("conj(z)", "0");
        let basis = build_basis(&d, 2, &g).unwrap();
        let entry = fit(&basis, &parse("z*conj(z)").unwrap(), FitMethod::LeastSquares).unwrap();
        assert!(entry.sup_error <= 1e-12, "{}", entry.sup_error);
        assert!(entry.dependent_columns.is_empty());
    }

    #[test]
    fn undersampled_is_error() {
        let g = DiscGrid::new(2, 8).unwrap(); // 9 points
        let d = build(&parse("conj(z)").unwrap(), &parse("0").unwrap(), 0.5, &g).unwrap();
        let basis = build_basis(&d, 2, &g).unwrap(); // 6 columns
        assert!(matches!(
            fit(&basis, &parse("z").unwrap(), FitMethod::LeastSquares),
            Err(ApproxError::Undersampled { .. })
        ));
    }

    #[test]
    fn holomorphic_generator_collides() {
        // f = z^2 makes z^a f^b = z^(a+2b); collisions start at degree 2
        // and fitting proceeds on the independent subset.
        let (d, g) = disc_fn("z^2", "0");
        let basis = build_basis(&d, 2, &g).unwrap();
        let entry = fit(&basis, &parse("z").unwrap(), FitMethod::LeastSquares).unwrap();
        assert!(!entry.dependent_columns.is_empty());
        assert!(entry.sup_error <= 1e-12); // z itself is in the span
        for &j in &entry.dependent_columns {
            assert_eq!(entry.coefficients[j], c(0.0, 0.0));
        }
    }

    #[test]
    fn density_curve_conjugate_target_is_generator() {
        let (d, g) = disc_fn("conj(z)", "0");
        let res =
            density_curve(&d, &parse("conj(z)").unwrap(), 3, &g, FitMethod::LeastSquares).unwrap();
        assert!(res.entries[0].sup_error > 0.5); // constants stay far away
        assert!(res.entries[1].sup_error <= 1e-12);
        assert!(res.ls_monotone);
    }

    #[test]
    fn pure_harmonic_control_re_squared() {
        // h = conj(z), R = 0: re(z)^2 = (z + conj z)^2 / 4 lies in the
        // degree-2 span; by degree 4 the error is at machine level.
        let (d, g) = disc_fn("conj(z)", "0");
        let res =
            density_curve(&d, &parse("re(z)^2").unwrap(), 4, &g, FitMethod::LeastSquares).unwrap();
        assert!(res.entries[4].sup_error <= 1e-10, "{}", res.entries[4].sup_error);
    }

    #[test]
    fn flat_curve_for_holomorphic_generator() {
        // f = z: fitting conj(z) by holomorphic polynomials cannot beat
        // distance 1. Duality oracle: the discrete circle mean of
        // (conj(z) - p) * z over the boundary ring equals 1 exactly.
        let (d, g) = disc_fn("z", "0");
        let res =
            density_curve(&d, &parse("conj(z)").unwrap(), 10, &g, FitMethod::LeastSquares)
                .unwrap();
        for e in &res.entries {
            assert!(e.sup_error >= 0.9, "degree {}: {}", e.degree, e.sup_error);
        }

        let basis = build_basis(&d, 10, &g).unwrap();
        let entry = &res.entries[10];
        let n_theta = g.n_theta();
        let boundary = &g.points()[g.points().len() - n_theta..];
        let offset = g.points().len() - n_theta;
        let mut mean = c(0.0, 0.0);
        for (bi, &z) in boundary.iter().enumerate() {
            let mut p = c(0.0, 0.0);
            for (j, &coef) in entry.coefficients.iter().enumerate() {
                p += coef * basis.monomial_value(j, offset + bi);
            }
            mean += (z.conj() - p) * z;
        }
        mean /= n_theta as f64;
        assert!((mean - c(1.0, 0.0)).norm() < 1e-10, "{mean}");
    }

    #[test]
    fn lawson_never_loses_to_least_squares() {
        let cases = [
            ("conj(z)", "0", "z*conj(z)", 3),
            ("conj(z)", "0.05*z*conj(z)", "conj(z)", 4),
            ("z", "0", "conj(z)", 4),
            ("z^2", "0", "conj(z)", 4),
        ];
        for (h, r, target, dmax) in cases {
            let (d, g) = disc_fn(h, r);
            let t = parse(target).unwrap();
            let ls = density_curve(&d, &t, dmax, &g, FitMethod::LeastSquares).unwrap();
            let lw = density_curve(&d, &t, dmax, &g, FitMethod::Lawson).unwrap();
            for (a, b) in lw.entries.iter().zip(&ls.entries) {
                assert!(
                    a.sup_error <= b.sup_error + 1e-9,
                    "({h}, {r}, {target}) degree {}: lawson {} vs ls {}",
                    a.degree,
                    a.sup_error,
                    b.sup_error
                );
            }
        }
    }

    #[test]
    fn residual_scales_linearly() {
        let (d, g) = disc_fn("conj(z)", "0.05*z*conj(z)");
        let basis = build_basis(&d, 3, &g).unwrap();
        let plain = fit(&basis, &parse("exp(z)*conj(z)").unwrap(), FitMethod::LeastSquares).unwrap();
        let scaled =
            fit(&basis, &parse("2.5*(exp(z)*conj(z))").unwrap(), FitMethod::LeastSquares).unwrap();
        assert!(
            (scaled.sup_error - 2.5 * plain.sup_error).abs()
                <= 1e-10 * (1.0 + scaled.sup_error)
        );
        assert!(
            (scaled.ls_error - 2.5 * plain.ls_error).abs() <= 1e-10 * (1.0 + scaled.ls_error)
        );
    }

    #[test]
    fn wermer_fractions() {
        let (d, g) = disc_fn("conj(z)", "0");
        assert_eq!(wermer_set(&d, &g, 1e-8).unwrap().fraction, 1.0);

        let (d, g) = disc_fn("z", "0");
        assert_eq!(wermer_set(&d, &g, 1e-8).unwrap().fraction, 0.0);

        let (d, g) = disc_fn("conj(z)", "0.05*z*conj(z)");
        // |1 + 0.05 z| >= 0.95 > tau everywhere; oracle: direct scan
        assert!(g.points().iter().all(|&z| d.dzbar_f.eval(z).unwrap().norm() > 1e-8));
        assert_eq!(wermer_set(&d, &g, 1e-8).unwrap().fraction, 1.0);
    }

    #[test]
    fn decay_for_perturbed_conjugate() {
        // zbar = f / (1 + 0.05 z) expands into a fast geometric series, so
        // the error should fall by far more than half between degrees 2
        // and 8.
        let (d, g) = disc_fn("conj(z)", "0.05*z*conj(z)");
        let res =
            density_curve(&d, &parse("conj(z)").unwrap(), 8, &g, FitMethod::LeastSquares).unwrap();
        let e2 = res.entries[2].sup_error;
        let e8 = res.entries[8].sup_error;
        assert!(e8 < 0.5 * e2, "e2 {e2} e8 {e8}");
        assert!(e2 < 0.05); // sanity: geometric scale
    }
}
