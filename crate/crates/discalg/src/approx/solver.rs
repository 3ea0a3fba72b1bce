//! Complex linear least squares by classical Gram-Schmidt with
//! reorthogonalization (CGS2), with per-column rank detection.
//!
//! Columns whose residual after orthogonalization against the previous ones
//! falls below `rel_tol` times their own norm are flagged dependent and get
//! coefficient zero. Because columns are processed left to right, the
//! factorization of a column prefix is a prefix of the factorization, which
//! lets nested bases share one factorization.

use num_complex::Complex64;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColStatus {
    /// Independent; the payload is its position among the kept columns.
    Kept(usize),
    Dependent,
}

/// QR-like factorization of a column set.
pub struct Cgs2 {
    rows: usize,
    status: Vec<ColStatus>,
    /// Orthonormal basis vectors, one per kept column.
    q: Vec<Vec<Complex64>>,
    /// `r_cols[t][s] = <q_s, a_{kept t}>` for `s <= t`; last entry is the
    /// diagonal.
    r_cols: Vec<Vec<Complex64>>,
}

impl Cgs2 {
    pub fn factorize(columns: &[Vec<Complex64>], rel_tol: f64) -> Cgs2 {
        let rows = columns.first().map_or(0, Vec::len);
        let mut fac = Cgs2 {
            rows,
            status: Vec::with_capacity(columns.len()),
            q: Vec::new(),
            r_cols: Vec::new(),
        };
        for col in columns {
            debug_assert_eq!(col.len(), rows);
            let original_norm = norm(col);
            if original_norm == 0.0 {
                fac.status.push(ColStatus::Dependent);
                continue;
            }
            let mut v = col.clone();
            let mut proj = vec![Complex64::new(0.0, 0.0); fac.q.len()];
            for _pass in 0..2 {
                for (s, q) in fac.q.iter().enumerate() {
                    let rho = dot(q, &v);
                    proj[s] += rho;
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= rho * qi;
                    }
                }
            }
            let nrm = norm(&v);
            if nrm < rel_tol * original_norm {
                fac.status.push(ColStatus::Dependent);
                continue;
            }
            for vi in &mut v {
                *vi /= nrm;
            }
            proj.push(Complex64::new(nrm, 0.0));
            fac.status.push(ColStatus::Kept(fac.q.len()));
            fac.q.push(v);
            fac.r_cols.push(proj);
        }
        fac
    }

    /// Original indices of dependent columns among the first `n_cols`.
    pub fn dependent_in_prefix(&self, n_cols: usize) -> Vec<usize> {
        self.status[..n_cols]
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == ColStatus::Dependent)
            .map(|(j, _)| j)
            .collect()
    }

    /// Least-squares coefficients against the first `n_cols` columns.
    /// Dependent columns receive coefficient zero.
    pub fn solve_prefix(&self, rhs: &[Complex64], n_cols: usize) -> Vec<Complex64> {
        debug_assert_eq!(rhs.len(), self.rows);
        let kept = self.status[..n_cols]
            .iter()
            .filter(|s| matches!(s, ColStatus::Kept(_)))
            .count();
        let mut y: Vec<Complex64> = (0..kept).map(|t| dot(&self.q[t], rhs)).collect();
        // back substitution through the triangular factor
        for t in (0..kept).rev() {
            for s in t + 1..kept {
                let coupling = self.r_cols[s][t];
                let ys = y[s];
                y[t] -= coupling * ys;
            }
            y[t] /= self.r_cols[t][t];
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n_cols];
        for (j, s) in self.status[..n_cols].iter().enumerate() {
            if let ColStatus::Kept(t) = s {
                coeffs[j] = y[*t];
            }
        }
        coeffs
    }
}

/// Predictions `A c` for the coefficient vector over the given columns.
pub fn predictions(columns: &[Vec<Complex64>], coeffs: &[Complex64]) -> Vec<Complex64> {
    let rows = columns.first().map_or(0, Vec::len);
    let mut out = vec![Complex64::new(0.0, 0.0); rows];
    for (col, &c) in columns.iter().zip(coeffs) {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (o, &a) in out.iter_mut().zip(col) {
            *o += c * a;
        }
    }
    out
}
