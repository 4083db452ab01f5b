//! Dense complex least squares via column-pivoted Householder QR.
//!
//! Solves min_x ||A x - b||_2 for overdetermined A and reports the numerical
//! rank along the way.  Columns are balanced to unit norm first (a bijective
//! reparameterization that leaves the minimizer unchanged but makes the pivot
//! ordering and the rank threshold meaningful when columns carry wildly
//! different physical scales).

// Index loops mirror the textbook QR formulation; iterator forms would
// obscure how the row and column ranges couple.
#![allow(clippy::needless_range_loop)]

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dense::CMat;
use crate::error::Error;
use crate::fp;

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: Vec<Complex64>,
    pub rank: usize,
    /// ||A x - b||_2, evaluated against the original system.
    pub residual_norm: f64,
}

/// Column-pivoted QR least squares.  Errors if the numerical rank falls short
/// of the column count.
pub fn solve_least_squares(a: &CMat, b: &[Complex64]) -> Result<LeastSquares, Error> {
    solve_with_threshold(a, b, f64::EPSILON * (a.rows().max(a.cols()) as f64), true)
}

/// As `solve_least_squares`, but with an explicit relative pivot threshold and
/// a rank-truncated fallback: columns whose pivoted diagonal falls below
/// `rel_threshold * |R_00|` are frozen at zero instead of erroring.
pub fn solve_least_squares_truncated(
    a: &CMat,
    b: &[Complex64],
    rel_threshold: f64,
) -> Result<LeastSquares, Error> {
    solve_with_threshold(a, b, rel_threshold, false)
}

fn solve_with_threshold(
    a: &CMat,
    b: &[Complex64],
    rel_threshold: f64,
    strict: bool,
) -> Result<LeastSquares, Error> {
    let m = a.rows();
    let n = a.cols();
    assert_eq!(b.len(), m, "rhs length must match row count");
    assert!(
        m >= n,
        "least-squares expects at least as many rows as columns"
    );

    // Balance columns to unit 2-norm (zero columns are left alone and will
    // surface as rank deficiency).
    let mut r = a.clone();
    let mut col_norm = alloc::vec![1.0_f64; n];
    for j in 0..n {
        let norm = vec_norm(r.col(j));
        if norm > 0.0 {
            col_norm[j] = norm;
            for v in r.col_mut(j) {
                *v /= norm;
            }
        }
    }

    let mut rhs: Vec<Complex64> = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();

    // Householder vectors are stored below the diagonal; v[k] is implicitly
    // normalized so that applying the reflector needs only the stored tail
    // and the scalar inv_d = 1 / (sigma^2 + sigma |alpha|).
    let mut inv_d = alloc::vec![0.0_f64; n];

    for k in 0..n {
        // Pivot: bring the remaining column with the largest tail norm in.
        let mut best = k;
        let mut best_norm = tail_norm(&r, k, k);
        for j in k + 1..n {
            let norm = tail_norm(&r, j, k);
            if norm > best_norm {
                best = j;
                best_norm = norm;
            }
        }
        r.swap_cols(k, best);
        perm.swap(k, best);
        col_norm.swap(k, best);

        let sigma = best_norm;
        if sigma == 0.0 {
            inv_d[k] = 0.0;
            continue;
        }
        let alpha = r.get(k, k);
        let abs_alpha = fp::cabs(alpha);
        let phase = if abs_alpha == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            alpha / abs_alpha
        };
        // u = x + phase * sigma * e_k zeroes the tail of column k and puts
        // -phase * sigma on the diagonal.
        let u0 = alpha + phase * sigma;
        r.set(k, k, u0);
        inv_d[k] = 1.0 / (sigma * sigma + sigma * abs_alpha);

        for j in k + 1..n {
            apply_reflector(&mut r, k, j, inv_d[k]);
        }
        apply_reflector_vec(&r, k, &mut rhs, inv_d[k]);

        // Everything this reflector will ever touch has been updated, so the
        // diagonal slot can take its R value; the tail below it keeps u and
        // is never read again.
        r.set(k, k, -phase * sigma);
    }

    // Numerical rank: the leading run of acceptable pivoted diagonals.
    let r00 = fp::cabs(diag(&r, 0));
    let mut rank = 0;
    while rank < n && fp::cabs(diag(&r, rank)) > rel_threshold * r00 {
        rank += 1;
    }
    if rank < n && strict {
        return Err(Error::SingularSystem { rank, expected: n });
    }

    // Back substitution on the leading rank x rank triangle; pivots beyond
    // the numerical rank keep zero coefficients (basic truncated solution).
    let mut y = alloc::vec![Complex64::new(0.0, 0.0); n];
    for k in (0..rank).rev() {
        let mut acc = rhs[k];
        for j in k + 1..rank {
            acc -= upper(&r, k, j) * y[j];
        }
        y[k] = acc / diag(&r, k);
    }

    // Undo pivoting and column balancing.
    let mut x = alloc::vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        x[perm[k]] = y[k] / col_norm[k];
    }

    // Honest residual against the original data.
    let ax = a.mul_vec(&x);
    let mut res = 0.0;
    for (av, bv) in ax.iter().zip(b) {
        res += (av - bv).norm_sqr();
    }
    Ok(LeastSquares {
        solution: x,
        rank,
        residual_norm: fp::sqrt(res),
    })
}

// After step k, column k holds R entries on and above the diagonal and the
// Householder tail below it.

fn diag(r: &CMat, k: usize) -> Complex64 {
    r.get(k, k)
}

fn upper(r: &CMat, i: usize, j: usize) -> Complex64 {
    r.get(i, j)
}

fn vec_norm(v: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    for z in v {
        acc += z.norm_sqr();
    }
    fp::sqrt(acc)
}

fn tail_norm(r: &CMat, j: usize, from_row: usize) -> f64 {
    vec_norm(&r.col(j)[from_row..])
}

/// Applies the reflector stored in column k (u on rows k..m, with u0 at the
/// diagonal) to column j: col -= u * (u^H col) * inv_d.
fn apply_reflector(r: &mut CMat, k: usize, j: usize, inv_d: f64) {
    let m = r.rows();
    let mut dot = Complex64::new(0.0, 0.0);
    for i in k..m {
        dot += r.get(i, k).conj() * r.get(i, j);
    }
    let f = dot * inv_d;
    for i in k..m {
        let u = r.get(i, k);
        let v = r.get(i, j) - u * f;
        r.set(i, j, v);
    }
}

fn apply_reflector_vec(r: &CMat, k: usize, rhs: &mut [Complex64], inv_d: f64) {
    let m = r.rows();
    let mut dot = Complex64::new(0.0, 0.0);
    for i in k..m {
        dot += r.get(i, k).conj() * rhs[i];
    }
    let f = dot * inv_d;
    for (i, slot) in rhs.iter_mut().enumerate().take(m).skip(k) {
        *slot -= r.get(i, k) * f;
    }
}
