//! Small dense helpers on top of `faer` shared by every module.

use faer::prelude::*;
use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type RMat = Mat<f64>;
pub type CMat = Mat<c64>;

/// Symmetric eigendecomposition, eigenvalues ascending.
pub fn sym_eigen(m: &RMat) -> Result<(Vec<f64>, RMat)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::numerical(format!("symmetric eigensolver: {e:?}")))?;
    let values = evd.S().column_vector().iter().copied().collect();
    Ok((values, evd.U().to_owned()))
}

pub fn sym_eigenvalues(m: &RMat) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::numerical(format!("symmetric eigensolver: {e:?}")))
}

/// `U f(S) Uᵀ` for a symmetric matrix, mirrored so the result is exactly symmetric.
pub fn sym_function(m: &RMat, f: impl Fn(f64) -> f64) -> Result<RMat> {
    let (values, u) = sym_eigen(m)?;
    let n = m.nrows();
    let fv: Vec<f64> = values.iter().map(|&s| f(s)).collect();
    let mut out = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for (k, fk) in fv.iter().enumerate() {
                acc += u[(i, k)] * fk * u[(j, k)];
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc;
        }
    }
    Ok(out)
}

/// `Kᵀ diag(w) K`, computed on the upper triangle and mirrored.
pub fn weighted_gram(k: &RMat, w: &[f64]) -> RMat {
    assert_eq!(k.nrows(), w.len());
    let n = k.ncols();
    let mut out = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for (r, wr) in w.iter().enumerate() {
                let a = k[(r, i)];
                if a != 0.0 {
                    acc += a * wr * k[(r, j)];
                }
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc;
        }
    }
    out
}

pub fn is_exactly_symmetric(m: &RMat) -> bool {
    let n = m.nrows();
    m.ncols() == n && (0..n).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]))
}

/// Max absolute row sum; an upper bound on the spectral norm.
pub fn norm_inf(m: &RMat) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn spectral_norm(m: &RMat) -> Result<f64> {
    let s = m
        .singular_values()
        .map_err(|e| Error::numerical(format!("svd: {e:?}")))?;
    Ok(s.first().copied().unwrap_or(0.0))
}

pub fn spectral_norm_c(m: &CMat) -> Result<f64> {
    let s = m
        .singular_values()
        .map_err(|e| Error::numerical(format!("svd: {e:?}")))?;
    Ok(s.first().copied().unwrap_or(0.0))
}

pub fn to_complex(m: &RMat) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0))
}

/// `a + s·b` for same-shape real matrices.
pub fn axpy(a: &RMat, s: f64, b: &RMat) -> RMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] + s * b[(i, j)])
}

pub fn is_positive_definite(m: &RMat) -> bool {
    m.llt(Side::Lower).is_ok()
}

pub fn matvec(m: &RMat, x: &[f64]) -> Vec<f64> {
    let n = m.nrows();
    let mut y = vec![0.0; n];
    for (i, yi) in y.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, xj) in x.iter().enumerate() {
            acc += m[(i, j)] * xj;
        }
        *yi = acc;
    }
    y
}

pub fn matvec_c(m: &CMat, x: &[Complex64]) -> Vec<Complex64> {
    let n = m.nrows();
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for (i, yi) in y.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, xj) in x.iter().enumerate() {
            acc += m[(i, j)] * xj;
        }
        *yi = acc;
    }
    y
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn norm2_c(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn col_to_vec(c: ColRef<'_, f64>) -> Vec<f64> {
    c.iter().copied().collect()
}

/// Solve a complex square system, panicking on shape mismatch only.
pub fn solve_c(m: &CMat, rhs: &CMat) -> CMat {
    m.partial_piv_lu().solve(rhs)
}
