//! The quadratic pencil `L(λ) = λ²I + λ(αA + B) + (A + G)`, its spectrum via
//! the companion linearization, and the shifted first-order system.

use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, RMat};
use crate::operators::OperatorSet;

pub const DEFAULT_REAL_TOLERANCE: f64 = 1e-8;

/// Number of eigenpairs whose residual is recorded.
const RESIDUAL_SAMPLES: usize = 16;

/// `λ²I + λ(αA + B) + (A + G)` as a complex matrix.
pub fn eval_pencil(ops: &OperatorSet, lambda: Complex64) -> CMat {
    let n = ops.dim();
    let quad = lambda * lambda;
    Mat::from_fn(n, n, |i, j| {
        let damping = ops.alpha * ops.a[(i, j)] + ops.b[(i, j)];
        let stiffness = ops.a[(i, j)] + ops.g[(i, j)];
        let id = if i == j { quad } else { Complex64::new(0.0, 0.0) };
        id + lambda * damping + stiffness
    })
}

/// `L(k)` for real `k`.
pub fn eval_pencil_real(ops: &OperatorSet, k: f64) -> RMat {
    let n = ops.dim();
    Mat::from_fn(n, n, |i, j| {
        let damping = ops.alpha * ops.a[(i, j)] + ops.b[(i, j)];
        let stiffness = ops.a[(i, j)] + ops.g[(i, j)];
        let id = if i == j { k * k } else { 0.0 };
        id + k * damping + stiffness
    })
}

/// `[[0, I], [−(A+G), −(αA+B)]]`.
pub fn companion_matrix(ops: &OperatorSet) -> RMat {
    let n = ops.dim();
    Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => 0.0,
        (true, false) => {
            if j - n == i {
                1.0
            } else {
                0.0
            }
        }
        (false, true) => -(ops.a[(i - n, j)] + ops.g[(i - n, j)]),
        (false, false) => -(ops.alpha * ops.a[(i - n, j - n)] + ops.b[(i - n, j - n)]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EigenTag {
    pub is_real: bool,
    pub is_nonzero: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenResidual {
    pub index: usize,
    /// `‖L(λ)v‖ / ‖v‖`.
    pub residual: f64,
    /// `|λ|² + |λ|·‖αA+B‖ + ‖A+G‖`.
    pub scale: f64,
}

/// Eigenvalues of the pencil, sorted by real then imaginary part.
#[derive(Debug, Clone)]
pub struct PencilSpectrum {
    pub eigenvalues: Vec<Complex64>,
    pub tags: Vec<EigenTag>,
    pub real_tolerance: f64,
    pub residuals: Vec<EigenResidual>,
}

pub fn is_real_within(lambda: Complex64, tol: f64) -> bool {
    lambda.im.abs() <= tol * (1.0 + lambda.norm())
}

impl PencilSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn nonreal(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.eigenvalues
            .iter()
            .zip(&self.tags)
            .filter(|(_, t)| !t.is_real)
            .map(|(z, _)| *z)
    }

    pub fn real(&self) -> impl Iterator<Item = f64> + '_ {
        self.eigenvalues
            .iter()
            .zip(&self.tags)
            .filter(|(_, t)| t.is_real)
            .map(|(z, _)| z.re)
    }

    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `residual / scale` over the sampled eigenpairs.
    pub fn max_relative_residual(&self) -> f64 {
        self.residuals
            .iter()
            .map(|r| r.residual / r.scale)
            .fold(0.0, f64::max)
    }
}

/// Approximate eigenvector of `L(λ)` by two steps of inverse iteration.
pub fn pencil_eigenvector(ops: &OperatorSet, lambda: Complex64) -> Vec<Complex64> {
    let n = ops.dim();
    let mut lambda_eff = lambda;
    let mut l = eval_pencil(ops, lambda_eff);
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.1 * (i as f64 * 0.7).sin(), 0.05 * (i as f64 * 1.3).cos()))
        .collect();
    for attempt in 0..3 {
        let lu = l.partial_piv_lu();
        let mut ok = true;
        for _ in 0..2 {
            let rhs = Mat::from_fn(n, 1, |i, _| v[i]);
            let x = lu.solve(&rhs);
            let norm = (0..n).map(|i| x[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                ok = false;
                break;
            }
            v = (0..n).map(|i| x[(i, 0)] / norm).collect();
        }
        if ok {
            return v;
        }
        // exactly singular factorization: nudge the shift
        let nudge = 1e-14 * (1.0 + lambda.norm()) * (attempt as f64 + 1.0);
        lambda_eff = lambda + Complex64::new(nudge, nudge);
        l = eval_pencil(ops, lambda_eff);
    }
    v
}

fn residual_sample_indices(eigs: &[Complex64], tags: &[EigenTag]) -> Vec<usize> {
    let mut by_modulus: Vec<usize> = (0..eigs.len()).collect();
    by_modulus.sort_by(|&i, &j| eigs[i].norm().total_cmp(&eigs[j].norm()));
    let mut picked: Vec<usize> = Vec::new();
    let half = RESIDUAL_SAMPLES / 2;
    let count = by_modulus.len();
    for s in 0..half.min(count) {
        let pos = if half > 1 { s * (count - 1) / (half - 1) } else { 0 };
        picked.push(by_modulus[pos]);
    }
    for (i, t) in tags.iter().enumerate() {
        if picked.len() >= RESIDUAL_SAMPLES {
            break;
        }
        if !t.is_real && !picked.contains(&i) {
            picked.push(i);
        }
    }
    picked.sort_unstable();
    picked.dedup();
    picked
}

/// Eigenvalues of the companion matrix, tagged real/nonreal.
pub fn compute_spectrum(ops: &OperatorSet, real_tolerance: f64) -> Result<PencilSpectrum> {
    if !(real_tolerance > 0.0 && real_tolerance.is_finite()) {
        return Err(Error::input(format!("real_tolerance must be positive, got {real_tolerance}")));
    }
    let companion = companion_matrix(ops);
    let mut eigenvalues: Vec<Complex64> = companion.eigenvalues().map_err(|e| {
        Error::numerical(format!(
            "companion eigensolver did not converge ({e:?}); ‖C‖∞ = {:e}, dimension {}",
            linalg::norm_inf(&companion),
            companion.nrows()
        ))
    })?;
    if eigenvalues.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::numerical(format!(
            "companion eigensolver returned non-finite values; ‖C‖∞ = {:e}",
            linalg::norm_inf(&companion)
        )));
    }
    eigenvalues.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));

    let tags: Vec<EigenTag> = eigenvalues
        .iter()
        .map(|&z| EigenTag {
            is_real: is_real_within(z, real_tolerance),
            is_nonzero: z.norm() > real_tolerance,
        })
        .collect();

    let damping_norm = linalg::spectral_norm(&ops.damping_operator())?;
    let stiffness_norm = linalg::spectral_norm(&ops.stiffness_operator())?;
    let residuals = residual_sample_indices(&eigenvalues, &tags)
        .into_iter()
        .map(|index| {
            let lambda = eigenvalues[index];
            let v = pencil_eigenvector(ops, lambda);
            let lv = linalg::matvec_c(&eval_pencil(ops, lambda), &v);
            let m = lambda.norm();
            EigenResidual {
                index,
                residual: linalg::norm2_c(&lv) / linalg::norm2_c(&v),
                scale: m * m + m * damping_norm + stiffness_norm,
            }
        })
        .collect();

    Ok(PencilSpectrum {
        eigenvalues,
        tags,
        real_tolerance,
        residuals,
    })
}

/// The pencil shifted by `k₀` and its first-order block form on the energy
/// space `H_{1/2} × H`.
#[derive(Debug, Clone)]
pub struct ShiftedSystem {
    pub k0: f64,
    /// `2k₀I + αA + B`.
    pub b_tilde: RMat,
    /// `L(k₀)`.
    pub c_tilde: RMat,
    pub c_half: RMat,
    pub c_half_inv: RMat,
    /// `[[0, I], [−C̃, −B̃]]`.
    pub t_block: RMat,
}

/// Shift `k₀ = max(0, max Re λ) + 1` and the shifted coefficients.
pub fn build_shifted(ops: &OperatorSet, spectrum: &PencilSpectrum) -> Result<ShiftedSystem> {
    let k0 = spectrum.max_real_part().max(0.0) + 1.0;
    shifted_at(ops, k0)
}

/// Shifted system for an explicit `k₀`.
pub fn shifted_at(ops: &OperatorSet, k0: f64) -> Result<ShiftedSystem> {
    let n = ops.dim();
    let mut b_tilde = ops.damping_operator();
    for i in 0..n {
        b_tilde[(i, i)] += 2.0 * k0;
    }
    let c_tilde = eval_pencil_real(ops, k0);
    let (values, u) = linalg::sym_eigen(&c_tilde)?;
    let min_eig = values.first().copied().unwrap_or(f64::NAN);
    if !(min_eig > 0.0) {
        return Err(Error::numerical(format!(
            "L(k0) is not positive definite at k0 = {k0} (min eigenvalue {min_eig:e}); the spectrum upstream is unreliable"
        )));
    }
    let conjugate_by = |f: &dyn Fn(f64) -> f64| {
        let mut m = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let acc: f64 = (0..n).map(|k| u[(i, k)] * f(values[k]) * u[(j, k)]).sum();
                m[(i, j)] = acc;
                m[(j, i)] = acc;
            }
        }
        m
    };
    let c_half = conjugate_by(&|s: f64| s.sqrt());
    let c_half_inv = conjugate_by(&|s: f64| 1.0 / s.sqrt());

    let t_block = Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => 0.0,
        (true, false) => {
            if j - n == i {
                1.0
            } else {
                0.0
            }
        }
        (false, true) => -c_tilde[(i - n, j)],
        (false, false) => -b_tilde[(i - n, j - n)],
    });

    Ok(ShiftedSystem {
        k0,
        b_tilde,
        c_tilde,
        c_half,
        c_half_inv,
        t_block,
    })
}

impl ShiftedSystem {
    pub fn dim(&self) -> usize {
        self.c_tilde.nrows()
    }

    /// `L̃(ξ) = ξ²I + ξB̃ + C̃`.
    pub fn eval(&self, xi: Complex64) -> CMat {
        let n = self.dim();
        Mat::from_fn(n, n, |i, j| {
            let id = if i == j { xi * xi } else { Complex64::new(0.0, 0.0) };
            id + xi * self.b_tilde[(i, j)] + self.c_tilde[(i, j)]
        })
    }

    /// `⟨x, y⟩_H = (C̃x₁, y₁) + (x₂, y₂)` on stacked vectors of length `2n`.
    pub fn energy_inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim();
        let cx = linalg::matvec(&self.c_tilde, &x[..n]);
        linalg::dot(&cx, &y[..n]) + linalg::dot(&x[n..], &y[n..])
    }

    pub fn energy_norm(&self, x: &[f64]) -> f64 {
        self.energy_inner(x, x).max(0.0).sqrt()
    }

    /// `T̃V = (v₂, −C̃v₁ − B̃v₂)`.
    pub fn apply_generator(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let cv = linalg::matvec(&self.c_tilde, &v[..n]);
        let bv = linalg::matvec(&self.b_tilde, &v[n..]);
        let mut out = v[n..].to_vec();
        out.extend(cv.iter().zip(&bv).map(|(c, b)| -c - b));
        out
    }

    /// `Re⟨T̃V, V⟩_H` and the identity's right side `−(B̃v₂, v₂)`.
    pub fn dissipation(&self, v: &[f64]) -> (f64, f64) {
        let n = self.dim();
        let tv = self.apply_generator(v);
        let lhs = self.energy_inner(&tv, v);
        let bv = linalg::matvec(&self.b_tilde, &v[n..]);
        (lhs, -linalg::dot(&bv, &v[n..]))
    }
}
