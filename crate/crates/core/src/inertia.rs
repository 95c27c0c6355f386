//! Sylvester inertia of symmetric matrices.
//!
//! The primary route is a Bunch-Kaufman `L D Lᵀ` factorization with symmetric
//! pivoting: by Sylvester's law of inertia the signs of the (1×1 and 2×2)
//! diagonal blocks of `D` give the eigenvalue signs of the input. The
//! near-zero band `[-ε, ε]` is resolved by factoring `M + εI` and `M - εI`,
//! which counts eigenvalues below `-ε` and above `ε` exactly. If a
//! factorization produces non-finite pivots the count comes from a full symmetric
//! eigendecomposition.

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{self, RMat};

/// Relative width of the zero band: `ε = ZERO_BAND · ‖M‖∞`.
pub const ZERO_BAND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InertiaMethod {
    Ldlt,
    Eigen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Inertia {
    /// Eigenvalues below `-ε`.
    pub negative: usize,
    /// Eigenvalues in `[-ε, ε]`.
    pub near_zero: usize,
    /// Eigenvalues above `ε`.
    pub positive: usize,
    pub method: InertiaMethod,
}

#[derive(Debug, Clone, Copy, Default)]
struct RawInertia {
    negative: usize,
    zero: usize,
    positive: usize,
}

const BK_ALPHA: f64 = 0.640_388_203_202_208_4; // (1 + sqrt(17)) / 8

/// Bunch-Kaufman factorization of a dense symmetric matrix, returning only the
/// inertia of the block-diagonal factor. `None` if a pivot is non-finite.
fn bunch_kaufman_inertia(m: &RMat) -> Option<RawInertia> {
    let n = m.nrows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    let mut out = RawInertia::default();

    let swap = |a: &mut Vec<Vec<f64>>, p: usize, q: usize| {
        if p == q {
            return;
        }
        a.swap(p, q);
        for row in a.iter_mut() {
            row.swap(p, q);
        }
    };

    let mut k = 0;
    while k < n {
        let akk = a[k][k].abs();
        let (r, colmax) = ((k + 1)..n)
            .map(|i| (i, a[i][k].abs()))
            .fold((k, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });

        if !akk.is_finite() || !colmax.is_finite() {
            return None;
        }

        if akk.max(colmax) == 0.0 {
            out.zero += 1;
            k += 1;
            continue;
        }

        let two_by_two = if akk >= BK_ALPHA * colmax {
            false
        } else {
            let rowmax = (k..n)
                .filter(|&j| j != r)
                .map(|j| a[r][j].abs())
                .fold(0.0, f64::max);
            if akk * rowmax >= BK_ALPHA * colmax * colmax {
                false
            } else if a[r][r].abs() >= BK_ALPHA * rowmax {
                swap(&mut a, k, r);
                false
            } else {
                swap(&mut a, k + 1, r);
                true
            }
        };

        if !two_by_two {
            let d = a[k][k];
            if !d.is_finite() {
                return None;
            }
            if d > 0.0 {
                out.positive += 1;
            } else if d < 0.0 {
                out.negative += 1;
            } else {
                out.zero += 1;
            }
            if d != 0.0 {
                let col: Vec<f64> = ((k + 1)..n).map(|i| a[i][k]).collect();
                for (ii, i) in ((k + 1)..n).enumerate() {
                    let li = col[ii] / d;
                    if li == 0.0 {
                        continue;
                    }
                    for (jj, j) in ((k + 1)..n).enumerate() {
                        a[i][j] -= li * col[jj];
                    }
                }
            }
            k += 1;
        } else {
            let (e11, e21, e22) = (a[k][k], a[k + 1][k], a[k + 1][k + 1]);
            let det = e11 * e22 - e21 * e21;
            if !det.is_finite() || det == 0.0 {
                return None;
            }
            // Eigenvalue signs of the 2×2 block.
            if det < 0.0 {
                out.negative += 1;
                out.positive += 1;
            } else if e11 + e22 > 0.0 {
                out.positive += 2;
            } else {
                out.negative += 2;
            }
            let c1: Vec<f64> = ((k + 2)..n).map(|i| a[i][k]).collect();
            let c2: Vec<f64> = ((k + 2)..n).map(|i| a[i][k + 1]).collect();
            // Rows of [c1 c2] E⁻¹.
            let w1: Vec<f64> = c1.iter().zip(&c2).map(|(x, y)| (e22 * x - e21 * y) / det).collect();
            let w2: Vec<f64> = c1.iter().zip(&c2).map(|(x, y)| (-e21 * x + e11 * y) / det).collect();
            for (ii, i) in ((k + 2)..n).enumerate() {
                for (jj, j) in ((k + 2)..n).enumerate() {
                    a[i][j] -= w1[ii] * c1[jj] + w2[ii] * c2[jj];
                }
            }
            k += 2;
        }
    }
    Some(out)
}

fn shifted(m: &RMat, s: f64) -> RMat {
    let mut out = m.clone();
    for i in 0..m.nrows() {
        out[(i, i)] += s;
    }
    out
}

/// Inertia of a symmetric matrix with the `[-ε, ε]` band reported separately.
pub fn inertia(m: &RMat) -> Result<Inertia> {
    let n = m.nrows();
    let eps = ZERO_BAND * linalg::norm_inf(m);
    let below = bunch_kaufman_inertia(&shifted(m, eps));
    let above = bunch_kaufman_inertia(&shifted(m, -eps));
    if let (Some(below), Some(above)) = (below, above) {
        let negative = below.negative;
        let positive = above.positive;
        if negative + positive <= n {
            return Ok(Inertia {
                negative,
                near_zero: n - negative - positive,
                positive,
                method: InertiaMethod::Ldlt,
            });
        }
    }
    inertia_by_eigenvalues(m)
}

/// Eigenvalue-count route; also serves as the oracle in tests.
pub fn inertia_by_eigenvalues(m: &RMat) -> Result<Inertia> {
    let eps = ZERO_BAND * linalg::norm_inf(m);
    let values = linalg::sym_eigenvalues(m)?;
    let negative = values.iter().filter(|&&v| v < -eps).count();
    let positive = values.iter().filter(|&&v| v > eps).count();
    Ok(Inertia {
        negative,
        near_zero: values.len() - negative - positive,
        positive,
        method: InertiaMethod::Eigen,
    })
}

/// Number of negative eigenvalues (below the zero band), with multiplicity.
pub fn inertia_negative(m: &RMat) -> Result<usize> {
    Ok(inertia(m)?.negative)
}
