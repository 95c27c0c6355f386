//! Sampled resolvent bounds for the shifted pencil `L̃(ξ)` and the block
//! generator `T̃`, in the energy-weighted norms.

use std::io::Write;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::pencil::ShiftedSystem;

/// Ray arguments of the default grid.
pub fn default_arguments() -> [f64; 5] {
    use std::f64::consts::FRAC_PI_2 as H;
    use std::f64::consts::FRAC_PI_4 as Q;
    [0.0, Q, -Q, H - 0.01, -(H - 0.01)]
}

/// Log-spaced `|ξ| ∈ [10^lo, 10^hi]` with `per_decade` points per decade,
/// on each ray of [`default_arguments`].
pub fn xi_grid(decades: [f64; 2], per_decade: usize) -> Result<Vec<Complex64>> {
    let [lo, hi] = decades;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || per_decade == 0 {
        return Err(Error::input(format!("bad scan grid: decades [{lo}, {hi}], per_decade {per_decade}")));
    }
    let count = ((hi - lo) * per_decade as f64).round() as usize;
    let mut out = Vec::with_capacity(5 * (count + 1));
    for arg in default_arguments() {
        for i in 0..=count {
            let r = 10f64.powf(lo + (hi - lo) * i as f64 / count as f64);
            out.push(Complex64::from_polar(r, arg));
        }
    }
    Ok(out)
}

pub fn default_xi_grid() -> Vec<Complex64> {
    xi_grid([-2.0, 4.0], 10).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotientSample {
    pub xi: Complex64,
    /// `|ξ|² ‖L̃⁻¹(ξ)‖`.
    pub q_a: f64,
    /// `|ξ| ‖C̃^{½} L̃⁻¹(ξ)‖`.
    pub q_b: f64,
    /// `|ξ| ‖L̃⁻¹(ξ) C̃^{½}‖`.
    pub q_c: f64,
    /// `|ξ| ‖C̃^{½} L̃⁻¹(ξ)(B̃ + ξ) C̃^{−½}‖`.
    pub q_d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolvent12Sample {
    pub xi: Complex64,
    /// `|ξ| ‖(T̃ − ξ)⁻¹‖` in the energy norm.
    pub q_12: f64,
    /// Relative Frobenius deviation of the block formula from a direct solve,
    /// both in energy-orthonormal coordinates `S(T̃ − ξ)⁻¹S⁻¹`, `S = diag(C̃^{½}, I)`.
    pub block_deviation: f64,
    /// The same comparison in the original coordinates, limited by the
    /// conditioning of `T̃ − ξ`.
    pub raw_block_deviation: f64,
}

fn check_xi(xi: Complex64) -> Result<()> {
    if !(xi.re > 0.0 && xi.im.is_finite() && xi.re.is_finite()) {
        return Err(Error::input(format!("resolvent samples need Re xi > 0, got {xi}")));
    }
    Ok(())
}

fn to_c(m: &crate::linalg::RMat) -> CMat {
    linalg::to_complex(m)
}

fn inverse(m: &CMat) -> Result<CMat> {
    let n = m.nrows();
    let inv = linalg::solve_c(m, &Mat::<Complex64>::identity(n, n));
    if inv.col_iter().any(|c| c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
        return Err(Error::numerical("resolvent is numerically singular in Re xi > 0"));
    }
    Ok(inv)
}

fn finite(q: f64, what: &str, xi: Complex64) -> Result<f64> {
    if q.is_finite() {
        Ok(q)
    } else {
        Err(Error::numerical(format!("{what} is not finite at xi = {xi}")))
    }
}

pub fn quotient_scan(shifted: &ShiftedSystem, xis: &[Complex64]) -> Result<Vec<QuotientSample>> {
    let n = shifted.dim();
    let c_half = to_c(&shifted.c_half);
    let c_half_inv = to_c(&shifted.c_half_inv);
    let b_tilde = to_c(&shifted.b_tilde);
    xis.iter()
        .map(|&xi| {
            check_xi(xi)?;
            let r = xi.norm();
            let linv = inverse(&shifted.eval(xi))?;
            let mut b_xi = b_tilde.clone();
            for i in 0..n {
                b_xi[(i, i)] += xi;
            }
            let left = &c_half * &linv;
            let d = &left * &b_xi * &c_half_inv;
            Ok(QuotientSample {
                xi,
                q_a: finite(r * r * linalg::spectral_norm_c(&linv)?, "q_a", xi)?,
                q_b: finite(r * linalg::spectral_norm_c(&left)?, "q_b", xi)?,
                q_c: finite(r * linalg::spectral_norm_c(&(&linv * &c_half))?, "q_c", xi)?,
                q_d: finite(r * linalg::spectral_norm_c(&d)?, "q_d", xi)?,
            })
        })
        .collect()
}

/// `(T̃ − ξ)⁻¹` assembled from `L̃⁻¹(ξ)` blockwise.
pub fn block_resolvent(shifted: &ShiftedSystem, xi: Complex64) -> Result<CMat> {
    let n = shifted.dim();
    let linv = inverse(&shifted.eval(xi))?;
    let mut b_xi = to_c(&shifted.b_tilde);
    for i in 0..n {
        b_xi[(i, i)] += xi;
    }
    let x11 = -(&linv * &b_xi);
    let x21 = &linv * to_c(&shifted.c_tilde);
    Ok(Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => x11[(i, j)],
        (true, false) => -linv[(i, j - n)],
        (false, true) => x21[(i - n, j)],
        (false, false) => -xi * linv[(i - n, j - n)],
    }))
}

/// `(T̃ − ξ)⁻¹` by a direct `2n × 2n` solve.
pub fn direct_resolvent(shifted: &ShiftedSystem, xi: Complex64) -> Result<CMat> {
    let mut m = to_c(&shifted.t_block);
    for i in 0..m.nrows() {
        m[(i, i)] -= xi;
    }
    inverse(&m)
}

/// `S(T̃ − ξ)⁻¹S⁻¹` by a direct solve of `[[−ξ, C̃^{½}], [−C̃^{½}, −B̃ − ξ]]`.
pub fn direct_resolvent_energy(shifted: &ShiftedSystem, xi: Complex64) -> Result<CMat> {
    let n = shifted.dim();
    let m = Mat::from_fn(2 * n, 2 * n, |i, j| {
        let diag = if i == j { xi } else { Complex64::new(0.0, 0.0) };
        let v = match (i < n, j < n) {
            (true, true) => 0.0,
            (true, false) => shifted.c_half[(i, j - n)],
            (false, true) => -shifted.c_half[(i - n, j)],
            (false, false) => -shifted.b_tilde[(i - n, j - n)],
        };
        Complex64::new(v, 0.0) - diag
    });
    inverse(&m)
}

fn frobenius(m: &CMat) -> f64 {
    m.col_iter().flat_map(|c| c.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>()).sum::<f64>().sqrt()
}

pub fn resolvent_12_scan(shifted: &ShiftedSystem, xis: &[Complex64]) -> Result<Vec<Resolvent12Sample>> {
    let n = shifted.dim();
    let s = Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => Complex64::new(shifted.c_half[(i, j)], 0.0),
        (false, false) if i == j => Complex64::new(1.0, 0.0),
        _ => Complex64::new(0.0, 0.0),
    });
    let s_inv = Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => Complex64::new(shifted.c_half_inv[(i, j)], 0.0),
        (false, false) if i == j => Complex64::new(1.0, 0.0),
        _ => Complex64::new(0.0, 0.0),
    });
    xis.iter()
        .map(|&xi| {
            check_xi(xi)?;
            let block = block_resolvent(shifted, xi)?;
            let direct = direct_resolvent(shifted, xi)?;
            let raw = frobenius(&(&block - &direct)) / frobenius(&direct);
            let weighted = &s * &block * &s_inv;
            let direct_weighted = direct_resolvent_energy(shifted, xi)?;
            let deviation = frobenius(&(&weighted - &direct_weighted)) / frobenius(&direct_weighted);
            Ok(Resolvent12Sample {
                xi,
                q_12: finite(xi.norm() * linalg::spectral_norm_c(&weighted)?, "q_12", xi)?,
                block_deviation: finite(deviation, "block deviation", xi)?,
                raw_block_deviation: finite(raw, "block deviation", xi)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub quotients: Vec<QuotientSample>,
    pub resolvent: Vec<Resolvent12Sample>,
}

/// Per-quantity plateau statistics over two adjacent decades of `|ξ|`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Plateau {
    pub name: &'static str,
    pub sup: f64,
    pub lower_decade_max: f64,
    pub upper_decade_max: f64,
    pub passed: bool,
}

pub const PLATEAU_GROWTH: f64 = 1.05;

impl ScanResult {
    pub fn run(shifted: &ShiftedSystem, xis: &[Complex64]) -> Result<Self> {
        Ok(ScanResult {
            quotients: quotient_scan(shifted, xis)?,
            resolvent: resolvent_12_scan(shifted, xis)?,
        })
    }

    pub fn max_block_deviation(&self) -> f64 {
        self.resolvent.iter().map(|s| s.block_deviation).fold(0.0, f64::max)
    }

    pub fn max_raw_block_deviation(&self) -> f64 {
        self.resolvent.iter().map(|s| s.raw_block_deviation).fold(0.0, f64::max)
    }

    fn columns(&self) -> Vec<(&'static str, Vec<(f64, f64)>)> {
        let l = |f: fn(&QuotientSample) -> f64| self.quotients.iter().map(|s| (s.xi.norm(), f(s))).collect();
        vec![
            ("q_a", l(|s| s.q_a)),
            ("q_b", l(|s| s.q_b)),
            ("q_c", l(|s| s.q_c)),
            ("q_d", l(|s| s.q_d)),
            ("q_12", self.resolvent.iter().map(|s| (s.xi.norm(), s.q_12)).collect()),
        ]
    }

    /// Plateau check: max over `|ξ| ∈ [top/10, top]` against max over
    /// `[top/100, top/10]`, where `top` is the largest sampled modulus.
    pub fn plateaus(&self) -> Vec<Plateau> {
        let top = self.quotients.iter().map(|s| s.xi.norm()).fold(0.0, f64::max);
        let eps = 1e-9;
        let mid = top / 10.0;
        let low = top / 100.0;
        self.columns()
            .into_iter()
            .map(|(name, col)| {
                let max_in = |a: f64, b: f64| {
                    col.iter()
                        .filter(|(r, _)| *r >= a * (1.0 - eps) && *r <= b * (1.0 + eps))
                        .map(|(_, q)| *q)
                        .fold(0.0, f64::max)
                };
                let lower = max_in(low, mid);
                let upper = max_in(mid, top);
                Plateau {
                    name,
                    sup: col.iter().map(|(_, q)| *q).fold(0.0, f64::max),
                    lower_decade_max: lower,
                    upper_decade_max: upper,
                    passed: upper <= PLATEAU_GROWTH * lower,
                }
            })
            .collect()
    }

    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "re_xi,im_xi,q_a,q_b,q_c,q_d,q_12")?;
        for (a, b) in self.quotients.iter().zip(&self.resolvent) {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                a.xi.re, a.xi.im, a.q_a, a.q_b, a.q_c, a.q_d, b.q_12
            )?;
        }
        Ok(())
    }
}
