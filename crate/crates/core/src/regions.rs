//! Geometric localization sets for the pencil spectrum: the essential set
//! `O ∪ J`, the enclosures `M` and `R`, the discs `D`, `D′` and the open left
//! half-plane.
//!
//! Closed sets are tested with a relative slack `boundary_tol` on their radius
//! and open sets with the same slack removed, so eigenvalues that sit exactly
//! on a boundary (as for the undamped free beam, where every nonreal
//! eigenvalue lies on the circle `O`) are classified stably.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::OperatorSet;
use crate::pencil::PencilSpectrum;

pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-8;

/// How the ring `R` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RingConvention {
    /// `r₋ ≤ |λ + 1/α| ≤ r₊`.
    #[default]
    CenterMinusInvAlpha,
    /// `r₋ ≤ |λ − 1/α|² ≤ r₊`, the literal printed variant.
    CenterPlusInvAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    M,
    R,
    D,
    DPrime,
    LeftHalfPlane,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionSpec {
    pub alpha: f64,
    pub g0: f64,
    pub g1: f64,
    pub b_plus: f64,
    pub g_plus: f64,
    pub g_minus: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    pub ring_convention: RingConvention,
    pub boundary_tol: f64,
    /// `g₊ ≡ 0`: the "outside `D′`" enclosure applies.
    pub g_plus_vanishes: bool,
    /// `g₋ ≡ 0`: the "inside `D`" enclosure applies.
    pub g_minus_vanishes: bool,
}

/// Ring radii `r₊ = √(1 + α²g₊)/α` and `r₋ = √(1 − αb₊ + α²g₋)/α`, the
/// latter clamped to 0 when the radicand is negative.
pub fn ring_radii(alpha: f64, b_plus: f64, g_plus: f64, g_minus: f64) -> (f64, f64) {
    let r_plus = (1.0 + alpha * alpha * g_plus).max(0.0).sqrt() / alpha;
    let inner = 1.0 - alpha * b_plus + alpha * alpha * g_minus;
    let r_minus = if inner < 0.0 { 0.0 } else { inner.sqrt() / alpha };
    (r_minus, r_plus)
}

impl RegionSpec {
    pub fn from_operators(ops: &OperatorSet, ring_convention: RingConvention) -> Self {
        let c = ops.constants;
        let (r_minus, r_plus) = ring_radii(ops.alpha, c.b_plus, c.g_plus, c.g_minus);
        RegionSpec {
            alpha: ops.alpha,
            g0: c.g0,
            g1: c.g1,
            b_plus: c.b_plus,
            g_plus: c.g_plus,
            g_minus: c.g_minus,
            r_minus,
            r_plus,
            ring_convention,
            boundary_tol: DEFAULT_BOUNDARY_TOL,
            g_plus_vanishes: ops.tension_positive_part_vanishes(),
            g_minus_vanishes: ops.tension_negative_part_vanishes(),
        }
    }

    /// Radius of `D′`, defined only when `αb₊ ≤ 1`.
    pub fn with_boundary_tol(mut self, tol: f64) -> Self {
        self.boundary_tol = tol;
        self
    }

    pub fn d_prime_radius(&self) -> Result<f64> {
        let s = 1.0 - self.alpha * self.b_plus;
        if s < 0.0 {
            return Err(Error::Domain(format!(
                "disc D' needs alpha * b_plus <= 1, got {}",
                self.alpha * self.b_plus
            )));
        }
        Ok(s.sqrt() / self.alpha)
    }
}

/// Distance from `λ` to the circle `|z + 1/α| = 1/α` union the ray `(−∞, −1/α]`.
pub fn essential_set_distance(lambda: Complex64, alpha: f64) -> f64 {
    let c = -1.0 / alpha;
    let r = 1.0 / alpha;
    let to_circle = ((lambda - c).norm() - r).abs();
    let to_ray = if lambda.re <= c {
        lambda.im.abs()
    } else {
        (lambda - c).norm()
    };
    to_circle.min(to_ray)
}

pub fn region_membership(lambda: Complex64, spec: &RegionSpec, region: Region) -> Result<bool> {
    let a = spec.alpha;
    let tol = spec.boundary_tol;
    let from_pole = (lambda + 1.0 / a).norm();
    Ok(match region {
        Region::LeftHalfPlane => lambda.re < 0.0,
        Region::D => from_pole <= (1.0 / a) * (1.0 + tol),
        Region::DPrime => from_pole < spec.d_prime_radius()? * (1.0 - tol),
        Region::M => {
            if lambda.re > 0.0 {
                false
            } else {
                let bound = 1.0 / (a * a) + spec.g1 + (-2.0 * spec.g0 * lambda.re / a).sqrt();
                from_pole * from_pole <= bound * (1.0 + tol)
            }
        }
        Region::R => match spec.ring_convention {
            RingConvention::CenterMinusInvAlpha => {
                from_pole >= spec.r_minus * (1.0 - tol) && from_pole <= spec.r_plus * (1.0 + tol)
            }
            RingConvention::CenterPlusInvAlpha => {
                let d2 = (lambda - 1.0 / a).norm_sqr();
                d2 >= spec.r_minus * (1.0 - tol) && d2 <= spec.r_plus * (1.0 + tol)
            }
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizationRow {
    pub re: f64,
    pub im: f64,
    pub is_real: bool,
    pub in_pi_minus: bool,
    pub in_m: bool,
    pub in_r: bool,
    pub in_d: bool,
    /// `None` when `D′` is undefined (`αb₊ > 1`).
    pub in_d_prime: Option<bool>,
    pub dist_oj: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizationReport {
    pub rows: Vec<LocalizationRow>,
    pub nonreal_count: usize,
    pub all_nonreal_in_pi_minus_m_r: bool,
    /// Set only when `g₋ ≡ 0`.
    pub all_nonreal_in_d: Option<bool>,
    /// Set only when `g₊ ≡ 0` and `D′` is defined.
    pub no_nonreal_in_d_prime: Option<bool>,
    pub max_dist_oj: f64,
    /// Max distance to `O ∪ J` over eigenvalues with `|λ + 1/α| ≤ 3/α`.
    pub max_dist_oj_near_circle: f64,
}

impl LocalizationReport {
    /// One row per eigenvalue; `in_Dprime` is empty when `D′` is undefined.
    pub fn write_csv(&self, out: &mut impl std::io::Write) -> Result<()> {
        writeln!(out, "re,im,is_real,in_PiMinus,in_M,in_R,in_D,in_Dprime,dist_OJ")?;
        for r in &self.rows {
            let dp = r.in_d_prime.map_or(String::new(), |b| b.to_string());
            writeln!(
                out,
                "{:.16e},{:.16e},{},{},{},{},{},{},{:.16e}",
                r.re, r.im, r.is_real, r.in_pi_minus, r.in_m, r.in_r, r.in_d, dp, r.dist_oj
            )?;
        }
        Ok(())
    }

    pub fn violations(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_real && !(r.in_pi_minus && r.in_m && r.in_r))
            .map(|(i, _)| i)
            .collect()
    }
}

pub fn localization_report(spectrum: &PencilSpectrum, spec: &RegionSpec) -> LocalizationReport {
    let d_prime_defined = spec.d_prime_radius().is_ok();
    let a = spec.alpha;
    let rows: Vec<LocalizationRow> = spectrum
        .eigenvalues
        .iter()
        .zip(&spectrum.tags)
        .map(|(&z, tag)| {
            let member = |r| region_membership(z, spec, r).unwrap_or(false);
            LocalizationRow {
                re: z.re,
                im: z.im,
                is_real: tag.is_real,
                in_pi_minus: member(Region::LeftHalfPlane),
                in_m: member(Region::M),
                in_r: member(Region::R),
                in_d: member(Region::D),
                in_d_prime: d_prime_defined.then(|| member(Region::DPrime)),
                dist_oj: essential_set_distance(z, a),
            }
        })
        .collect();

    let nonreal: Vec<&LocalizationRow> = rows.iter().filter(|r| !r.is_real).collect();
    let all_nonreal_in_pi_minus_m_r = nonreal.iter().all(|r| r.in_pi_minus && r.in_m && r.in_r);
    let all_nonreal_in_d = spec.g_minus_vanishes.then(|| nonreal.iter().all(|r| r.in_d));
    let no_nonreal_in_d_prime = (spec.g_plus_vanishes && d_prime_defined)
        .then(|| nonreal.iter().all(|r| r.in_d_prime == Some(false)));
    let max_dist_oj = rows.iter().map(|r| r.dist_oj).fold(0.0, f64::max);
    let max_dist_oj_near_circle = spectrum
        .eigenvalues
        .iter()
        .zip(&rows)
        .filter(|(z, _)| (**z + 1.0 / a).norm() <= 3.0 / a)
        .map(|(_, r)| r.dist_oj)
        .fold(0.0, f64::max);

    LocalizationReport {
        nonreal_count: nonreal.len(),
        rows,
        all_nonreal_in_pi_minus_m_r,
        all_nonreal_in_d,
        no_nonreal_in_d_prime,
        max_dist_oj,
        max_dist_oj_near_circle,
    }
}
