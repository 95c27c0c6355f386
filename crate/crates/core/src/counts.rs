//! Eigenvalue counting: the instability index κ₁, negative-spectrum counts
//! ν(·), the Schrödinger comparison operator and accumulation diagnostics.

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::inertia::inertia_negative;
use crate::linalg::RMat;
use crate::operators::{dirichlet_laplacian, OperatorSet};
use crate::pencil::{eval_pencil_real, PencilSpectrum};
use crate::profile::Profile;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Kappa1 {
    /// Eigenvalues with `Re λ > real_tolerance`.
    pub count: usize,
    /// Indices of eigenvalues in the right half-plane that are not tagged real.
    pub nonreal_violations: Vec<usize>,
}

pub fn kappa1(spectrum: &PencilSpectrum) -> Kappa1 {
    let tol = spectrum.real_tolerance;
    let mut count = 0;
    let mut nonreal_violations = Vec::new();
    for (i, (z, tag)) in spectrum.eigenvalues.iter().zip(&spectrum.tags).enumerate() {
        if z.re > tol {
            count += 1;
            if !tag.is_real {
                nonreal_violations.push(i);
            }
        }
    }
    Kappa1 {
        count,
        nonreal_violations,
    }
}

/// `ν(A + G)`.
pub fn nu_t(ops: &OperatorSet) -> Result<usize> {
    inertia_negative(&ops.stiffness_operator())
}

/// Dirichlet discretization of `S = −d²/dx² − g(x)` on the beam nodes.
pub fn schrodinger_matrix(g: &Profile, grid: &Grid) -> RMat {
    let mut s = dirichlet_laplacian(grid);
    for (i, v) in g.sample(&grid.nodes()).iter().enumerate() {
        s[(i, i)] -= v;
    }
    s
}

pub fn schrodinger_nu(g: &Profile, grid: &Grid) -> Result<usize> {
    inertia_negative(&schrodinger_matrix(g, grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BargmannCheck {
    /// `∫₀^∞ x g₊(x) dx`.
    pub bound: f64,
    /// `sup_{x ≥ 0} x ∫_x^∞ g₊`.
    pub premise_max: f64,
    /// `premise_max ≤ 1/4`.
    pub premise_holds: bool,
    /// The same supremum restricted to the support of the profile, for the
    /// divergence criterion.
    pub tail_sup: f64,
}

pub fn bargmann_check(g: &Profile) -> BargmannCheck {
    let gp = g.positive_part();
    let premise_max = gp.tail_moment_sup(0.0);
    BargmannCheck {
        bound: gp.first_moment(),
        premise_max,
        premise_holds: premise_max <= 0.25,
        tail_sup: premise_max.max(gp.tail_moment_sup(gp.support_end())),
    }
}

/// `ν(L(k))` for real `k > −1/α`.
pub fn nu_at_k(ops: &OperatorSet, k: f64) -> Result<usize> {
    if !k.is_finite() || k <= -1.0 / ops.alpha {
        return Err(Error::Domain(format!(
            "nu(k) is only defined for k > -1/alpha = {}, got {k}",
            -1.0 / ops.alpha
        )));
    }
    inertia_negative(&eval_pencil_real(ops, k))
}

pub fn nu_scan(ops: &OperatorSet, ks: &[f64]) -> Result<Vec<(f64, usize)>> {
    ks.iter().map(|&k| Ok((k, nu_at_k(ops, k)?))).collect()
}

/// Bracket half-widths, in units of `1/α`.
pub const ACCUMULATION_DELTAS: [f64; 3] = [0.1, 0.05, 0.025];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccumulationReport {
    pub deltas: Vec<f64>,
    /// Real eigenvalues in `(−1/α, −1/α + δ)`.
    pub right_of_pole: Vec<usize>,
    /// Real eigenvalues in `(−1/α − δ, −1/α)`.
    pub left_of_pole: Vec<usize>,
    /// Real eigenvalues in `(−δ, 0)`.
    pub left_of_zero: Vec<usize>,
    /// Real eigenvalues in `(0, δ)`.
    pub right_of_zero: Vec<usize>,
    pub g_plus_nonzero: bool,
    pub b_plus_below_inv_alpha: bool,
    /// Accumulation at `−1/α` from the right is predicted when `g₊ ≢ 0`.
    pub accumulation_expected: bool,
}

pub fn accumulation_report(ops: &OperatorSet, spectrum: &PencilSpectrum) -> AccumulationReport {
    let pole = -1.0 / ops.alpha;
    let reals: Vec<f64> = spectrum.real().collect();
    let count_in = |lo: f64, hi: f64| reals.iter().filter(|&&x| x > lo && x < hi).count();
    let deltas: Vec<f64> = ACCUMULATION_DELTAS.iter().map(|d| d / ops.alpha).collect();
    let g_plus_nonzero = !ops.tension_positive_part_vanishes();
    AccumulationReport {
        right_of_pole: deltas.iter().map(|&d| count_in(pole, pole + d)).collect(),
        left_of_pole: deltas.iter().map(|&d| count_in(pole - d, pole)).collect(),
        left_of_zero: deltas.iter().map(|&d| count_in(-d, 0.0)).collect(),
        right_of_zero: deltas.iter().map(|&d| count_in(0.0, d)).collect(),
        deltas,
        g_plus_nonzero,
        b_plus_below_inv_alpha: ops.constants.b_plus < 1.0 / ops.alpha,
        accumulation_expected: g_plus_nonzero,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub kappa1: usize,
    pub nu_t: usize,
    /// Only available for beam operators (needs the tension profile and grid).
    pub nu_s: Option<usize>,
    pub bargmann: Option<f64>,
    pub bargmann_premise_holds: Option<bool>,
    pub tail_criterion_sup: Option<f64>,
    pub nu_at_samples: Vec<(f64, usize)>,
    pub kappa1_nonreal_violations: Vec<usize>,
}

impl CountReport {
    pub fn index_equality_holds(&self) -> bool {
        self.kappa1 == self.nu_t && self.kappa1_nonreal_violations.is_empty()
    }

    pub fn bracketing_holds(&self) -> Option<bool> {
        self.nu_s.map(|s| self.nu_t <= s && s <= self.nu_t + 1)
    }

    pub fn bargmann_bound_holds(&self) -> Option<bool> {
        match (self.bargmann_premise_holds, self.bargmann) {
            (Some(true), Some(bound)) => Some(self.nu_t as f64 <= bound),
            _ => None,
        }
    }

    /// `ν(k)` non-increasing over the sampled `k ≥ 0`.
    pub fn nu_monotone_on_nonnegative_k(&self) -> bool {
        let tail: Vec<usize> = self
            .nu_at_samples
            .iter()
            .filter(|(k, _)| *k >= 0.0)
            .map(|(_, v)| *v)
            .collect();
        tail.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Default `k` samples: a grid over `(−1/α, 0)` followed by `[0, 4]`.
pub fn default_k_samples(alpha: f64) -> Vec<f64> {
    let pole = -1.0 / alpha;
    let mut ks: Vec<f64> = (1..10).map(|i| pole + (-pole) * i as f64 / 10.0).collect();
    ks.extend((0..=16).map(|i| 0.25 * i as f64));
    ks
}

pub fn count_report(ops: &OperatorSet, spectrum: &PencilSpectrum) -> Result<CountReport> {
    let k1 = kappa1(spectrum);
    let nu_t = nu_t(ops)?;
    let (nu_s, bargmann) = match (&ops.tension, &ops.grid) {
        (Some(g), Some(grid)) => (Some(schrodinger_nu(g, grid)?), Some(bargmann_check(g))),
        _ => (None, None),
    };
    Ok(CountReport {
        kappa1: k1.count,
        nu_t,
        nu_s,
        bargmann: bargmann.map(|b| b.bound),
        bargmann_premise_holds: bargmann.map(|b| b.premise_holds),
        tail_criterion_sup: bargmann.map(|b| b.tail_sup),
        nu_at_samples: nu_scan(ops, &default_k_samples(ops.alpha))?,
        kappa1_nonreal_violations: k1.nonreal_violations,
    })
}

/// Diagonal matrix helper used by small hand-built surrogates.
pub fn diag(values: &[f64]) -> RMat {
    Mat::from_fn(values.len(), values.len(), |i, j| if i == j { values[i] } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inertia::inertia_by_eigenvalues;
    use crate::operators::assemble_operators;
    use crate::pencil::{compute_spectrum, DEFAULT_REAL_TOLERANCE};

    fn surrogate(a: &[f64], b: &[f64], g: &[f64]) -> OperatorSet {
        OperatorSet::from_matrices(1.0, diag(a), diag(b), diag(g)).unwrap()
    }

    #[test]
    fn kappa1_of_free_beam_is_zero() {
        let grid = Grid::new(4.0, 30).unwrap();
        let ops = assemble_operators(1.0, grid, &Profile::Zero, &Profile::Zero).unwrap();
        let s = compute_spectrum(&ops, DEFAULT_REAL_TOLERANCE).unwrap();
        assert_eq!(kappa1(&s).count, 0);
        assert_eq!(nu_t(&ops).unwrap(), 0);
    }

    #[test]
    fn kappa1_scalar_surrogate() {
        let ops = surrogate(&[1.0], &[0.0], &[-2.0]);
        let s = compute_spectrum(&ops, DEFAULT_REAL_TOLERANCE).unwrap();
        let k = kappa1(&s);
        assert_eq!(k.count, 1);
        assert!(k.nonreal_violations.is_empty());
        let root = (5f64.sqrt() - 1.0) / 2.0;
        assert!((s.max_real_part() - root).abs() < 1e-12);
        assert_eq!(nu_at_k(&ops, 0.0).unwrap(), 1);
    }

    #[test]
    fn kappa1_two_decoupled_modes() {
        let ops = surrogate(&[1.0, 1.0], &[0.0, 0.0], &[-2.0, -3.0]);
        let s = compute_spectrum(&ops, DEFAULT_REAL_TOLERANCE).unwrap();
        assert_eq!(kappa1(&s).count, 2);
        assert_eq!(nu_t(&ops).unwrap(), 2);
    }

    #[test]
    fn schrodinger_well_thresholds() {
        let grid = Grid::new(8.0, 400).unwrap();
        assert_eq!(schrodinger_nu(&Profile::Zero, &grid).unwrap(), 0);
        for (height, expected) in [(10.0, 1), (30.0, 2)] {
            // bound states of a half-line well: #{m : (m − ½)π < √height}
            let threshold = (0..10).filter(|&m| (m as f64 + 0.5) * std::f64::consts::PI < f64::sqrt(height)).count();
            assert_eq!(threshold, expected);
            let g = Profile::square_well(height, 0.0, 1.0);
            let nu = schrodinger_nu(&g, &grid).unwrap();
            let dense = inertia_by_eigenvalues(&schrodinger_matrix(&g, &grid)).unwrap().negative;
            assert_eq!(nu, expected);
            assert_eq!(dense, expected);
        }
    }

    #[test]
    fn deep_well_beam_inertia_matches_dense_oracle() {
        let grid = Grid::new(8.0, 400).unwrap();
        let ops = assemble_operators(1.0, grid, &Profile::square_well(10.0, 0.0, 1.0), &Profile::Zero).unwrap();
        let t = ops.stiffness_operator();
        let nu = nu_t(&ops).unwrap();
        assert!(nu <= 1);
        assert_eq!(nu, inertia_by_eigenvalues(&t).unwrap().negative);
    }

    #[test]
    fn bargmann_examples() {
        let b = bargmann_check(&Profile::square_well(1.0, 0.0, 1.0));
        assert_eq!(b.bound, 0.5);
        assert_eq!(b.premise_max, 0.25);
        assert!(b.premise_holds);
        let z = bargmann_check(&Profile::Zero);
        assert_eq!(z.bound, 0.0);
        assert!(z.premise_holds);
        let deep = bargmann_check(&Profile::square_well(10.0, 0.0, 1.0));
        assert_eq!(deep.bound, 5.0);
        assert_eq!(deep.premise_max, 2.5);
        assert!(!deep.premise_holds);
    }

    #[test]
    fn nu_at_k_domain() {
        let ops = surrogate(&[1.0], &[0.0], &[-2.0]);
        assert!(matches!(nu_at_k(&ops, -1.0), Err(Error::Domain(_))));
        assert!(matches!(nu_at_k(&ops, -2.0), Err(Error::Domain(_))));
        assert!(nu_at_k(&ops, -0.99).is_ok());
    }

    #[test]
    fn free_beam_nu_vanishes_inside_interval() {
        let grid = Grid::new(5.0, 40).unwrap();
        let alpha = 1.0;
        let ops = assemble_operators(alpha, grid, &Profile::Zero, &Profile::Zero).unwrap();
        for k in [-0.9, -0.5, -0.1, 0.0] {
            // k² + a(αk + 1) > 0 for every a > 0 when αk + 1 > 0
            assert_eq!(nu_at_k(&ops, k).unwrap(), 0);
        }
    }

    #[test]
    fn accumulation_flags() {
        let grid = Grid::new(4.0, 40).unwrap();
        let ops = assemble_operators(1.0, grid, &Profile::Zero, &Profile::Zero).unwrap();
        let s = compute_spectrum(&ops, DEFAULT_REAL_TOLERANCE).unwrap();
        let r = accumulation_report(&ops, &s);
        assert!(!r.accumulation_expected);
        assert!(r.right_of_pole.iter().all(|&c| c == 0));
        assert!(r.left_of_zero.iter().all(|&c| c == 0));
        assert!(r.left_of_pole[0] > 0);
    }

    #[test]
    fn count_report_on_deep_well() {
        let grid = Grid::new(8.0, 200).unwrap();
        let ops = assemble_operators(1.0, grid, &Profile::square_well(10.0, 0.0, 1.0), &Profile::Zero).unwrap();
        let s = compute_spectrum(&ops, DEFAULT_REAL_TOLERANCE).unwrap();
        let r = count_report(&ops, &s).unwrap();
        assert!(r.index_equality_holds());
        assert_eq!(r.bracketing_holds(), Some(true));
        assert!(r.nu_monotone_on_nonnegative_k());
        assert_eq!(r.nu_at_samples.iter().find(|(k, _)| *k == 0.0).unwrap().1, r.nu_t);
    }
}
