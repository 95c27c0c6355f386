//! Finite-difference surrogates of the beam operators and their structural
//! constants.
//!
//! * `A` is the clamped fourth-derivative operator, assembled as `Kᵀ W K`
//!   from the second-difference map `K` with ghost-point rows at both ends,
//!   so `(Ay, y) ≈ ∫|y″|²` and `A` is symmetric positive definite.
//! * `B = diag(β(x_j))` is the external damping.
//! * `G = −D₁ᵀ diag(g(x_{m+½})) D₁` is the tension term, `(Gy, y) ≈ −∫ g|y′|²`.

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{self, RMat};
use crate::profile::Profile;

/// Operator bounds entering the spectral enclosures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    /// Upper bound of `B`.
    pub b_plus: f64,
    /// `max(0, sup σ(G))`.
    pub g_plus: f64,
    /// `min(0, inf σ(G))`.
    pub g_minus: f64,
    /// Subordination constant in `|G| ≤ g₀ A^{1/2} + g₁ I`.
    pub g0: f64,
    /// Pinned to zero.
    pub g1: f64,
}

/// The matrices `A`, `B`, `G` together with damping `α` and derived constants.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub alpha: f64,
    pub a: RMat,
    pub b: RMat,
    pub g: RMat,
    pub grid: Option<Grid>,
    pub tension: Option<Profile>,
    pub damping: Option<Profile>,
    pub constants: Constants,
    /// Scale used to bracket the subordination bisection (`‖g‖∞` for beams,
    /// `‖G‖₂` for matrix surrogates).
    g_scale: f64,
}

/// Second-difference map on the interior nodes with clamped ghost rows at
/// `x = 0` and `x = L`: shape `(n + 2) × n`.
fn second_difference(n: usize, h: f64) -> RMat {
    let s = 1.0 / (h * h);
    let mut k = Mat::<f64>::zeros(n + 2, n);
    // y(0) = 0, y'(0) = 0 ⇒ ghost y₋₁ = y₁.
    k[(0, 0)] = 2.0 * s;
    for row in 1..=n {
        let c = row - 1;
        k[(row, c)] = -2.0 * s;
        if c > 0 {
            k[(row, c - 1)] = s;
        }
        if c + 1 < n {
            k[(row, c + 1)] = s;
        }
    }
    k[(n + 1, n - 1)] = 2.0 * s;
    k
}

/// Forward differences between consecutive nodes with `y₀ = y_{n+1} = 0`:
/// shape `(n + 1) × n`.
fn forward_difference(n: usize, h: f64) -> RMat {
    let mut d = Mat::<f64>::zeros(n + 1, n);
    for m in 0..=n {
        if m < n {
            d[(m, m)] = 1.0 / h;
        }
        if m > 0 {
            d[(m, m - 1)] = -1.0 / h;
        }
    }
    d
}

/// Dirichlet Laplacian `D₁ᵀ D₁` (≈ −d²/dx² with `y(0) = y(L) = 0`).
pub fn dirichlet_laplacian(grid: &Grid) -> RMat {
    let d = forward_difference(grid.n(), grid.spacing());
    linalg::weighted_gram(&d, &vec![1.0; grid.n() + 1])
}

fn check_profile_fits(name: &str, p: &Profile, grid: &Grid) -> Result<()> {
    p.validate()
        .map_err(|e| Error::input(format!("{name} profile: {e}")))?;
    if let Profile::SquareWell { support: [_, b], .. } = p {
        if *b > grid.length() {
            return Err(Error::input(format!(
                "{name} square_well support ends at {b}, beyond the truncation length {}",
                grid.length()
            )));
        }
    }
    Ok(())
}

/// Build `A`, `B`, `G` on `grid` and estimate their constants.
pub fn assemble_operators(alpha: f64, grid: Grid, g: &Profile, beta: &Profile) -> Result<OperatorSet> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::input(format!("alpha must be positive and finite, got {alpha}")));
    }
    check_profile_fits("tension", g, &grid)?;
    check_profile_fits("damping", beta, &grid)?;
    if beta.min_value() < 0.0 {
        return Err(Error::Hypothesis {
            hypothesis: "H2",
            detail: format!("external damping must be nonnegative, found β = {}", beta.min_value()),
        });
    }

    let (n, h) = (grid.n(), grid.spacing());

    let k = second_difference(n, h);
    let mut w = vec![1.0; n + 2];
    w[0] = 0.5;
    w[n + 1] = 0.5;
    let a = linalg::weighted_gram(&k, &w);

    let beta_nodes = beta.sample(&grid.nodes());
    let b = Mat::from_fn(n, n, |i, j| if i == j { beta_nodes[i] } else { 0.0 });

    let g_mid: Vec<f64> = g.sample(&grid.midpoints()).iter().map(|v| -v).collect();
    let g_mat = linalg::weighted_gram(&forward_difference(n, h), &g_mid);

    let mut ops = OperatorSet {
        alpha,
        a,
        b,
        g: g_mat,
        grid: Some(grid),
        tension: Some(g.clone()),
        damping: Some(beta.clone()),
        constants: Constants {
            b_plus: 0.0,
            g_plus: 0.0,
            g_minus: 0.0,
            g0: 0.0,
            g1: 0.0,
        },
        g_scale: g.sup_abs(),
    };
    ops.constants = estimate_constants(&ops)?;
    Ok(ops)
}

impl OperatorSet {
    /// Wrap explicit matrices (used for small surrogates and random suites).
    pub fn from_matrices(alpha: f64, a: RMat, b: RMat, g: RMat) -> Result<Self> {
        let n = a.nrows();
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::input(format!("alpha must be positive and finite, got {alpha}")));
        }
        for (name, m) in [("A", &a), ("B", &b), ("G", &g)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::input(format!("{name} must be {n}x{n}")));
            }
            if (0..n).any(|i| (0..n).any(|j| !m[(i, j)].is_finite())) {
                return Err(Error::input(format!("{name} has non-finite entries")));
            }
        }
        if !linalg::is_exactly_symmetric(&a) || !linalg::is_positive_definite(&a) {
            return Err(Error::Hypothesis {
                hypothesis: "H1",
                detail: "A must be symmetric positive definite".into(),
            });
        }
        let b_diag_ok = (0..n).all(|i| b[(i, i)] >= 0.0 && (0..n).all(|j| i == j || b[(i, j)] == 0.0));
        if !b_diag_ok {
            return Err(Error::Hypothesis {
                hypothesis: "H2",
                detail: "B must be diagonal with nonnegative entries".into(),
            });
        }
        if !linalg::is_exactly_symmetric(&g) {
            return Err(Error::Hypothesis {
                hypothesis: "H3",
                detail: "G must be symmetric".into(),
            });
        }
        let g_scale = linalg::spectral_norm(&g)?;
        let mut ops = OperatorSet {
            alpha,
            a,
            b,
            g,
            grid: None,
            tension: None,
            damping: None,
            constants: Constants {
                b_plus: 0.0,
                g_plus: 0.0,
                g_minus: 0.0,
                g0: 0.0,
                g1: 0.0,
            },
            g_scale,
        };
        ops.constants = estimate_constants(&ops)?;
        Ok(ops)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `αA + B`.
    pub fn damping_operator(&self) -> RMat {
        linalg::axpy(&self.b, self.alpha, &self.a)
    }

    /// `A + G`.
    pub fn stiffness_operator(&self) -> RMat {
        linalg::axpy(&self.a, 1.0, &self.g)
    }

    /// Whether `g₊ ≡ 0`, judged from the profile when available and from the
    /// spectrum of `G` otherwise.
    pub fn tension_positive_part_vanishes(&self) -> bool {
        match &self.tension {
            Some(p) => p.positive_part().is_identically_zero(),
            None => self.constants.g_minus == 0.0,
        }
    }

    /// Whether `g₋ ≡ 0`.
    pub fn tension_negative_part_vanishes(&self) -> bool {
        match &self.tension {
            Some(p) => p.negative_part().is_identically_zero(),
            None => self.constants.g_plus == 0.0,
        }
    }
}

/// Bisection steps for the subordination constant.
const G0_BISECTION_STEPS: usize = 60;

/// Operator bounds `b₊`, `g±` and the subordination constant `g₀` (with `g₁ = 0`).
pub fn estimate_constants(ops: &OperatorSet) -> Result<Constants> {
    let n = ops.dim();
    let b_plus = (0..n).map(|i| ops.b[(i, i)]).fold(0.0, f64::max);

    let g_is_zero = (0..n).all(|i| (0..n).all(|j| ops.g[(i, j)] == 0.0));
    if g_is_zero {
        return Ok(Constants {
            b_plus,
            g_plus: 0.0,
            g_minus: 0.0,
            g0: 0.0,
            g1: 0.0,
        });
    }

    let g_eigs = linalg::sym_eigenvalues(&ops.g)?;
    let g_plus = g_eigs.last().copied().unwrap_or(0.0).max(0.0);
    let g_minus = g_eigs.first().copied().unwrap_or(0.0).min(0.0);

    let sqrt_a = linalg::sym_function(&ops.a, |s| s.max(0.0).sqrt())?;
    let abs_g = linalg::sym_function(&ops.g, f64::abs)?;
    let tol = 1e-10 * linalg::norm_inf(&ops.a);

    // s·A^{1/2} − |G| ⪰ −tol·I
    let dominates = |s: f64| {
        let mut m = linalg::axpy(&abs_g, -s, &sqrt_a);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = -m[(i, j)];
            }
            m[(i, i)] += tol;
        }
        linalg::is_positive_definite(&m)
    };

    let hi_limit = 1e3 * ops.g_scale;
    if !dominates(hi_limit) {
        return Err(Error::Subordination(format!(
            "s·A^(1/2) does not dominate |G| for s up to {hi_limit:e}"
        )));
    }
    let (mut lo, mut hi) = (0.0, hi_limit);
    if dominates(0.0) {
        hi = 0.0;
    } else {
        for _ in 0..G0_BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if dominates(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
    }

    Ok(Constants {
        b_plus,
        g_plus,
        g_minus,
        g0: hi,
        g1: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassKReport {
    /// Largest moving-window integral `∫_{x−a}^{x+a}|g|` over the tail centers.
    pub sup_tail: f64,
    /// Window integrals over the last ten centers are non-increasing and
    /// either vanish or strictly drop.
    pub decays: bool,
}

/// Finite-window look at the moving integrals of `|g|` on `[L/2, L − a]`.
/// Diagnostic only: a truncated domain cannot certify the limit at infinity.
pub fn class_k_diagnostic(g: &Profile, window: f64, length: f64) -> ClassKReport {
    let abs_g = g.abs();
    let window_integral = |x: f64| abs_g.integral(x - window, x + window);
    let lo = 0.5 * length;
    let hi = (length - window).max(lo);

    // The window integral is piecewise linear in the center; its maximum sits
    // at an end of the range or where x ± a crosses a breakpoint.
    let mut candidates = vec![lo, hi];
    for p in abs_g.pieces() {
        for edge in [p.start, p.end] {
            for c in [edge - window, edge + window] {
                if c > lo && c < hi {
                    candidates.push(c);
                }
            }
        }
    }
    let sup_tail = candidates.iter().map(|&x| window_integral(x)).fold(0.0, f64::max);

    let samples: Vec<f64> = (0..10)
        .map(|k| window_integral(lo + (hi - lo) * k as f64 / 9.0))
        .collect();
    let scale = sup_tail.max(f64::MIN_POSITIVE);
    let non_increasing = samples.windows(2).all(|w| w[1] <= w[0] + 1e-14 * scale);
    let vanishing = samples.iter().all(|v| v.abs() <= 1e-14);
    let drops = samples[9] < samples[0] - 1e-14 * scale;
    ClassKReport {
        sup_tail,
        decays: non_increasing && (vanishing || drops),
    }
}
