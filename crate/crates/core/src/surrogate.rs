//! Seeded random operator triples for exercising the counting results beyond
//! beam-shaped matrices.
//!
//! `A = Qᵀ Λ Q` with `Λ ~ U[0.1, 10]`, `B = diag(U[0, 1])` and `G` symmetric
//! with entries `U[−1, 1]` scaled by `½ λ_min(A)^{1/2}`.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::counts::{kappa1, nu_t};
use crate::error::Result;
use crate::linalg;
use crate::operators::OperatorSet;
use crate::pencil::{compute_spectrum, DEFAULT_REAL_TOLERANCE};

pub struct SurrogateGenerator {
    rng: ChaCha8Rng,
}

impl SurrogateGenerator {
    pub fn new(seed: u64) -> Self {
        SurrogateGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn symmetric_uniform(&mut self, n: usize, scale: f64) -> linalg::RMat {
        let mut m = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = scale * self.rng.random_range(-1.0..=1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// One surrogate of dimension `n` with damping `alpha`.
    pub fn sample(&mut self, n: usize, alpha: f64) -> Result<OperatorSet> {
        let (_, q) = linalg::sym_eigen(&self.symmetric_uniform(n, 1.0))?;
        let lambda: Vec<f64> = (0..n).map(|_| self.rng.random_range(0.1..=10.0)).collect();
        let lambda_min = lambda.iter().copied().fold(f64::INFINITY, f64::min);
        // rows of Qᵀ are the eigenvectors, so Qᵀ Λ Q = weighted_gram(Qᵀ, Λ)
        let qt = q.transpose().to_owned();
        let a = linalg::weighted_gram(&qt, &lambda);
        let mut b = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            b[(i, i)] = self.rng.random_range(0.0..=1.0);
        }
        let g = self.symmetric_uniform(n, 0.5 * lambda_min.sqrt());
        OperatorSet::from_matrices(alpha, a, b, g)
    }

    /// Dimension in `[2, max_n]` and `α ∈ [0.5, 2]`, then a sample.
    pub fn sample_any(&mut self, max_n: usize) -> Result<OperatorSet> {
        let n = self.rng.random_range(2..=max_n.max(2));
        let alpha = self.rng.random_range(0.5..=2.0);
        self.sample(n, alpha)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexMismatch {
    pub trial: usize,
    pub n: usize,
    pub kappa1: usize,
    pub nu: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexSuite {
    pub trials: usize,
    pub mismatches: Vec<IndexMismatch>,
    /// `ν(A + G)` per trial, to show the suite is not all-stable.
    pub nu_values: Vec<usize>,
}

/// `κ₁ = ν(A + G)` on `trials` seeded surrogates of dimension at most `max_n`.
/// A right-half-plane eigenvalue not tagged real also counts as a mismatch.
pub fn index_equality_suite(seed: u64, trials: usize, max_n: usize) -> Result<IndexSuite> {
    let mut generator = SurrogateGenerator::new(seed);
    let mut suite = IndexSuite {
        trials,
        mismatches: Vec::new(),
        nu_values: Vec::with_capacity(trials),
    };
    for trial in 0..trials {
        let ops = generator.sample_any(max_n)?;
        let spectrum = compute_spectrum(&ops, DEFAULT_REAL_TOLERANCE)?;
        let k = kappa1(&spectrum);
        let nu = nu_t(&ops)?;
        if k.count != nu || !k.nonreal_violations.is_empty() {
            suite.mismatches.push(IndexMismatch {
                trial,
                n: ops.dim(),
                kappa1: k.count,
                nu,
            });
        }
        suite.nu_values.push(nu);
    }
    Ok(suite)
}
