use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform interior grid on the truncated beam `[0, L]`.
///
/// Nodes are `x_j = j·h` for `j = 1..=n` with `h = L / (n + 1)`; the two end
/// points carry the clamped boundary conditions and are not unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    length: f64,
    n: usize,
}

impl Grid {
    /// Smallest grid the fourth-difference stencil supports.
    pub const MIN_POINTS: usize = 4;

    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !length.is_finite() || length <= 0.0 {
            return Err(Error::input(format!("grid length must be positive and finite, got {length}")));
        }
        if n < Self::MIN_POINTS {
            return Err(Error::input(format!(
                "grid needs at least {} interior points, got {n}",
                Self::MIN_POINTS
            )));
        }
        Ok(Grid { length, n })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.n as f64 + 1.0)
    }

    /// Interior node `j` in `1..=n`.
    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (1..=self.n).map(|j| self.node(j)).collect()
    }

    /// The `n + 1` cell midpoints `(m + ½)·h`, `m = 0..=n`.
    pub fn midpoints(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..=self.n).map(|m| (m as f64 + 0.5) * h).collect()
    }

    /// Discrete `L²` inner product `h Σ y_j z_j`.
    pub fn inner(&self, y: &[f64], z: &[f64]) -> f64 {
        self.spacing() * y.iter().zip(z).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Same physical length with twice the resolution.
    pub fn refined(&self) -> Self {
        Grid {
            length: self.length,
            n: 2 * self.n + 1,
        }
    }
}
