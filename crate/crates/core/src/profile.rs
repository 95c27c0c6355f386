//! Piecewise-constant coefficient profiles for the tension `g(x)` and the
//! external damping `β(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A piecewise-constant function on `[0, ∞)`, zero outside its pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields, from = "TaggedProfile")]
pub enum Profile {
    Zero,
    /// `height` on `[a, b)`, zero elsewhere.
    SquareWell { height: f64, support: [f64; 2] },
    /// `values[i]` on `[breakpoints[i], breakpoints[i + 1])`.
    Table { breakpoints: Vec<f64>, values: Vec<f64> },
}

// unit variants of an internally tagged enum ignore stray keys
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum TaggedProfile {
    Zero {},
    SquareWell { height: f64, support: [f64; 2] },
    Table { breakpoints: Vec<f64>, values: Vec<f64> },
}

impl From<TaggedProfile> for Profile {
    fn from(t: TaggedProfile) -> Self {
        match t {
            TaggedProfile::Zero {} => Profile::Zero,
            TaggedProfile::SquareWell { height, support } => Profile::SquareWell { height, support },
            TaggedProfile::Table { breakpoints, values } => Profile::Table { breakpoints, values },
        }
    }
}

/// One constant piece `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

impl Piece {
    fn len(&self) -> f64 {
        self.end - self.start
    }
}

impl Profile {
    pub fn square_well(height: f64, a: f64, b: f64) -> Self {
        Profile::SquareWell {
            height,
            support: [a, b],
        }
    }

    pub fn constant(value: f64, a: f64, b: f64) -> Self {
        Profile::Table {
            breakpoints: vec![a, b],
            values: vec![value],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Profile::Zero => Ok(()),
            Profile::SquareWell { height, support: [a, b] } => {
                if !height.is_finite() || !a.is_finite() || !b.is_finite() {
                    return Err(Error::input("square_well parameters must be finite"));
                }
                if !(0.0 <= *a && a < b) {
                    return Err(Error::input(format!("square_well support must satisfy 0 <= a < b, got [{a}, {b}]")));
                }
                Ok(())
            }
            Profile::Table { breakpoints, values } => {
                if breakpoints.len() != values.len() + 1 {
                    return Err(Error::input(format!(
                        "table needs one more breakpoint than values ({} breakpoints, {} values)",
                        breakpoints.len(),
                        values.len()
                    )));
                }
                if breakpoints.iter().chain(values).any(|v| !v.is_finite()) {
                    return Err(Error::input("table entries must be finite"));
                }
                if breakpoints.first().is_some_and(|&x| x < 0.0) {
                    return Err(Error::input("table breakpoints must be nonnegative"));
                }
                if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::input("table breakpoints must be strictly increasing"));
                }
                Ok(())
            }
        }
    }

    /// Nonzero pieces in increasing order.
    pub fn pieces(&self) -> Vec<Piece> {
        match self {
            Profile::Zero => Vec::new(),
            Profile::SquareWell { height, support: [a, b] } => {
                if *height == 0.0 {
                    Vec::new()
                } else {
                    vec![Piece { start: *a, end: *b, value: *height }]
                }
            }
            Profile::Table { breakpoints, values } => breakpoints
                .windows(2)
                .zip(values)
                .filter(|(_, &v)| v != 0.0)
                .map(|(w, &v)| Piece { start: w[0], end: w[1], value: v })
                .collect(),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.pieces()
            .iter()
            .find(|p| p.start <= x && x < p.end)
            .map_or(0.0, |p| p.value)
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        let pieces = self.pieces();
        xs.iter()
            .map(|&x| {
                pieces
                    .iter()
                    .find(|p| p.start <= x && x < p.end)
                    .map_or(0.0, |p| p.value)
            })
            .collect()
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Profile {
        let pieces = self.pieces();
        if pieces.is_empty() {
            return Profile::Zero;
        }
        let mut breakpoints = Vec::with_capacity(2 * pieces.len());
        let mut values = Vec::with_capacity(2 * pieces.len());
        for p in &pieces {
            match breakpoints.last() {
                Some(&last) if last == p.start => {}
                Some(_) => {
                    // gap between pieces
                    values.push(0.0);
                    breakpoints.push(p.start);
                }
                None => breakpoints.push(p.start),
            }
            values.push(f(p.value));
            breakpoints.push(p.end);
        }
        Profile::Table { breakpoints, values }
    }

    /// `g₊ = (|g| + g) / 2`.
    pub fn positive_part(&self) -> Profile {
        self.map_values(|v| v.max(0.0))
    }

    /// `g₋ = (|g| − g) / 2`.
    pub fn negative_part(&self) -> Profile {
        self.map_values(|v| (-v).max(0.0))
    }

    pub fn abs(&self) -> Profile {
        self.map_values(f64::abs)
    }

    pub fn scaled(&self, s: f64) -> Profile {
        self.map_values(|v| s * v)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.pieces().is_empty()
    }

    pub fn min_value(&self) -> f64 {
        let pieces = self.pieces();
        // zero is attained outside the pieces
        pieces.iter().map(|p| p.value).fold(0.0, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.pieces().iter().map(|p| p.value).fold(0.0, f64::max)
    }

    pub fn sup_abs(&self) -> f64 {
        self.pieces().iter().map(|p| p.value.abs()).fold(0.0, f64::max)
    }

    /// End of the last nonzero piece (0 for the zero profile).
    pub fn support_end(&self) -> f64 {
        self.pieces().last().map_or(0.0, |p| p.end)
    }

    /// Exact `∫_lo^hi g(s) ds`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        self.pieces()
            .iter()
            .map(|p| {
                let overlap = hi.min(p.end) - lo.max(p.start);
                if overlap > 0.0 {
                    overlap * p.value
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Exact `∫₀^∞ x g(x) dx`.
    pub fn first_moment(&self) -> f64 {
        self.pieces()
            .iter()
            .map(|p| 0.5 * p.value * (p.end * p.end - p.start * p.start))
            .sum()
    }

    /// Exact `sup_{x ≥ from} x ∫_x^∞ g(s) ds` for a nonnegative profile.
    ///
    /// On each piece the function is a concave quadratic in `x`, so the
    /// supremum is attained at a piece end or at the vertex.
    pub fn tail_moment_sup(&self, from: f64) -> f64 {
        let pieces = self.pieces();
        let mut tail_after = vec![0.0; pieces.len() + 1];
        for i in (0..pieces.len()).rev() {
            tail_after[i] = tail_after[i + 1] + pieces[i].value * pieces[i].len();
        }
        let f = |x: f64| x * self.integral(x, f64::INFINITY);
        let mut best = if from >= 0.0 { f(from) } else { 0.0 };
        let mut cursor = from.max(0.0);
        for (i, p) in pieces.iter().enumerate() {
            // Left of the piece, ∫_x^∞ g is constant and x grows: check p.start.
            if p.start > cursor {
                best = best.max(f(p.start));
            }
            let lo = p.start.max(cursor);
            let hi = p.end;
            if hi > lo {
                best = best.max(f(lo)).max(f(hi));
                if p.value > 0.0 {
                    // x (value (end - x) + rest) has its vertex at (value·end + rest) / (2 value)
                    let vertex = (p.value * p.end + tail_after[i + 1]) / (2.0 * p.value);
                    if vertex > lo && vertex < hi {
                        best = best.max(vertex * (p.value * (p.end - vertex) + tail_after[i + 1]));
                    }
                }
            }
            cursor = cursor.max(hi);
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_well_validation() {
        assert!(Profile::square_well(1.0, 0.0, 1.0).validate().is_ok());
        assert!(Profile::square_well(1.0, 1.0, 1.0).validate().is_err());
        assert!(Profile::square_well(1.0, -0.5, 1.0).validate().is_err());
        assert!(Profile::square_well(f64::INFINITY, 0.0, 1.0).validate().is_err());
    }

    #[test]
    fn table_validation() {
        let bad = Profile::Table { breakpoints: vec![0.0, 1.0], values: vec![1.0, 2.0] };
        assert!(bad.validate().is_err());
        let unsorted = Profile::Table { breakpoints: vec![0.0, 2.0, 1.0], values: vec![1.0, 2.0] };
        assert!(unsorted.validate().is_err());
    }

    #[test]
    fn sign_split_reassembles() {
        let g = Profile::Table {
            breakpoints: vec![0.0, 1.0, 2.5, 4.0],
            values: vec![2.0, -3.0, 0.5],
        };
        let (gp, gm) = (g.positive_part(), g.negative_part());
        for k in 0..80 {
            let x = k as f64 * 0.05;
            assert!(gp.value(x) >= 0.0 && gm.value(x) >= 0.0);
            assert_eq!(gp.value(x) - gm.value(x), g.value(x));
            assert_eq!(g.abs().value(x), gp.value(x) + gm.value(x));
        }
    }

    #[test]
    fn exact_integrals() {
        let g = Profile::square_well(1.0, 0.0, 1.0);
        assert_eq!(g.integral(-1.0, 0.5), 0.5);
        assert_eq!(g.first_moment(), 0.5);
        assert_eq!(g.tail_moment_sup(0.0), 0.25);
        let deep = Profile::square_well(10.0, 0.0, 1.0);
        assert_eq!(deep.first_moment(), 5.0);
        assert_eq!(deep.tail_moment_sup(0.0), 2.5);
    }

    #[test]
    fn tail_moment_beyond_support_is_zero() {
        let g = Profile::square_well(1.0, 1.0, 2.0);
        assert_eq!(g.tail_moment_sup(3.0), 0.0);
        // x ∫_x^2 1 = x(2 - x) has its vertex at 1 on [1, 2)
        assert_eq!(g.tail_moment_sup(0.0), 1.0);
    }

    #[test]
    fn serde_roundtrip_through_toml() {
        let g: Profile = toml::from_str("kind = \"square_well\"\nheight = 10.0\nsupport = [0.0, 1.0]\n").unwrap();
        assert_eq!(g, Profile::square_well(10.0, 0.0, 1.0));
        let err = toml::from_str::<Profile>("kind = \"zero\"\nheight = 1.0\n");
        assert!(err.is_err());
    }
}
