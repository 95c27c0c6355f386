//! Time evolution of the damped beam through the shifted first-order system
//! `V̇ = T̃V`, and an independent inverse-Laplace evaluation of the same
//! solution.

use std::io::Write;

use faer::{Mat, MatMut, Side};
use faer::prelude::*;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{self, RMat};
use crate::operators::OperatorSet;
use crate::pencil::ShiftedSystem;

/// Output of [`evolve`]. `u` and `udot` are in the original variables,
/// `u(t) = e^{k₀t} v₁(t)`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub k0: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub udot: Vec<Vec<f64>>,
    /// `‖u̇‖² + (C̃u, u)`.
    pub energies: Vec<f64>,
    /// `(C̃v₁, v₁) + ‖v₂‖²`.
    pub shifted_energies: Vec<f64>,
    /// `‖ψ₁‖² + (C̃ψ₀, ψ₀)`.
    pub initial_energy: f64,
    /// Classical residuals at interior steps, filled by [`attach_residuals`].
    pub residuals: Vec<Option<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n(&self) -> usize {
        self.u.first().map_or(0, Vec::len)
    }

    /// Shifted state `(v₁, v₂)` at step `k`, recovered from `(u, u̇)`.
    pub fn shifted_state(&self, k: usize) -> Vec<f64> {
        let s = (-self.k0 * self.times[k]).exp();
        let v1: Vec<f64> = self.u[k].iter().map(|x| s * x).collect();
        let v2 = self.udot[k].iter().zip(&v1).map(|(d, v)| s * d - self.k0 * v);
        v1.iter().copied().chain(v2).collect()
    }

    /// Largest relative step-to-step increase of `Ẽ` (≤ 0 when contracting).
    pub fn max_shifted_energy_growth(&self) -> f64 {
        self.shifted_energies
            .windows(2)
            .map(|w| if w[0] > 0.0 { (w[1] - w[0]) / w[0] } else if w[1] > 0.0 { f64::INFINITY } else { 0.0 })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn shifted_energy_nonincreasing(&self, rel: f64) -> bool {
        self.shifted_energies.windows(2).all(|w| w[1] <= w[0] * (1.0 + rel))
    }

    /// `max_k E_k / (e^{k₀t_k} E₀)`; at most 1 when the energy bound holds.
    pub fn max_energy_bound_ratio(&self) -> f64 {
        self.energies
            .iter()
            .zip(&self.times)
            .map(|(e, t)| {
                let bound = (self.k0 * t).exp() * self.initial_energy;
                if bound > 0.0 { e / bound } else if *e > 0.0 { f64::INFINITY } else { 0.0 }
            })
            .fold(0.0, f64::max)
    }

    pub fn energy_bound_holds(&self, rel: f64) -> bool {
        self.max_energy_bound_ratio() <= 1.0 + rel
    }

    /// Index of the stored time closest to `t`.
    pub fn index_of(&self, t: f64) -> usize {
        ((t / self.dt).round().max(0.0) as usize).min(self.len().saturating_sub(1))
    }
}

fn check_vectors(n: usize, psi0: &[f64], psi1: &[f64]) -> Result<()> {
    if psi0.len() != n || psi1.len() != n {
        return Err(Error::input(format!(
            "initial data must have length {n}, got {} and {}",
            psi0.len(),
            psi1.len()
        )));
    }
    if psi0.iter().chain(psi1).any(|x| !x.is_finite()) {
        return Err(Error::input("initial data must be finite"));
    }
    Ok(())
}

/// Trapezoidal (Cayley) stepping `V_{k+1} = (I − τT̃)⁻¹(I + τT̃)V_k`, `τ = Δt/2`,
/// from `V₀ = (ψ₀, ψ₁ − k₀ψ₀)`.
pub fn evolve(shifted: &ShiftedSystem, psi0: &[f64], psi1: &[f64], t_end: f64, dt: f64) -> Result<Trajectory> {
    let n = shifted.dim();
    check_vectors(n, psi0, psi1)?;
    if !(t_end.is_finite() && dt.is_finite() && dt > 0.0 && dt <= t_end) {
        return Err(Error::input(format!("need 0 < dt <= t_end, got dt = {dt}, t_end = {t_end}")));
    }
    let steps = (t_end / dt - 1e-9).ceil() as usize;
    let tau = 0.5 * dt;
    let k0 = shifted.k0;

    // eliminating w₁ = r₁ + τw₂ leaves (I + τB̃ + τ²C̃) w₂ = r₂ − τC̃r₁
    let mut schur = linalg::axpy(&shifted.b_tilde, tau, &shifted.c_tilde);
    for i in 0..n {
        for j in 0..n {
            schur[(i, j)] *= tau;
        }
        schur[(i, i)] += 1.0;
    }
    let llt = schur
        .llt(Side::Lower)
        .map_err(|e| Error::numerical(format!("Cayley step factorization failed: {e:?}")))?;

    let mut v1 = psi0.to_vec();
    let mut v2: Vec<f64> = psi1.iter().zip(psi0).map(|(p1, p0)| p1 - k0 * p0).collect();
    let c0 = linalg::matvec(&shifted.c_tilde, psi0);
    let initial_energy = linalg::dot(psi1, psi1) + linalg::dot(&c0, psi0);

    let mut traj = Trajectory {
        k0,
        dt,
        times: Vec::with_capacity(steps + 1),
        u: Vec::with_capacity(steps + 1),
        udot: Vec::with_capacity(steps + 1),
        energies: Vec::with_capacity(steps + 1),
        shifted_energies: Vec::with_capacity(steps + 1),
        initial_energy,
        residuals: Vec::new(),
    };

    let mut cv1 = c0;
    for k in 0..=steps {
        let t = k as f64 * dt;
        let growth = (k0 * t).exp();
        let vdot_part: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| k0 * a + b).collect();
        let cvv = linalg::dot(&cv1, &v1);
        traj.shifted_energies.push(cvv + linalg::dot(&v2, &v2));
        traj.energies.push(growth * growth * (linalg::dot(&vdot_part, &vdot_part) + cvv));
        traj.u.push(if k == 0 { psi0.to_vec() } else { v1.iter().map(|x| growth * x).collect() });
        traj.udot.push(if k == 0 { psi1.to_vec() } else { vdot_part.iter().map(|x| growth * x).collect() });
        traj.times.push(t);
        if k == steps {
            break;
        }

        let bv2 = linalg::matvec(&shifted.b_tilde, &v2);
        let r1: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| a + tau * b).collect();
        let r2: Vec<f64> = (0..n).map(|i| v2[i] - tau * (cv1[i] + bv2[i])).collect();
        let cr1 = linalg::matvec(&shifted.c_tilde, &r1);
        let mut w2: Vec<f64> = r2.iter().zip(&cr1).map(|(a, b)| a - tau * b).collect();
        llt.solve_in_place(MatMut::from_column_major_slice_mut(&mut w2, n, 1));
        if w2.iter().any(|x| !x.is_finite()) {
            return Err(Error::numerical(format!("non-finite state at step {}", k + 1)));
        }
        v1 = r1.iter().zip(&w2).map(|(a, b)| a + tau * b).collect();
        v2 = w2;
        cv1 = linalg::matvec(&shifted.c_tilde, &v1);
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureParams {
    pub sigma0: f64,
    pub half_width: f64,
    pub m: usize,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        QuadratureParams {
            sigma0: 1.0,
            half_width: 200.0,
            m: 4000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceResult {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    /// H-norm of the difference between the `m` and `m/2` panel results.
    pub error_estimate: f64,
}

impl LaplaceResult {
    pub fn state(&self) -> Vec<f64> {
        self.v1.iter().chain(&self.v2).copied().collect()
    }
}

/// Bromwich inversion of `v̂(ξ) = L̃⁻¹(ξ)[(B̃ + ξ)ψ₀ − k₀ψ₀ + ψ₁]` along `Re ξ = σ₀`.
///
/// The leading terms `ψ₀/ξ + w/ξ²` (with `w = ψ₁ − k₀ψ₀`) are inverted
/// exactly, and the `O(ξ⁻³)` remainder goes through the trapezoid rule.
pub fn laplace_solution(
    shifted: &ShiftedSystem,
    psi0: &[f64],
    psi1: &[f64],
    t: f64,
    quad: QuadratureParams,
) -> Result<LaplaceResult> {
    let n = shifted.dim();
    check_vectors(n, psi0, psi1)?;
    let QuadratureParams { sigma0, half_width, m } = quad;
    if !(sigma0.is_finite() && sigma0 > 0.0) {
        return Err(Error::input(format!("sigma0 must be positive, got {sigma0}")));
    }
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(Error::input(format!("half_width must be positive, got {half_width}")));
    }
    if m < 100 || m % 4 != 0 {
        return Err(Error::input(format!("m must be a multiple of 4 and at least 100, got {m}")));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::input(format!("t must be positive, got {t}")));
    }

    let w: Vec<f64> = psi1.iter().zip(psi0).map(|(p1, p0)| p1 - shifted.k0 * p0).collect();
    let c_psi0 = linalg::matvec(&shifted.c_tilde, psi0);
    let b_w = linalg::matvec(&shifted.b_tilde, &w);
    let p: Vec<f64> = c_psi0.iter().zip(&b_w).map(|(a, b)| a + b).collect();
    let q = linalg::matvec(&shifted.c_tilde, &w);

    let half = m / 2;
    let step = 2.0 * half_width / m as f64;
    let mut fine = vec![Complex64::new(0.0, 0.0); 2 * n];
    let mut coarse = vec![Complex64::new(0.0, 0.0); 2 * n];
    for j in 0..=half {
        let xi = Complex64::new(sigma0, j as f64 * step);
        let rhs = Mat::from_fn(n, 1, |i, _| -(p[i] / xi + q[i] / (xi * xi)));
        let r = linalg::solve_c(&shifted.eval(xi), &rhs);
        let weight = if j == 0 || j == half { 0.5 } else { 1.0 };
        let e = (xi * t).exp() * weight;
        let coarse_weight = if j % 2 == 0 {
            if j == 0 || j == half { 0.5 } else { 1.0 }
        } else {
            0.0
        };
        let ec = (xi * t).exp() * coarse_weight;
        for i in 0..n {
            let ri = r[(i, 0)];
            fine[i] += e * ri;
            fine[n + i] += e * xi * ri;
            coarse[i] += ec * ri;
            coarse[n + i] += ec * xi * ri;
        }
    }
    let finish = |acc: &[Complex64], h: f64| -> Vec<f64> {
        (0..2 * n)
            .map(|i| {
                let smooth = if i < n { psi0[i] + t * w[i] } else { w[i - n] };
                smooth + h * acc[i].re / std::f64::consts::PI
            })
            .collect()
    };
    let v = finish(&fine, step);
    let vc = finish(&coarse, 2.0 * step);
    let diff: Vec<f64> = v.iter().zip(&vc).map(|(a, b)| a - b).collect();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::numerical("non-finite Bromwich quadrature"));
    }
    Ok(LaplaceResult {
        v1: v[..n].to_vec(),
        v2: v[n..].to_vec(),
        error_estimate: shifted.energy_norm(&diff),
    })
}

/// `‖ü + (αA+B)u̇ + (A+G)u‖ / (‖u‖ + ‖u̇‖)` by central differences of `u` at
/// the stored times nearest `sample_times`.
pub fn classical_residual(traj: &Trajectory, ops: &OperatorSet, sample_times: &[f64]) -> Result<Vec<f64>> {
    let damping = ops.damping_operator();
    let stiffness = ops.stiffness_operator();
    sample_times
        .iter()
        .map(|&t| {
            let k = traj.index_of(t);
            if !t.is_finite() || k < 2 || k + 2 >= traj.len() {
                return Err(Error::input(format!(
                    "sample time {t} is not at least two steps inside [0, {}]",
                    traj.times.last().copied().unwrap_or(0.0)
                )));
            }
            Ok(residual_at(traj, &damping, &stiffness, k))
        })
        .collect()
}

fn residual_at(traj: &Trajectory, damping: &RMat, stiffness: &RMat, k: usize) -> f64 {
    let dt = traj.dt;
    let (um, u0, up) = (&traj.u[k - 1], &traj.u[k], &traj.u[k + 1]);
    let n = u0.len();
    let udd: Vec<f64> = (0..n).map(|i| (up[i] - 2.0 * u0[i] + um[i]) / (dt * dt)).collect();
    let ud: Vec<f64> = (0..n).map(|i| (up[i] - um[i]) / (2.0 * dt)).collect();
    let du = linalg::matvec(damping, &ud);
    let su = linalg::matvec(stiffness, u0);
    let res: Vec<f64> = (0..n).map(|i| udd[i] + du[i] + su[i]).collect();
    let scale = linalg::norm2(u0) + linalg::norm2(&ud);
    if scale == 0.0 {
        0.0
    } else {
        linalg::norm2(&res) / scale
    }
}

/// Residuals at every step at least two steps from either end.
pub fn attach_residuals(traj: &mut Trajectory, ops: &OperatorSet) {
    let damping = ops.damping_operator();
    let stiffness = ops.stiffness_operator();
    let len = traj.len();
    traj.residuals = (0..len)
        .map(|k| (k >= 2 && k + 2 < len).then(|| residual_at(traj, &damping, &stiffness, k)))
        .collect();
}

/// `amplitude · sin⁴(πx/L)` on the nodes: vanishes with its first three
/// derivatives at both clamped ends.
pub fn bump(grid: &Grid, amplitude: f64) -> Vec<f64> {
    let l = grid.length();
    grid.nodes()
        .iter()
        .map(|&x| amplitude * (std::f64::consts::PI * x / l).sin().powi(4))
        .collect()
}

/// `index`-th eigenvector of `A` (ascending), sign fixed so its largest entry is positive.
pub fn stiffness_mode(ops: &OperatorSet, index: usize) -> Result<Vec<f64>> {
    let (_, vecs) = linalg::sym_eigen(&ops.a)?;
    if index >= ops.dim() {
        return Err(Error::input(format!("mode index {index} out of range for dimension {}", ops.dim())));
    }
    let mut v = linalg::col_to_vec(vecs.col(index));
    let (imax, _) = v
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
    if v[imax] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(v)
}

pub fn write_trajectory_csv(traj: &Trajectory, out: &mut impl Write) -> Result<()> {
    writeln!(out, "t,energy,shifted_energy,residual")?;
    for k in 0..traj.len() {
        let res = match traj.residuals.get(k).copied().flatten() {
            Some(r) => format!("{r:.16e}"),
            None => "nan".to_string(),
        };
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{}",
            traj.times[k], traj.energies[k], traj.shifted_energies[k], res
        )?;
    }
    Ok(())
}

pub const DUMP_MAGIC: &[u8; 8] = b"PBSTATE1";

/// Full-state dump: `t, u[0..n], u̇[0..n]` per time.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDump {
    pub n: usize,
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub udot: Vec<Vec<f64>>,
}

impl From<&Trajectory> for StateDump {
    fn from(traj: &Trajectory) -> Self {
        StateDump {
            n: traj.n(),
            times: traj.times.clone(),
            u: traj.u.clone(),
            udot: traj.udot.clone(),
        }
    }
}

impl StateDump {
    /// Magic, then `n` and the number of time rows as little-endian `u64`,
    /// then each row as little-endian `f64`.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 8 * self.times.len() * (2 * self.n + 1));
        out.extend_from_slice(DUMP_MAGIC);
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        out.extend_from_slice(&(self.times.len() as u64).to_le_bytes());
        for k in 0..self.times.len() {
            out.extend_from_slice(&self.times[k].to_le_bytes());
            for x in self.u[k].iter().chain(&self.udot[k]) {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 24 || &bytes[..8] != DUMP_MAGIC {
            return Err(Error::Format("missing state dump header".into()));
        }
        let read_u64 = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        let n = usize::try_from(read_u64(8)).map_err(|_| Error::Format("n does not fit in usize".into()))?;
        let rows = usize::try_from(read_u64(16)).map_err(|_| Error::Format("row count does not fit in usize".into()))?;
        let row_len = n
            .checked_mul(2)
            .and_then(|x| x.checked_add(1))
            .ok_or_else(|| Error::Format("n too large".into()))?;
        let expected = row_len
            .checked_mul(rows)
            .and_then(|x| x.checked_mul(8))
            .and_then(|x| x.checked_add(24))
            .ok_or_else(|| Error::Format("dump size overflows".into()))?;
        if bytes.len() != expected {
            return Err(Error::Format(format!(
                "expected {expected} bytes for n = {n} and {rows} rows, got {}",
                bytes.len()
            )));
        }
        let values: Vec<f64> = bytes[24..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let mut dump = StateDump {
            n,
            times: Vec::with_capacity(rows),
            u: Vec::with_capacity(rows),
            udot: Vec::with_capacity(rows),
        };
        for row in values.chunks_exact(row_len.max(1)).take(rows) {
            dump.times.push(row[0]);
            dump.u.push(row[1..1 + n].to_vec());
            dump.udot.push(row[1 + n..].to_vec());
        }
        Ok(dump)
    }
}
