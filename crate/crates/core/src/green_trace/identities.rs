//! Residuals of the Krein-type resolvent formula and of the trace identity
//! `Σ [1/(μ − z) − 1/(λ − z)] = −d/dz ln G(z, x0, x0)`.

use serde::{Deserialize, Serialize};

use super::green::{green_unchecked, pole_check, split_green_unchecked};
use crate::error::{Error, Result};
use crate::sl_engine::spectrum::{
    dirichlet_eigenvalues_with, split_eigenvalues_with, SolverOptions, Spectrum, SplitSpectrum,
};
use crate::sl_engine::DirichletProblem;

/// Budget factor for the Krein residual: `residual ≤ KREIN_TOL · scale`.
pub const KREIN_TOL: f64 = 1e-8;
/// Smallest truncation accepted by the trace identity.
pub const MIN_TRACE_TRUNCATION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KreinCheck {
    /// Split Green's function from the half-interval solves.
    pub lhs: f64,
    /// `G(x, x') − G(x, x0) G(x0, x') / G(x0, x0)`.
    pub rhs: f64,
    pub residual: f64,
    /// Largest magnitude among the terms being compared.
    pub scale: f64,
}

impl KreinCheck {
    pub fn budget(&self) -> f64 {
        KREIN_TOL * self.scale
    }

    pub fn passes(&self) -> bool {
        self.residual <= self.budget()
    }
}

/// Checks that `z` is off the full spectrum and off both half-interval spectra.
pub fn check_split_poles(problem: &DirichletProblem, x0: f64, z: f64, opts: &SolverOptions) -> Result<()> {
    problem.check_split_point(x0)?;
    pole_check(problem, z, opts)?;
    let cells = |len: f64| ((opts.grid_size as f64 * len / problem.length()).round() as usize).max(64);
    let left = problem.restrict(problem.a, x0)?;
    let right = problem.restrict(x0, problem.b)?;
    pole_check(&left, z, &SolverOptions { grid_size: cells(x0 - problem.a), ..*opts })?;
    pole_check(&right, z, &SolverOptions { grid_size: cells(problem.b - x0), ..*opts })?;
    Ok(())
}

pub fn krein_resolvent_residual(
    problem: &DirichletProblem,
    x0: f64,
    z: f64,
    x: f64,
    x_prime: f64,
) -> Result<KreinCheck> {
    krein_resolvent_residual_with(problem, x0, z, x, x_prime, &SolverOptions::default())
}

pub fn krein_resolvent_residual_with(
    problem: &DirichletProblem,
    x0: f64,
    z: f64,
    x: f64,
    x_prime: f64,
    opts: &SolverOptions,
) -> Result<KreinCheck> {
    problem.validate()?;
    check_split_poles(problem, x0, z, opts)?;
    krein_unchecked(problem, x0, z, x, x_prime, opts.grid_size)
}

/// Krein residual assuming the pole checks already passed.
pub fn krein_unchecked(
    problem: &DirichletProblem,
    x0: f64,
    z: f64,
    x: f64,
    x_prime: f64,
    grid_size: usize,
) -> Result<KreinCheck> {
    let g = |p: f64, q: f64| green_unchecked(problem, z, p, q, grid_size).map(|r| r.0);
    let g00 = g(x0, x0)?;
    let natural = problem.length().min(1.0 / z.abs().sqrt());
    if !g00.is_finite() || g00.abs() <= 1e-12 * natural {
        return Err(Error::DivisionGuard { value: g00 });
    }
    let gxx = g(x, x_prime)?;
    let rank_one = g(x, x0)? * g(x0, x_prime)? / g00;
    let rhs = gxx - rank_one;
    let lhs = split_green_unchecked(problem, x0, z, x, x_prime, grid_size)?;
    let scale = lhs.abs().max(gxx.abs()).max(rank_one.abs());
    Ok(KreinCheck { lhs, rhs, residual: (lhs - rhs).abs(), scale })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceCheck {
    pub z: f64,
    pub truncation: usize,
    /// `Σ_{i≤K} [1/(μ_i − z) − 1/(λ_i − z)]`, multiplicities expanded.
    pub lhs: f64,
    /// `−d/dz ln G(z, x0, x0)` by central differences.
    pub rhs: f64,
    pub residual: f64,
    /// Bound on the omitted terms, `1/(λ_K − z)` (by interlacing).
    pub tail_estimate: f64,
    /// `|D(h) − D(2h)|` for the central difference `D`.
    pub fd_estimate: f64,
}

impl TraceCheck {
    pub fn budget(&self) -> f64 {
        self.tail_estimate + self.fd_estimate
    }

    pub fn passes(&self) -> bool {
        self.residual <= self.budget()
    }
}

/// Truncated left-hand side from precomputed spectra.
pub fn trace_sum(full: &[f64], split_expanded: &[f64], z: f64, k: usize) -> Result<f64> {
    if full.len() < k || split_expanded.len() < k {
        return Err(Error::Window(format!(
            "need {k} entries, have {} full and {} split",
            full.len(),
            split_expanded.len()
        )));
    }
    Ok((0..k).map(|i| 1.0 / (split_expanded[i] - z) - 1.0 / (full[i] - z)).sum())
}

/// `−d/dz ln G(z, x0, x0)` with step `h_z = 1e-4 · max(1, |z|)`, and the
/// difference against the doubled step.
pub fn log_derivative(problem: &DirichletProblem, z: f64, x0: f64, grid_size: usize) -> Result<(f64, f64)> {
    let hz = 1e-4 * z.abs().max(1.0);
    let lg = |t: f64| -> Result<f64> {
        let g = green_unchecked(problem, t, x0, x0, grid_size)?.0;
        if g <= 0.0 {
            return Err(Error::Domain(format!("G({t}, x0, x0) = {g} is not positive")));
        }
        Ok(g.ln())
    };
    let d = |h: f64| -> Result<f64> { Ok(-(lg(z + h)? - lg(z - h)?) / (2.0 * h)) };
    let d1 = d(hz)?;
    let d2 = d(2.0 * hz)?;
    Ok((d1, (d1 - d2).abs()))
}

pub fn trace_identity_residual(problem: &DirichletProblem, x0: f64, z: f64, k: usize) -> Result<TraceCheck> {
    let opts = SolverOptions::default();
    if k < MIN_TRACE_TRUNCATION {
        return Err(Error::TruncationTooSmall(k));
    }
    let full = dirichlet_eigenvalues_with(problem, k, &opts)?;
    let split = split_eigenvalues_with(problem, x0, k, &opts)?;
    trace_identity_from_spectra(problem, x0, z, &full, &split, k, &opts)
}

/// Trace identity at truncation `k` using already computed spectra, which
/// must hold at least `k` entries each (the split one with multiplicity).
pub fn trace_identity_from_spectra(
    problem: &DirichletProblem,
    x0: f64,
    z: f64,
    full: &Spectrum,
    split: &SplitSpectrum,
    k: usize,
    opts: &SolverOptions,
) -> Result<TraceCheck> {
    if k < MIN_TRACE_TRUNCATION {
        return Err(Error::TruncationTooSmall(k));
    }
    problem.check_split_point(x0)?;
    let expanded = split.expanded();
    let floor =
        full.values.first().copied().unwrap_or(f64::INFINITY).min(expanded.first().copied().unwrap_or(f64::INFINITY));
    if z.is_nan() || z >= floor - 1.0 {
        return Err(Error::Domain(format!("z = {z} must lie below both spectra minus 1 (lowest entry {floor})")));
    }
    let lhs = trace_sum(&full.values, &expanded, z, k)?;
    let (rhs, fd_estimate) = log_derivative(problem, z, x0, opts.grid_size)?;
    let tail_estimate = 1.0 / (full.values[k - 1] - z);
    Ok(TraceCheck { z, truncation: k, lhs, rhs, residual: (lhs - rhs).abs(), tail_estimate, fd_estimate })
}
