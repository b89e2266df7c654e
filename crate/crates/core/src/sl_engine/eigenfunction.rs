//! Direct eigenfunctions: the oracle against which reconstructed values of
//! `e_k(x0)²` are judged.

use std::f64::consts::PI;

use super::ode::{integrate_solution, propagate, rk4_step, Anchor, SolutionTrace};
use super::problem::DirichletProblem;
use super::spectrum::{dirichlet_eigenvalue, SolverOptions};
use crate::error::{Error, Result};
use crate::numeric::{brent, simpson};

/// L²-normalized eigenfunction `e_k = norm_factor · ψ_a(λ_k, ·)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenfunction {
    pub k: usize,
    pub lambda: f64,
    pub trace: SolutionTrace,
    pub norm_factor: f64,
}

impl Eigenfunction {
    /// Normalized value at grid node `i`.
    pub fn node_value(&self, i: usize) -> f64 {
        self.norm_factor * self.trace.value(i)
    }

    pub fn node_values(&self) -> Vec<f64> {
        (0..self.trace.len()).map(|i| self.node_value(i)).collect()
    }

    /// Value at an arbitrary `x`, by one RK4 step from the nearest node.
    pub fn value_at(&self, problem: &DirichletProblem, x: f64) -> Result<f64> {
        problem.check_point(x)?;
        let g = &self.trace.grid;
        let h = self.trace.step();
        let i = (((x - g[0]) / h).round() as usize).min(g.len() - 1);
        let s = self.trace.state(i);
        let dx = x - g[i];
        if dx == 0.0 {
            return Ok(self.node_value(i));
        }
        let (u, _) = rk4_step(problem, self.lambda, g[i], (s.u, s.du), dx);
        Ok(self.norm_factor * u * s.log_scale.exp())
    }

    /// `∫ e_k² dx` by composite Simpson on the trace grid.
    pub fn norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.node_values().iter().map(|v| v * v).collect();
        simpson(&sq, self.trace.step())
    }

    /// Largest interior `|−e'' + (V − λ) e|` with `e''` the central second
    /// difference, relative to `max(1, |λ|) · max|e|`.
    pub fn equation_residual(&self, problem: &DirichletProblem) -> f64 {
        let v = self.node_values();
        let h = self.trace.step();
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) * self.lambda.abs().max(1.0);
        let mut worst = 0.0f64;
        for i in 1..v.len() - 1 {
            let d2 = (v[i - 1] - 2.0 * v[i] + v[i + 1]) / (h * h);
            let r = -d2 + (problem.v(self.trace.grid[i]) - self.lambda) * v[i];
            worst = worst.max(r.abs());
        }
        worst / scale
    }
}

fn end_angle(problem: &DirichletProblem, z: f64, grid_size: usize) -> Result<f64> {
    let h = problem.length() / grid_size as f64;
    let s = propagate(problem, z, super::ode::ScaledState::anchored(), problem.a, problem.b, h)?;
    Ok(s.u / s.u.hypot(s.du))
}

fn interior_sign_changes(values: &[f64]) -> usize {
    let n = values.len();
    let mut count = 0;
    let mut last = 0.0f64;
    for &v in &values[1..n - 1] {
        if v != 0.0 {
            if last != 0.0 && (v > 0.0) != (last > 0.0) {
                count += 1;
            }
            last = v;
        }
    }
    count
}

/// The k-th normalized eigenfunction on a grid of `grid_size` intervals.
///
/// The eigenvalue is first located by rotation counting, then re-solved by
/// RK4 shooting on `ψ_a(z, b)` so that the trace is an exact discrete
/// eigenfunction of the same integrator. The zero count is checked against
/// `k − 1`.
pub fn eigenfunction_direct(problem: &DirichletProblem, k: usize, grid_size: usize) -> Result<Eigenfunction> {
    if k == 0 {
        return Err(Error::Index { index: 0, len: 0 });
    }
    let opts = SolverOptions { grid_size: grid_size.max(super::spectrum::MIN_CELLS), ..Default::default() };
    let guess = dirichlet_eigenvalue(problem, k, &opts)?;
    let free_gap = (PI / problem.length()).powi(2) * (2 * k + 1) as f64;
    let mut delta = 1e-6 * guess.abs().max(1.0);
    let cap = 0.25 * free_gap;
    let f = |z: f64| end_angle(problem, z, grid_size).unwrap_or(f64::NAN);
    let (mut lo, mut hi) = (guess - delta, guess + delta);
    while f(lo) * f(hi) > 0.0 || (f(lo) * f(hi)).is_nan() {
        delta *= 4.0;
        if delta > cap {
            return Err(Error::EigenConvergence { index: k, lo, hi });
        }
        lo = guess - delta;
        hi = guess + delta;
    }
    let lambda = brent(f, lo, hi, 0.0, 200).ok_or(Error::EigenConvergence { index: k, lo, hi })?.x;

    let trace = integrate_solution(problem, lambda, Anchor::A, grid_size)?;
    let raw: Vec<f64> = (0..trace.len()).map(|i| trace.value(i)).collect();
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow { z: lambda });
    }
    let zeros = interior_sign_changes(&raw);
    if zeros != k - 1 {
        return Err(Error::Domain(format!("eigenfunction {k} has {zeros} interior zeros, expected {}", k - 1)));
    }
    let sq: Vec<f64> = raw.iter().map(|v| v * v).collect();
    let norm_factor = 1.0 / simpson(&sq, trace.step()).sqrt();
    Ok(Eigenfunction { k, lambda, trace, norm_factor })
}

/// `sqrt(2/(b−a)) sin(kπ(x−a)/(b−a))`.
pub fn free_eigenfunction(a: f64, b: f64, k: usize, x: f64) -> f64 {
    let l = b - a;
    (2.0 / l).sqrt() * (k as f64 * PI * (x - a) / l).sin()
}
