//! Fixed-step RK4 integration of `ψ'' = (V − z) ψ` from a Dirichlet endpoint.

use serde::{Deserialize, Serialize};

use super::problem::DirichletProblem;
use crate::error::{Error, Result};

/// Integration switches to scaled (log-carried) form above this value of
/// `sqrt(|z|) (b − a)` for negative `z`.
pub const SCALED_THRESHOLD: f64 = 30.0;
pub const MIN_GRID: usize = 64;

/// Endpoint carrying `ψ = 0, ψ' = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anchor {
    A,
    B,
}

/// `(ψ, ψ')` at one point, stored as mantissas times `exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledState {
    pub u: f64,
    pub du: f64,
    pub log_scale: f64,
}

impl ScaledState {
    pub fn anchored() -> Self {
        Self { u: 0.0, du: 1.0, log_scale: 0.0 }
    }

    pub fn value(&self) -> f64 {
        self.u * self.log_scale.exp()
    }

    pub fn derivative(&self) -> f64 {
        self.du * self.log_scale.exp()
    }

    fn renormalize(&mut self) {
        let m = self.u.abs().max(self.du.abs());
        if m > 0.0 && m.is_finite() {
            self.u /= m;
            self.du /= m;
            self.log_scale += m.ln();
        }
    }
}

fn rhs(problem: &DirichletProblem, z: f64, x: f64, u: f64, du: f64) -> (f64, f64) {
    (du, (problem.v(x) - z) * u)
}

fn rk4_plain(problem: &DirichletProblem, z: f64, x: f64, y: (f64, f64), h: f64) -> (f64, f64) {
    let (k1u, k1p) = rhs(problem, z, x, y.0, y.1);
    let (k2u, k2p) = rhs(problem, z, x + 0.5 * h, y.0 + 0.5 * h * k1u, y.1 + 0.5 * h * k1p);
    let (k3u, k3p) = rhs(problem, z, x + 0.5 * h, y.0 + 0.5 * h * k2u, y.1 + 0.5 * h * k2p);
    let (k4u, k4p) = rhs(problem, z, x + h, y.0 + h * k3u, y.1 + h * k3p);
    (y.0 + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u), y.1 + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p))
}

/// One RK4 step of signed length `h`, split at potential kinks so the
/// integrand stays smooth on every sub-step.
pub fn rk4_step(problem: &DirichletProblem, z: f64, x: f64, y: (f64, f64), h: f64) -> (f64, f64) {
    let (lo, hi) = if h >= 0.0 { (x, x + h) } else { (x + h, x) };
    let mut kinks = problem.potential.kinks_in(lo, hi);
    if kinks.is_empty() {
        return rk4_plain(problem, z, x, y, h);
    }
    if h < 0.0 {
        kinks.reverse();
    }
    let mut pos = x;
    let mut state = y;
    for k in kinks.into_iter().chain(std::iter::once(x + h)) {
        state = rk4_plain(problem, z, pos, state, k - pos);
        pos = k;
    }
    state
}

fn needs_scaling(problem: &DirichletProblem, z: f64) -> bool {
    z < 0.0 && (-z).sqrt() * problem.length() > SCALED_THRESHOLD
}

/// Advances `state` from `from` to `to` with at most `max_step` per step.
pub fn propagate(
    problem: &DirichletProblem,
    z: f64,
    state: ScaledState,
    from: f64,
    to: f64,
    max_step: f64,
) -> Result<ScaledState> {
    let dist = to - from;
    if dist == 0.0 {
        return Ok(state);
    }
    let n = (dist.abs() / max_step).ceil().max(1.0) as usize;
    let h = dist / n as f64;
    let scaled = needs_scaling(problem, z);
    let mut s = state;
    for i in 0..n {
        let x = from + h * i as f64;
        let (u, du) = rk4_step(problem, z, x, (s.u, s.du), h);
        s.u = u;
        s.du = du;
        if scaled {
            s.renormalize();
        }
        if !(s.u.is_finite() && s.du.is_finite()) {
            return Err(Error::Overflow { z });
        }
    }
    Ok(s)
}

/// State of the solution anchored at `anchor`, evaluated at `x`.
pub fn solve_at(problem: &DirichletProblem, z: f64, anchor: Anchor, x: f64, grid_size: usize) -> Result<ScaledState> {
    let max_step = problem.length() / grid_size.max(1) as f64;
    let start = match anchor {
        Anchor::A => problem.a,
        Anchor::B => problem.b,
    };
    propagate(problem, z, ScaledState::anchored(), start, x, max_step)
}

/// A boundary-anchored solution sampled on the uniform grid of `[a, b]`.
///
/// Samples are stored in ascending `x` order whichever end is the anchor.
/// For strongly negative `z` each sample carries its own `log_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrace {
    pub z: f64,
    pub anchor: Anchor,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
    pub log_scale: Vec<f64>,
}

impl SolutionTrace {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    pub fn state(&self, i: usize) -> ScaledState {
        ScaledState { u: self.values[i], du: self.derivatives[i], log_scale: self.log_scale[i] }
    }

    pub fn value(&self, i: usize) -> f64 {
        self.state(i).value()
    }

    pub fn derivative(&self, i: usize) -> f64 {
        self.state(i).derivative()
    }

    pub fn is_scaled(&self) -> bool {
        self.log_scale.iter().any(|&s| s != 0.0)
    }

    fn compatible(&self, other: &SolutionTrace) -> Result<()> {
        if self.z != other.z {
            return Err(Error::Incompatible(format!("z = {} vs z = {}", self.z, other.z)));
        }
        if self.grid.len() != other.grid.len()
            || self.grid.first() != other.grid.first()
            || self.grid.last() != other.grid.last()
        {
            return Err(Error::Incompatible("traces live on different grids".into()));
        }
        Ok(())
    }
}

/// Samples the solution with `ψ(anchor) = 0, ψ'(anchor) = 1` on a grid of
/// `grid_size` intervals, integrating away from the anchor.
pub fn integrate_solution(
    problem: &DirichletProblem,
    z: f64,
    anchor: Anchor,
    grid_size: usize,
) -> Result<SolutionTrace> {
    if grid_size < MIN_GRID {
        return Err(Error::Domain(format!("grid_size must be at least {MIN_GRID}, got {grid_size}")));
    }
    if !z.is_finite() {
        return Err(Error::Domain("z must be finite".into()));
    }
    let n = grid_size;
    let h = problem.length() / n as f64;
    let grid: Vec<f64> = (0..=n).map(|i| if i == n { problem.b } else { problem.a + h * i as f64 }).collect();
    let scaled = needs_scaling(problem, z);
    let mut values = vec![0.0; n + 1];
    let mut derivatives = vec![0.0; n + 1];
    let mut log_scale = vec![0.0; n + 1];

    let order: Vec<usize> = match anchor {
        Anchor::A => (0..=n).collect(),
        Anchor::B => (0..=n).rev().collect(),
    };
    let mut s = ScaledState::anchored();
    let first = order[0];
    values[first] = s.u;
    derivatives[first] = s.du;
    for w in order.windows(2) {
        let (i, j) = (w[0], w[1]);
        let (u, du) = rk4_step(problem, z, grid[i], (s.u, s.du), grid[j] - grid[i]);
        s.u = u;
        s.du = du;
        if scaled {
            s.renormalize();
        }
        if !(s.u.is_finite() && s.du.is_finite()) {
            return Err(Error::Overflow { z });
        }
        values[j] = s.u;
        derivatives[j] = s.du;
        log_scale[j] = s.log_scale;
    }
    Ok(SolutionTrace { z, anchor, grid, values, derivatives, log_scale })
}

/// `f g' − f' g` at grid index `i`.
pub fn wronskian(f: &SolutionTrace, g: &SolutionTrace, i: usize) -> Result<f64> {
    f.compatible(g)?;
    if i >= f.len() {
        return Err(Error::Index { index: i, len: f.len() });
    }
    let m = f.values[i] * g.derivatives[i] - f.derivatives[i] * g.values[i];
    Ok(m * (f.log_scale[i] + g.log_scale[i]).exp())
}

/// `max_x W − min_x W` over the grid.
pub fn wronskian_spread(f: &SolutionTrace, g: &SolutionTrace) -> Result<f64> {
    f.compatible(g)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..f.len() {
        let w = wronskian(f, g, i)?;
        lo = lo.min(w);
        hi = hi.max(w);
    }
    Ok(hi - lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl_engine::potential::Potential;
    use std::f64::consts::PI;

    #[test]
    fn sine_solution() {
        let p = DirichletProblem::free(0.0, PI).unwrap();
        let t = integrate_solution(&p, 1.0, Anchor::A, 1024).unwrap();
        for i in 0..t.len() {
            assert!((t.value(i) - t.grid[i].sin()).abs() < 1e-8);
        }
        assert_eq!(t.values[0], 0.0);
        assert_eq!(t.derivatives[0], 1.0);
    }

    #[test]
    fn hyperbolic_solution_from_right() {
        let p = DirichletProblem::free(0.0, 1.0).unwrap();
        let t = integrate_solution(&p, -1.0, Anchor::B, 256).unwrap();
        for i in 0..t.len() {
            assert!((t.value(i) + (1.0 - t.grid[i]).sinh()).abs() < 1e-10);
        }
        assert_eq!(t.values[256], 0.0);
        assert_eq!(t.derivatives[256], 1.0);
    }

    #[test]
    fn wronskian_properties() {
        let p = DirichletProblem::free(0.0, PI).unwrap();
        let fa = integrate_solution(&p, 1.0, Anchor::A, 1024).unwrap();
        let fb = integrate_solution(&p, 1.0, Anchor::B, 1024).unwrap();
        for i in [0, 100, 1024] {
            assert_eq!(wronskian(&fa, &fa, i).unwrap(), 0.0);
            assert!(wronskian(&fb, &fa, i).unwrap().abs() < 1e-8);
        }
        let ga = integrate_solution(&p, 0.5, Anchor::A, 1024).unwrap();
        let gb = integrate_solution(&p, 0.5, Anchor::B, 1024).unwrap();
        let w = wronskian(&gb, &ga, 0).unwrap();
        assert!(wronskian_spread(&gb, &ga).unwrap() <= 1e-9 * w.abs());
        assert!(matches!(wronskian(&fa, &ga, 0), Err(Error::Incompatible(_))));
    }

    #[test]
    fn scaled_mode_for_very_negative_z() {
        let p = DirichletProblem::free(0.0, 1.0).unwrap();
        let t = integrate_solution(&p, -1e4, Anchor::A, 4096).unwrap();
        assert!(t.is_scaled());
        // log ψ(x) ≈ κ x − ln(2κ) far from the anchor
        let i = 2048;
        let expected = 100.0 * t.grid[i] - (200.0f64).ln();
        let got = t.values[i].abs().ln() + t.log_scale[i];
        assert!((got - expected).abs() < 1e-6, "{got} {expected}");
        // e^{10⁴} is far beyond f64 range without scaling
        let t = integrate_solution(&p, -1e8, Anchor::A, 4096).unwrap();
        assert!(t.values.iter().all(|v| v.is_finite()));
        assert!(t.log_scale[4096] > 9000.0);
    }

    #[test]
    fn small_grid_rejected() {
        let p = DirichletProblem::new(0.0, 1.0, Potential::Zero).unwrap();
        assert!(integrate_solution(&p, 1.0, Anchor::A, 10).is_err());
    }
}
