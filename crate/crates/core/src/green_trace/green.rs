//! `G(z, x, x') = ψ_a(z, x_<) ψ_b(z, x_>) / W(ψ_b, ψ_a)` for real `z` off
//! the spectrum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sl_engine::ode::{propagate, ScaledState};
use crate::sl_engine::pruess::{locate_eigenvalue, CellMesh};
use crate::sl_engine::spectrum::SolverOptions;
use crate::sl_engine::DirichletProblem;

/// `z` must stay this fraction of the local eigenvalue gap away from poles.
pub const POLE_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenEvaluation {
    pub z: f64,
    pub x: f64,
    pub x_prime: f64,
    pub value: f64,
    /// `W(ψ_b, ψ_a)`; infinite when the solutions outgrow `f64`.
    pub wronskian: f64,
    pub pole_distance: f64,
}

/// Distance from `z` to the nearest eigenvalue and that eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleInfo {
    pub distance: f64,
    pub nearest: f64,
    pub tol_pole: f64,
}

/// Locates the eigenvalues on either side of `z` and rejects `z` within
/// `tol_pole = 1e-6 · gap` of either.
pub fn pole_check(problem: &DirichletProblem, z: f64, opts: &SolverOptions) -> Result<PoleInfo> {
    let mesh = CellMesh::new(problem, opts.grid_size);
    let n = mesh.count_below(z);
    let above = locate_eigenvalue(&mesh, n + 1, opts.tol_eig)?.value;
    let (nearest, gap) = if n >= 1 {
        let below = locate_eigenvalue(&mesh, n, opts.tol_eig)?.value;
        let nearest = if z - below < above - z { below } else { above };
        (nearest, above - below)
    } else {
        let next = locate_eigenvalue(&mesh, 2, opts.tol_eig)?.value;
        (above, next - above)
    };
    let distance = (z - nearest).abs();
    let tol_pole = POLE_FRACTION * gap;
    if distance <= tol_pole {
        return Err(Error::PoleProximity { z, eigenvalue: nearest, distance });
    }
    Ok(PoleInfo { distance, nearest, tol_pole })
}

/// Green's function value and Wronskian without the pole check.
pub fn green_unchecked(
    problem: &DirichletProblem,
    z: f64,
    x: f64,
    x_prime: f64,
    grid_size: usize,
) -> Result<(f64, f64)> {
    problem.check_point(x)?;
    problem.check_point(x_prime)?;
    if !z.is_finite() {
        return Err(Error::Domain("z must be finite".into()));
    }
    let (lo, hi) = if x <= x_prime { (x, x_prime) } else { (x_prime, x) };
    let h = problem.length() / grid_size.max(1) as f64;
    let sa = propagate(problem, z, ScaledState::anchored(), problem.a, lo, h)?;
    let sb_hi = propagate(problem, z, ScaledState::anchored(), problem.b, hi, h)?;
    let sb_lo = propagate(problem, z, sb_hi, hi, lo, h)?;
    // W(ψ_b, ψ_a) at lo, in mantissa form
    let m = sb_lo.u * sa.du - sb_lo.du * sa.u;
    if m == 0.0 {
        return Err(Error::PoleProximity { z, eigenvalue: z, distance: 0.0 });
    }
    let wronskian = m * (sa.log_scale + sb_lo.log_scale).exp();
    let value = sa.u * sb_hi.u * (sb_hi.log_scale - sb_lo.log_scale).exp() / m;
    if !value.is_finite() {
        return Err(Error::Overflow { z });
    }
    Ok((value, wronskian))
}

pub fn green_offdiag(problem: &DirichletProblem, z: f64, x: f64, x_prime: f64) -> Result<GreenEvaluation> {
    green_offdiag_with(problem, z, x, x_prime, &SolverOptions::default())
}

pub fn green_offdiag_with(
    problem: &DirichletProblem,
    z: f64,
    x: f64,
    x_prime: f64,
    opts: &SolverOptions,
) -> Result<GreenEvaluation> {
    problem.validate()?;
    let pole = pole_check(problem, z, opts)?;
    let (value, wronskian) = green_unchecked(problem, z, x, x_prime, opts.grid_size)?;
    Ok(GreenEvaluation { z, x, x_prime, value, wronskian, pole_distance: pole.distance })
}

pub fn green_diag(problem: &DirichletProblem, z: f64, x0: f64) -> Result<GreenEvaluation> {
    green_offdiag(problem, z, x0, x0)
}

pub fn green_diag_with(problem: &DirichletProblem, z: f64, x0: f64, opts: &SolverOptions) -> Result<GreenEvaluation> {
    green_offdiag_with(problem, z, x0, x0, opts)
}

/// Green's function of the split operator: the half-interval kernel when
/// `x` and `x'` lie on the same side of `x0`, zero otherwise.
pub fn split_green_unchecked(
    problem: &DirichletProblem,
    x0: f64,
    z: f64,
    x: f64,
    x_prime: f64,
    grid_size: usize,
) -> Result<f64> {
    problem.check_split_point(x0)?;
    problem.check_point(x)?;
    problem.check_point(x_prime)?;
    let cells = |len: f64| ((grid_size as f64 * len / problem.length()).round() as usize).max(64);
    if x <= x0 && x_prime <= x0 {
        let left = problem.restrict(problem.a, x0)?;
        Ok(green_unchecked(&left, z, x, x_prime, cells(x0 - problem.a))?.0)
    } else if x >= x0 && x_prime >= x0 {
        let right = problem.restrict(x0, problem.b)?;
        Ok(green_unchecked(&right, z, x, x_prime, cells(problem.b - x0))?.0)
    } else {
        Ok(0.0)
    }
}

/// Closed-form free Green's function on `[a, b]`.
pub fn free_green(a: f64, b: f64, z: f64, x: f64, x_prime: f64) -> f64 {
    let (lo, hi) = if x <= x_prime { (x, x_prime) } else { (x_prime, x) };
    if z < 0.0 {
        let k = (-z).sqrt();
        // sinh(k p) sinh(k q) / (k sinh(k L)) in overflow-free form
        let (p, q, l) = (lo - a, b - hi, b - a);
        let e = |t: f64| -(-2.0 * k * t).exp_m1();
        0.5 * (k * (p + q - l)).exp() * e(p) * e(q) / (k * e(l))
    } else if z > 0.0 {
        let k = z.sqrt();
        (k * (lo - a)).sin() * (k * (b - hi)).sin() / (k * (k * (b - a)).sin())
    } else {
        (lo - a) * (b - hi) / (b - a)
    }
}

pub fn free_green_diag(a: f64, b: f64, z: f64, x0: f64) -> f64 {
    free_green(a, b, z, x0, x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_negative_z_value() {
        let p = DirichletProblem::free(0.0, PI).unwrap();
        let g = green_diag(&p, -1.0, PI / 2.0).unwrap();
        let exact = (PI / 2.0).sinh().powi(2) / PI.sinh();
        assert!((g.value - exact).abs() < 1e-10);
        assert!((exact - 0.458_576_167_833_637).abs() < 1e-14);
        assert!((free_green_diag(0.0, PI, -1.0, PI / 2.0) - exact).abs() < 1e-14);
    }

    #[test]
    fn boundary_and_symmetry() {
        let p = DirichletProblem::free(0.0, 1.0).unwrap();
        assert_eq!(green_offdiag(&p, 3.0, 0.0, 0.4).unwrap().value, 0.0);
        assert!(green_offdiag(&p, 3.0, 0.4, 1.0).unwrap().value.abs() < 1e-15);
        let q = DirichletProblem::new(0.0, 1.0, crate::sl_engine::Potential::cos_2pi()).unwrap();
        let g1 = green_offdiag(&q, 5.0, 0.2, 0.7).unwrap().value;
        let g2 = green_offdiag(&q, 5.0, 0.7, 0.2).unwrap().value;
        assert!((g1 - g2).abs() < 1e-12);
    }

    #[test]
    fn midpoint_at_zero_and_asymptotics() {
        let p = DirichletProblem::free(0.0, 1.0).unwrap();
        assert!((green_diag(&p, 0.0, 0.5).unwrap().value - 0.25).abs() < 1e-12);
        let g = green_diag(&p, -1e6, 0.5).unwrap().value;
        // |z|^{1/2} G → 1/2
        assert!((1e3 * g - 0.5).abs() < 0.01 * 0.5);
    }

    #[test]
    fn pole_is_rejected() {
        let p = DirichletProblem::free(0.0, 1.0).unwrap();
        let l1 = PI * PI;
        match green_diag(&p, l1 * (1.0 + 1e-9), 0.3) {
            Err(Error::PoleProximity { eigenvalue, .. }) => assert!((eigenvalue - l1).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn positive_z_closed_form() {
        let p = DirichletProblem::free(0.0, 1.0).unwrap();
        let g = green_offdiag(&p, 20.0, 0.3, 0.8).unwrap();
        assert!((g.value - free_green(0.0, 1.0, 20.0, 0.3, 0.8)).abs() < 1e-10);
        // ψ_b(x) = −sin(k(b − x))/k, so W(ψ_b, ψ_a) = ψ_b(a) = −sin(kL)/k
        let k = 20f64.sqrt();
        assert!((g.wronskian + k.sin() / k).abs() < 1e-10);
    }
}
