//! Eigenvalue location by exact propagation through piecewise-constant
//! cell averages of the potential, with Prüfer-angle rotation counting.
//!
//! On each cell the potential is replaced by its mean, so the solution is a
//! trigonometric or hyperbolic function known in closed form. The Prüfer
//! angle `θ(b; z)` of the solution anchored at `a` is then available for any
//! `z` with one pass over the cells, counts zeros exactly, and is strictly
//! increasing in `z`; the k-th eigenvalue is the unique root of
//! `θ(b; z) = kπ`. The eigenvalue error of the averaged problem is O(h²)
//! uniformly in k, which is what keeps thousands of eigenvalues usable on a
//! fixed mesh.

use std::f64::consts::PI;

use super::problem::DirichletProblem;
use crate::error::{Error, Result};
use crate::numeric::brent;

/// Cell averages of `V + shift` on a uniform mesh.
#[derive(Debug, Clone)]
pub struct CellMesh {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub averages: Vec<f64>,
    pub v_min: f64,
    pub v_max: f64,
}

/// Result of one shooting pass at fixed `z`.
#[derive(Debug, Clone, Copy)]
pub struct Shot {
    /// Prüfer angle at `b` (zero count times π plus the fractional angle).
    pub theta: f64,
    /// Number of zeros of the solution in `(a, b]`.
    pub zeros: u64,
    /// `theta − π · zeros`, kept separately so it does not lose digits.
    pub frac: f64,
    /// `|ψ_a(z, b)|` relative to the largest local amplitude
    /// `sqrt(ψ² + ψ'²/|z − V|)` seen at the mesh nodes.
    pub end_residual: f64,
}

impl CellMesh {
    pub fn new(problem: &DirichletProblem, cells: usize) -> Self {
        let cells = cells.max(1);
        let (a, b) = (problem.a, problem.b);
        let h = (b - a) / cells as f64;
        let averages: Vec<f64> = (0..cells)
            .map(|i| {
                let x0 = a + h * i as f64;
                let x1 = if i + 1 == cells { b } else { a + h * (i + 1) as f64 };
                problem.cell_average(x0, x1)
            })
            .collect();
        let v_min = averages.iter().copied().fold(f64::INFINITY, f64::min);
        let v_max = averages.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { a, b, h, averages, v_min, v_max }
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Shoots the solution with `ψ(a) = 0, ψ'(a) = 1` across the mesh.
    pub fn shoot(&self, z: f64) -> Shot {
        let h = self.h;
        let (mut u, mut p) = (0.0f64, 1.0f64);
        let mut zeros: u64 = 0;
        // running max amplitude in the current scaling units
        let mut max_u: f64 = 0.0;
        for &v in &self.averages {
            let w2 = z - v;
            let amp = if w2 != 0.0 { u.hypot(p / w2.abs().sqrt()) } else { u.abs() };
            max_u = max_u.max(amp);
            if w2 > 0.0 {
                let w = w2.sqrt();
                let wh = w * h;
                if wh < PI {
                    // at most one zero inside the cell
                    let (s, c) = wh.sin_cos();
                    let u1 = u * c + p * s / w;
                    let p1 = -u * w * s + p * c;
                    if u1 == 0.0 || (u != 0.0 && u1.signum() != u.signum()) {
                        zeros += 1;
                    }
                    u = u1;
                    p = p1;
                } else {
                    let phi0 = (w * u).atan2(p);
                    let r = (w * u).hypot(p);
                    let phi1 = phi0 + wh;
                    zeros += ((phi1 / PI).floor() - (phi0 / PI).floor()) as u64;
                    let (s, c) = phi1.sin_cos();
                    u = r * s / w;
                    p = r * c;
                }
            } else if w2 < 0.0 {
                let k = (-w2).sqrt();
                let kh = k * h;
                let t = kh.tanh();
                // both components divided by cosh(kh)
                let u1 = u + p * t / k;
                let p1 = u * k * t + p;
                if u != 0.0 && (u1 == 0.0 || u1.signum() != u.signum()) {
                    zeros += 1;
                }
                u = u1;
                p = p1;
                max_u /= if kh > 350.0 { f64::INFINITY } else { kh.cosh() };
            } else {
                let u1 = u + p * h;
                if u != 0.0 && (u1 == 0.0 || u1.signum() != u.signum()) {
                    zeros += 1;
                }
                u = u1;
            }
            let m = u.abs().max(p.abs());
            if !(1e-150..=1e150).contains(&m) {
                u /= m;
                p /= m;
                max_u /= m;
            }
        }
        let sign = if zeros.is_multiple_of(2) { 1.0 } else { -1.0 };
        let frac = (sign * u).atan2(sign * p);
        let end_residual = if max_u > 0.0 { u.abs() / max_u } else { 0.0 };
        Shot { theta: PI * zeros as f64 + frac, zeros, frac, end_residual }
    }

    /// Number of eigenvalues strictly below `z`.
    pub fn count_below(&self, z: f64) -> usize {
        let th = self.shoot(z).theta;
        let n = (th / PI).floor();
        // θ = nπ exactly means z is itself the n-th eigenvalue
        if th == n * PI && n > 0.0 {
            n as usize - 1
        } else {
            n.max(0.0) as usize
        }
    }
}

/// A located eigenvalue with its solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocatedEigenvalue {
    pub index: usize,
    pub value: f64,
    pub iterations: usize,
    pub bracket_width: f64,
    pub residual: f64,
}

/// The k-th (1-based) eigenvalue of the averaged problem on `mesh`.
///
/// Sturm comparison with the constant potentials `v_min` and `v_max` gives
/// the certified bracket `[(kπ/L)² + v_min, (kπ/L)² + v_max]`, which is then
/// refined by Brent's method on `θ(b; z) − kπ` to machine precision.
pub fn locate_eigenvalue(mesh: &CellMesh, k: usize, tol_eig: f64) -> Result<LocatedEigenvalue> {
    assert!(k >= 1, "eigenvalue indices are 1-based");
    let free = (k as f64 * PI / mesh.length()).powi(2);
    let pad = 1e-9 * free.abs().max(1.0) + 1e-9 * (mesh.v_max - mesh.v_min).abs();
    let mut lo = free + mesh.v_min - pad;
    let mut hi = free + mesh.v_max + pad;
    // θ − kπ formed from the zero surplus and the fractional angle, which
    // keeps full relative precision near the root even for large k
    let f = |z: f64| {
        let s = mesh.shoot(z);
        (s.zeros as f64 - k as f64) * PI + s.frac
    };
    // The bracket is certified for the exact averaged problem; roundoff in θ
    // can only matter when the bracket is degenerate, so widen if needed.
    let mut widen = 0;
    while !(f(lo) < 0.0 && f(hi) > 0.0) {
        widen += 1;
        if widen > 60 {
            return Err(Error::EigenConvergence { index: k, lo, hi });
        }
        let w = (hi - lo).max(1e-12 * free.max(1.0));
        if f(lo) >= 0.0 {
            lo -= w;
        }
        if f(hi) <= 0.0 {
            hi += w;
        }
    }
    let root = brent(f, lo, hi, 0.0, 200).ok_or(Error::EigenConvergence { index: k, lo, hi })?;
    let shot = mesh.shoot(root.x);
    let residual = shot.end_residual;
    if residual > tol_eig {
        return Err(Error::EigenConvergence { index: k, lo: root.bracket.0, hi: root.bracket.1 });
    }
    Ok(LocatedEigenvalue {
        index: k,
        value: root.x,
        iterations: root.iterations,
        bracket_width: root.bracket.1 - root.bracket.0,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl_engine::potential::Potential;

    #[test]
    fn free_eigenvalues_are_exact() {
        let p = DirichletProblem::free(0.0, PI).unwrap();
        let mesh = CellMesh::new(&p, 512);
        for k in 1..=20 {
            let e = locate_eigenvalue(&mesh, k, 1e-10).unwrap();
            let exact = (k * k) as f64;
            assert!((e.value - exact).abs() <= 1e-12 * exact, "k = {k}: {}", e.value);
        }
    }

    #[test]
    fn theta_is_monotone_and_counts() {
        let p = DirichletProblem::new(0.0, 1.0, Potential::Constant { value: -50.0 }).unwrap();
        let mesh = CellMesh::new(&p, 256);
        let mut last = f64::NEG_INFINITY;
        for i in 0..400 {
            let z = -200.0 + i as f64 * 3.0;
            let th = mesh.shoot(z).theta;
            assert!(th > last);
            last = th;
        }
        // eigenvalues are π²k² − 50 ≈ −40.1, −10.5, 38.8
        assert_eq!(mesh.count_below(0.0), 2);
        assert_eq!(mesh.count_below(-20.0), 1);
        assert_eq!(mesh.count_below(-60.0), 0);
    }

    #[test]
    fn high_index_with_large_phase_steps() {
        // few cells so that ωh exceeds π and the phase branch is exercised
        let p = DirichletProblem::free(0.0, 1.0).unwrap();
        let mesh = CellMesh::new(&p, 8);
        let e = locate_eigenvalue(&mesh, 40, 1e-10).unwrap();
        let exact = (40.0 * PI).powi(2);
        assert!((e.value - exact).abs() <= 1e-12 * exact);
    }
}
