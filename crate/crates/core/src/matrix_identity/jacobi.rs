//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use num_complex::Complex64;

use super::{SpectralDecomposition, SymmetricMatrix};
use crate::error::{Error, Result};

/// Sweep budget of the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 60;

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Each rotation first removes the phase of `a_pq` with a diagonal unitary
/// and then applies the classical real plane rotation, so real symmetric
/// input never leaves the real axis. Pivots are visited in row-major order
/// (p < q), which makes the output a deterministic function of the input.
/// Eigenvalues are returned ascending; each eigenvector is scaled so that
/// its largest component is real and positive.
pub fn hermitian_eigensolve(a: &SymmetricMatrix) -> Result<SpectralDecomposition> {
    let n = a.n();
    let mut m: Vec<Complex64> = a.entries().to_vec();
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let norm = a.frobenius_norm();
    let target = f64::EPSILON * norm;

    let off = |m: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    s += m[p * n + q].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off(&m) <= target;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, n, p, q);
            }
        }
        converged = off(&m) <= target;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps, residual: off(&m) });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].re.total_cmp(&m[j * n + j].re).then(i.cmp(&j)));

    let eigenvalues = order.iter().map(|&i| m[i * n + i].re).collect();
    let eigenvectors = order
        .iter()
        .map(|&col| {
            let mut vec: Vec<Complex64> = (0..n).map(|row| v[row * n + col]).collect();
            fix_phase(&mut vec);
            vec
        })
        .collect();
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

fn rotate(m: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = m[p * n + q];
    let r = apq.norm();
    if r == 0.0 || !r.is_finite() {
        return;
    }
    let app = m[p * n + p].re;
    let aqq = m[q * n + q].re;
    // Rotation too small to change either diagonal entry in floating point.
    if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        m[p * n + q] = Complex64::new(0.0, 0.0);
        m[q * n + p] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = apq / r; // e^{i phi}
    let theta = (aqq - app) / (2.0 * r);
    let t =
        if theta.abs() > 1e150 { 0.5 / theta } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let em = phase.conj(); // e^{-i phi}
    let ep = phase;

    // A <- A W, V <- V W
    for i in 0..n {
        let aip = m[i * n + p];
        let aiq = m[i * n + q];
        m[i * n + p] = aip * c - em * aiq * s;
        m[i * n + q] = aip * s + em * aiq * c;
        let vip = v[i * n + p];
        let viq = v[i * n + q];
        v[i * n + p] = vip * c - em * viq * s;
        v[i * n + q] = vip * s + em * viq * c;
    }
    // A <- W^H A
    for j in 0..n {
        let apj = m[p * n + j];
        let aqj = m[q * n + j];
        m[p * n + j] = apj * c - ep * aqj * s;
        m[q * n + j] = apj * s + ep * aqj * c;
    }
    m[p * n + q] = Complex64::new(0.0, 0.0);
    m[q * n + p] = Complex64::new(0.0, 0.0);
    m[p * n + p] = Complex64::new(m[p * n + p].re, 0.0);
    m[q * n + q] = Complex64::new(m[q * n + q].re, 0.0);
}

fn fix_phase(vec: &mut [Complex64]) {
    let mut best = 0;
    for (i, z) in vec.iter().enumerate() {
        if z.norm() > vec[best].norm() * (1.0 + 1e-12) {
            best = i;
        }
    }
    let lead = vec[best];
    if lead.norm() == 0.0 {
        return;
    }
    let rot = lead.conj() / lead.norm();
    for z in vec.iter_mut() {
        *z *= rot;
    }
    vec[best] = Complex64::new(vec[best].re, 0.0);
}
