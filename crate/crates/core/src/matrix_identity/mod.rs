//! The eigenvector/eigenvalue identity for Hermitian matrices.
//!
//! For a Hermitian `A` with eigenpairs `(λ_k, v_k)` and principal minors
//! `M_ℓ` (row and column `ℓ` deleted),
//!
//! ```text
//! |v_{k,ℓ}|² Π_{m≠k} (λ_k − λ_m) = Π_j (λ_k − λ_j(M_ℓ)).
//! ```
//!
//! This module computes both sides independently (the left from a Jacobi
//! eigensolve, the right from minor spectra alone) and checks the resolvent
//! form `det(M_j − z)/det(A − z) = Σ_k |v_{k,j}|²/(λ_k − z)`.
//!
//! All spectral indices in this module are 1-based.

mod jacobi;
mod lu;

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{fmt_f64, SignedLog};

pub use jacobi::{hermitian_eigensolve, MAX_SWEEPS};
pub use lu::determinant;

/// Relative Hermiticity tolerance, measured against the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// A gap `|λ_k − λ_m|` below this fraction of the spectral diameter counts
/// as zero.
pub const GENERICITY_TOL: f64 = 1e-12;
/// Relative tolerance of the identity check on a generic cell.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Components below this are compared in absolute rather than relative terms.
pub const COMPONENT_FLOOR: f64 = 1e-6;
/// Minimum distance of `z` from the spectrum in the resolvent check.
pub const POLE_TOL: f64 = 1e-8;

/// Dense Hermitian matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl SymmetricMatrix {
    /// Builds a matrix from row-major entries, rejecting non-Hermitian input.
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("matrix dimension must be positive".into()));
        }
        if entries.len() != n * n {
            return Err(Error::Shape(format!("expected {} entries, got {}", n * n, entries.len())));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        let max_abs = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut deviation: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                deviation = deviation.max((entries[i * n + j] - entries[j * n + i].conj()).norm());
            }
        }
        if deviation > HERMITIAN_TOL * max_abs {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { n, entries })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_parts(rows, None)
    }

    /// Builds from separate real and (optional) imaginary row arrays.
    pub fn from_parts(real: &[Vec<f64>], imag: Option<&[Vec<f64>]>) -> Result<Self> {
        let n = real.len();
        if real.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("real part is not square".into()));
        }
        if let Some(im) = imag {
            if im.len() != n || im.iter().any(|r| r.len() != n) {
                return Err(Error::Shape("imaginary part does not match the real part".into()));
            }
        }
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let im = imag.map_or(0.0, |im| im[i][j]);
                entries.push(Complex64::new(real[i][j], im));
            }
        }
        Self::new(n, entries)
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, &d) in values.iter().enumerate() {
            entries[i * n + i] = Complex64::new(d, 0.0);
        }
        Self::new(n, entries)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0; n])
    }

    /// Random matrix with entries uniform in [-1, 1] (and imaginary parts
    /// when `complex`), reproducible from `seed`.
    pub fn random(n: usize, seed: u64, complex: bool) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(n, &mut rng, complex)
    }

    pub fn random_with<R: Rng>(n: usize, rng: &mut R, complex: bool) -> Result<Self> {
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in i + 1..n {
                let re = rng.gen_range(-1.0..1.0);
                let im = if complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
                entries[i * n + j] = Complex64::new(re, im);
                entries[j * n + i] = Complex64::new(re, -im);
            }
        }
        Self::new(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `A − zI` as a row-major complex array.
    pub fn shifted(&self, z: Complex64) -> Vec<Complex64> {
        let mut m = self.entries.clone();
        for i in 0..self.n {
            m[i * self.n + i] -= z;
        }
        m
    }
}

/// Parsed form of the matrix input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixInput {
    pub n: usize,
    pub real: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<Vec<f64>>>,
}

impl MatrixInput {
    pub fn to_matrix(&self) -> Result<SymmetricMatrix> {
        if self.real.len() != self.n {
            return Err(Error::Shape(format!("n = {} but {} rows given", self.n, self.real.len())));
        }
        SymmetricMatrix::from_parts(&self.real, self.imag.as_deref())
    }
}

/// Orthonormal eigensystem; `eigenvectors[k]` belongs to `eigenvalues[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<Complex64>>,
}

impl SpectralDecomposition {
    /// `|v_{k,ℓ}|²` with 1-based indices.
    pub fn component_sq(&self, k: usize, ell: usize) -> f64 {
        self.eigenvectors[k - 1][ell - 1].norm_sqr()
    }

    /// Largest `‖A v_k − λ_k v_k‖`.
    pub fn max_residual(&self, a: &SymmetricMatrix) -> f64 {
        let n = a.n();
        let mut worst: f64 = 0.0;
        for (lam, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let mut r2 = 0.0;
            for i in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    s += a.get(i, j) * v[j];
                }
                r2 += (s - v[i] * lam).norm_sqr();
            }
            worst = worst.max(r2.sqrt());
        }
        worst
    }

    /// Largest `|⟨v_j, v_k⟩ − δ_jk|`.
    pub fn max_orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, vj) in self.eigenvectors.iter().enumerate() {
            for (k, vk) in self.eigenvectors.iter().enumerate() {
                let dot: Complex64 = vj.iter().zip(vk).map(|(a, b)| a.conj() * b).sum();
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }
}

/// The `(n−1)×(n−1)` matrix with row and column `j` (1-based) removed.
pub fn principal_minor(a: &SymmetricMatrix, j: usize) -> Result<SymmetricMatrix> {
    let n = a.n();
    if n < 2 {
        return Err(Error::Dimension("a 1x1 matrix has no nonempty principal minor".into()));
    }
    if j == 0 || j > n {
        return Err(Error::Index { index: j, len: n });
    }
    let skip = j - 1;
    let entries = (0..n)
        .filter(|&r| r != skip)
        .flat_map(|r| (0..n).filter(|&c| c != skip).map(move |c| (r, c)))
        .map(|(r, c)| a.get(r, c))
        .collect();
    SymmetricMatrix::new(n - 1, entries)
}

/// Value of `|v_{k,ℓ}|²` predicted from the two spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentSquare {
    /// `None` when the spectrum of `A` is degenerate at `λ_k`.
    pub value: Option<f64>,
    pub generic: bool,
}

/// `Π_j (λ_k(A) − λ_j(M)) / Π_{m≠k} (λ_k(A) − λ_m(A))` for 1-based `k`.
///
/// Both products are accumulated in log-magnitude/sign form. If any gap in
/// the denominator is below `GENERICITY_TOL` times the spectral diameter the
/// identity carries no information and the result is flagged non-generic.
pub fn component_squared_from_spectra(eigs_a: &[f64], eigs_m: &[f64], k: usize) -> Result<ComponentSquare> {
    let n = eigs_a.len();
    if n == 0 || eigs_m.len() + 1 != n {
        return Err(Error::Shape(format!("need |eigs_M| = |eigs_A| - 1, got {} and {}", eigs_m.len(), n)));
    }
    if k == 0 || k > n {
        return Err(Error::Index { index: k, len: n });
    }
    let lk = eigs_a[k - 1];
    let (lo, hi) =
        eigs_a.iter().chain(eigs_m).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let scale = (hi - lo).max(f64::MIN_POSITIVE);

    let mut den = SignedLog::one();
    for (m, &lm) in eigs_a.iter().enumerate() {
        if m + 1 == k {
            continue;
        }
        let gap = lk - lm;
        if gap.abs() <= GENERICITY_TOL * scale {
            return Ok(ComponentSquare { value: None, generic: false });
        }
        den.mul(gap);
    }
    let mut num = SignedLog::one();
    for &mu in eigs_m {
        num.mul(lk - mu);
    }
    num.div_signed(den);
    Ok(ComponentSquare { value: Some(num.value()), generic: true })
}

/// One `(k, ℓ)` cell of the identity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub k: usize,
    pub ell: usize,
    /// `|v_{k,ℓ}|² Π_{m≠k}(λ_k − λ_m)` with the eigensolver's component.
    pub lhs: f64,
    /// `Π_j (λ_k − λ_j(M_ℓ))`.
    pub rhs: f64,
    pub direct_component_sq: f64,
    /// Component predicted from spectra alone (`None` when non-generic).
    pub from_spectra: Option<f64>,
    pub generic: bool,
}

impl IdentityReport {
    pub fn abs_err(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    /// Error of the spectra-only component against the eigensolver value,
    /// relative to `max(|v|², floor)`.
    pub fn component_rel_err(&self, floor: f64) -> Option<f64> {
        self.from_spectra
            .map(|v| (v - self.direct_component_sq).abs() / self.direct_component_sq.abs().max(v.abs()).max(floor))
    }

    /// Non-generic cells always pass; generic cells must satisfy the identity
    /// in product form and in component form, the latter relative to
    /// `max(|v|², COMPONENT_FLOOR)`.
    pub fn passes(&self) -> bool {
        if !self.generic {
            return true;
        }
        let product_ok = self.abs_err() <= IDENTITY_TOL * self.lhs.abs().max(self.rhs.abs()).max(1.0);
        let component_ok = self.component_rel_err(COMPONENT_FLOOR).is_some_and(|e| e <= IDENTITY_TOL);
        product_ok && component_ok
    }
}

/// Evaluates the identity for every `(k, ℓ)`.
pub fn identity_sweep(a: &SymmetricMatrix) -> Result<Vec<IdentityReport>> {
    let n = a.n();
    let dec = hermitian_eigensolve(a)?;
    let minors: Vec<Vec<f64>> = if n == 1 {
        vec![Vec::new()]
    } else {
        (1..=n)
            .map(|ell| principal_minor(a, ell).and_then(|m| hermitian_eigensolve(&m)).map(|d| d.eigenvalues))
            .collect::<Result<_>>()?
    };
    let mut out = Vec::with_capacity(n * n);
    for k in 1..=n {
        let lk = dec.eigenvalues[k - 1];
        let mut gaps = SignedLog::one();
        for (m, &lm) in dec.eigenvalues.iter().enumerate() {
            if m + 1 != k {
                gaps.mul(lk - lm);
            }
        }
        for ell in 1..=n {
            let mu = &minors[ell - 1];
            let cs = component_squared_from_spectra(&dec.eigenvalues, mu, k)?;
            let mut rhs = SignedLog::one();
            for &m in mu {
                rhs.mul(lk - m);
            }
            let direct = dec.component_sq(k, ell);
            out.push(IdentityReport {
                k,
                ell,
                lhs: direct * gaps.value(),
                rhs: rhs.value(),
                direct_component_sq: direct,
                from_spectra: cs.value,
                generic: cs.generic,
            });
        }
    }
    Ok(out)
}

/// Residual of `det(M_j − z)/det(A − z) = Σ_k |v_{k,j}|²/(λ_k − z)`.
///
/// Determinants come from LU with partial pivoting, the sum from the
/// eigensolver, so the two sides share no computation.
pub fn resolvent_diag_ratio_check(a: &SymmetricMatrix, j: usize, z: Complex64) -> Result<f64> {
    let n = a.n();
    let minor = principal_minor(a, j)?;
    let dec = hermitian_eigensolve(a)?;
    for &lam in &dec.eigenvalues {
        let d = (Complex64::new(lam, 0.0) - z).norm();
        if d <= POLE_TOL {
            return Err(Error::PoleProximity { z: z.re, eigenvalue: lam, distance: d });
        }
    }
    let ratio = determinant(n - 1, &minor.shifted(z)) / determinant(n, &a.shifted(z));
    let sum: Complex64 = dec
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &lam)| dec.component_sq(k + 1, j) / (Complex64::new(lam, 0.0) - z))
        .sum();
    Ok((ratio - sum).norm())
}

/// Smallest gap between consecutive eigenvalues.
pub fn min_gap(eigenvalues: &[f64]) -> f64 {
    eigenvalues.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

pub const REPORT_HEADER: &str = "k,ell,lhs,rhs,direct,abs_err,generic";

/// CSV rendering of an identity sweep.
pub fn reports_to_csv(reports: &[IdentityReport]) -> String {
    let mut s = String::from(REPORT_HEADER);
    s.push('\n');
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.k,
            r.ell,
            fmt_f64(r.lhs),
            fmt_f64(r.rhs),
            fmt_f64(r.direct_component_sq),
            fmt_f64(r.abs_err()),
            r.generic
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn two_by_two() -> SymmetricMatrix {
        SymmetricMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap()
    }

    #[test]
    fn rejects_non_hermitian() {
        let e = SymmetricMatrix::from_real_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap_err();
        assert!(matches!(e, Error::NotHermitian { .. }));
        let e = SymmetricMatrix::new(2, vec![c(1.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 1.0), c(1.0)]);
        assert!(e.is_err());
    }

    #[test]
    fn eigensolve_diagonal() {
        let a = SymmetricMatrix::diagonal(&[3.0, 1.0, 2.0]).unwrap();
        let d = hermitian_eigensolve(&a).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0, 2.0, 3.0]);
        assert_eq!(d.component_sq(1, 2), 1.0);
        assert_eq!(d.component_sq(2, 3), 1.0);
        assert_eq!(d.component_sq(3, 1), 1.0);
    }

    #[test]
    fn eigensolve_two_by_two() {
        let d = hermitian_eigensolve(&two_by_two()).unwrap();
        assert!((d.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((d.eigenvalues[1] - 3.0).abs() < 1e-14);
        assert!((d.component_sq(1, 1) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn eigensolve_complex_hermitian() {
        let a = SymmetricMatrix::random(7, 3, true).unwrap();
        let d = hermitian_eigensolve(&a).unwrap();
        let scale = a.frobenius_norm();
        assert!(d.max_residual(&a) <= 1e-10 * scale);
        assert!(d.max_orthonormality_defect() <= 1e-10);
        assert!(d.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigensolve_is_deterministic() {
        let a = SymmetricMatrix::random(9, 11, true).unwrap();
        assert_eq!(hermitian_eigensolve(&a).unwrap(), hermitian_eigensolve(&a).unwrap());
    }

    #[test]
    fn minor_examples() {
        let m = principal_minor(&two_by_two(), 1).unwrap();
        assert_eq!(m.n(), 1);
        assert_eq!(m.get(0, 0), c(2.0));
        let i3 = SymmetricMatrix::identity(3).unwrap();
        assert_eq!(principal_minor(&i3, 2).unwrap(), SymmetricMatrix::identity(2).unwrap());
        assert!(matches!(principal_minor(&i3, 4), Err(Error::Index { .. })));
        assert!(matches!(principal_minor(&i3, 0), Err(Error::Index { .. })));
        let one = SymmetricMatrix::identity(1).unwrap();
        assert!(matches!(principal_minor(&one, 1), Err(Error::Dimension(_))));
    }

    #[test]
    fn component_from_spectra_examples() {
        let v = component_squared_from_spectra(&[1.0, 3.0], &[2.0], 1).unwrap();
        assert!(v.generic);
        assert!((v.value.unwrap() - 0.5).abs() < 1e-15);
        let v = component_squared_from_spectra(&[0.0, 1.0], &[0.0], 1).unwrap();
        assert_eq!(v.value, Some(0.0));
        let v = component_squared_from_spectra(&[1.0, 1.0, 2.0], &[1.0, 1.5], 1).unwrap();
        assert!(!v.generic);
        assert!(v.value.is_none());
        assert!(matches!(component_squared_from_spectra(&[1.0, 2.0], &[], 1), Err(Error::Shape(_))));
        assert!(matches!(component_squared_from_spectra(&[1.0, 2.0], &[1.5], 3), Err(Error::Index { .. })));
    }

    #[test]
    fn resolvent_examples() {
        let r = resolvent_diag_ratio_check(&two_by_two(), 1, c(0.0)).unwrap();
        assert!(r < 1e-14);
        let d = SymmetricMatrix::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        assert!(resolvent_diag_ratio_check(&d, 2, c(-1.0)).unwrap() < 1e-14);
        let e = resolvent_diag_ratio_check(&d, 2, c(2.0 + 1e-10)).unwrap_err();
        assert!(matches!(e, Error::PoleProximity { eigenvalue, .. } if eigenvalue == 2.0));
    }

    #[test]
    fn identity_sweep_two_by_two_and_diagonal() {
        let reps = identity_sweep(&two_by_two()).unwrap();
        assert_eq!(reps.len(), 4);
        assert!(reps.iter().all(|r| r.generic && r.passes()));
        let reps = identity_sweep(&SymmetricMatrix::diagonal(&[1.0, 5.0, 2.0]).unwrap()).unwrap();
        for r in &reps {
            assert!(r.direct_component_sq == 0.0 || r.direct_component_sq == 1.0);
            assert!(r.passes());
        }
    }

    #[test]
    fn repeated_eigenvalue_is_flagged_not_failed() {
        let a = SymmetricMatrix::diagonal(&[1.0, 1.0, 2.0]).unwrap();
        let reps = identity_sweep(&a).unwrap();
        assert!(reps.iter().any(|r| !r.generic));
        assert!(reps.iter().all(|r| r.passes()));
    }

    #[test]
    fn csv_has_expected_header() {
        let csv = reports_to_csv(&identity_sweep(&two_by_two()).unwrap());
        assert!(csv.starts_with("k,ell,lhs,rhs,direct,abs_err,generic\n"));
        assert_eq!(csv.lines().count(), 5);
    }
}
