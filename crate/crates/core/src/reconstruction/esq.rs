//! `e_k(x0)²` from the two spectra, by the limit-normalized product and by
//! the free-ratio product.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::normalization::{c_via_limit, c_via_ratio, default_schedule, LimitNormalization};
use super::pair::{pair_split_labels, spectral_shift_guard, PairedLabels, SpectraPair};
use crate::error::{Error, Result};
use crate::numeric::{fmt_f64, SignedLog};
use crate::sl_engine::eigenfunction::eigenfunction_direct;
use crate::sl_engine::spectrum::{dirichlet_eigenvalues_with, tol_merge, SolverOptions};
use crate::sl_engine::DirichletProblem;

/// Values below this are reported as failures rather than clamped.
pub const NEGATIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Product normalized by the large-|z| limit of the diagonal Green's function.
    Limit,
    /// Product normalized against the free operator's spectra.
    Ratio,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Limit => "limit",
            Method::Ratio => "ratio",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "limit" => Ok(Method::Limit),
            "ratio" => Ok(Method::Ratio),
            _ => Err(Error::Domain(format!("unknown method {s:?} (expected limit or ratio)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub k: usize,
    pub x0: f64,
    pub method: Method,
    /// Truncation K.
    pub truncation: usize,
    pub c: f64,
    pub esq: f64,
    pub tail_estimate: f64,
    pub oracle: Option<f64>,
    pub shift_applied: f64,
    /// True when `λ_k` is also a split eigenvalue and `esq` is exactly zero.
    pub vanishing: bool,
}

impl ReconstructionResult {
    pub fn abs_err(&self) -> Option<f64> {
        self.oracle.map(|o| (self.esq - o).abs())
    }

    pub fn rel_err(&self) -> Option<f64> {
        self.oracle.map(|o| (self.esq - o).abs() / o.abs().max(f64::MIN_POSITIVE))
    }
}

/// Whether `λ_k` coincides with a split eigenvalue within `tol_merge`.
pub fn is_vanishing(pair: &SpectraPair, k: usize) -> Result<bool> {
    let lk = pair.full.get(k)?;
    let tol = tol_merge(lk);
    Ok(pair.split.values.iter().any(|m| (m - lk).abs() <= tol))
}

/// `λ_k Π_j (1 − λ_k/μ_j)^{m_j} / Π_{m≠k} (1 − λ_k/λ_m)`.
pub fn residue_product(pair: &SpectraPair, k: usize) -> Result<SignedLog> {
    let lk = pair.full.get(k)?;
    let mut p = SignedLog::from_value(lk);
    for (&mu, &mult) in pair.split.values.iter().zip(&pair.split.multiplicities) {
        p.mul_pow(1.0 - lk / mu, mult as u32);
    }
    for (i, &lm) in pair.full.values.iter().enumerate() {
        if i + 1 != k {
            p.div(1.0 - lk / lm);
        }
    }
    Ok(p)
}

/// `C0 λ_k⁰ Π_j (μ_j − λ_k)/μ_j⁰ / Π_{m≠k} (λ_m − λ_k)/λ_m⁰`.
fn free_ratio_product(pair: &SpectraPair, labels: &PairedLabels, k: usize) -> Result<f64> {
    let lk = pair.full.get(k)?;
    let (a, b, x0) = (pair.a, pair.b, pair.x0);
    let len = b - a;
    let free = |n: usize| (n as f64 * PI / len).powi(2);
    let mut p = SignedLog::from_value((x0 - a) * (b - x0) / len * free(k));
    for lab in &labels.labels {
        p.mul((lab.value - lk) / lab.free_value);
    }
    for (i, &lm) in pair.full.values.iter().enumerate() {
        if i + 1 != k {
            p.div((lm - lk) / free(i + 1));
        }
    }
    Ok(p.value())
}

fn finish(mut r: ReconstructionResult) -> Result<ReconstructionResult> {
    if !r.esq.is_finite() {
        return Err(Error::Domain(format!("non-finite reconstruction for k = {}", r.k)));
    }
    if r.esq < -NEGATIVE_TOL {
        return Err(Error::NegativeSquare { value: r.esq });
    }
    if !r.tail_estimate.is_finite() {
        r.tail_estimate = f64::INFINITY;
    }
    Ok(r)
}

fn half_budget(pair: &SpectraPair, k: usize) -> Option<SpectraPair> {
    let half = pair.truncation() / 2;
    (half >= k.max(8)).then(|| pair.truncated(half))
}

/// `e_k(x0)² = C · residue_product` with `C` from the limit formula.
///
/// The tail estimate is the change against the half budget plus the
/// uncertainty of `C` carried through the product.
pub fn esq_limit_normalized(pair: &SpectraPair, k: usize, norm: &LimitNormalization) -> Result<ReconstructionResult> {
    pair.check_guarded()?;
    let mut r = ReconstructionResult {
        k,
        x0: pair.x0,
        method: Method::Limit,
        truncation: pair.truncation(),
        c: norm.c,
        esq: 0.0,
        tail_estimate: 0.0,
        oracle: None,
        shift_applied: pair.shift_applied,
        vanishing: false,
    };
    if is_vanishing(pair, k)? {
        r.vanishing = true;
        return Ok(r);
    }
    let prod = residue_product(pair, k)?.value();
    r.esq = norm.c * prod;
    let half = half_budget(pair, k).map(|h| residue_product(&h, k).map(|p| norm.c * p.value())).transpose()?;
    r.tail_estimate = half.map_or(f64::INFINITY, |h| (h - r.esq).abs()) + norm.spread * prod.abs();
    finish(r)
}

/// `e_k(x0)²` from eigenvalue ratios against the free operator.
pub fn esq_free_ratio(pair: &SpectraPair, labels: &PairedLabels, k: usize) -> Result<ReconstructionResult> {
    pair.check_guarded()?;
    let c = c_via_ratio(pair, labels)?.c;
    let mut r = ReconstructionResult {
        k,
        x0: pair.x0,
        method: Method::Ratio,
        truncation: pair.truncation(),
        c,
        esq: 0.0,
        tail_estimate: 0.0,
        oracle: None,
        shift_applied: pair.shift_applied,
        vanishing: false,
    };
    if is_vanishing(pair, k)? {
        r.vanishing = true;
        return Ok(r);
    }
    r.esq = free_ratio_product(pair, labels, k)?;
    let half = match half_budget(pair, k) {
        Some(h) => {
            let hl = pair_split_labels(&h.split, h.a, h.b)?;
            Some(free_ratio_product(&h, &hl, k)?)
        }
        None => None,
    };
    r.tail_estimate = half.map_or(f64::INFINITY, |h| (h - r.esq).abs());
    finish(r)
}

/// `Π_{m ≤ K, m ≠ k} (1 − k²/m²)`, which tends to `(−1)^{k+1}/2`.
pub fn sin_product_identity(k: usize, truncation: usize) -> f64 {
    let kk = (k * k) as f64;
    let mut p = SignedLog::one();
    for m in 1..=truncation {
        if m != k {
            p.mul(1.0 - kk / (m * m) as f64);
        }
    }
    p.value()
}

/// Reconstruction of one `(x0, k, method)` cell, or why it failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCell {
    pub x0: f64,
    pub k: usize,
    pub method: Method,
    pub outcome: Result<ReconstructionResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRequest {
    pub x0_grid: Vec<f64>,
    pub k_list: Vec<usize>,
    pub methods: Vec<Method>,
    pub truncation: usize,
    pub oracle: bool,
    pub schedule: Vec<f64>,
    pub solver: SolverOptions,
}

impl ProfileRequest {
    pub fn new(x0_grid: Vec<f64>, k_list: Vec<usize>, methods: Vec<Method>, truncation: usize) -> Self {
        Self {
            x0_grid,
            k_list,
            methods,
            truncation,
            oracle: false,
            schedule: default_schedule(),
            solver: SolverOptions::default(),
        }
    }
}

/// Runs every `(x0, k, method)` cell of `req`, sorted by that key.
///
/// Errors are attached to the cells they affect; only invalid requests fail
/// as a whole.
pub fn reconstruct_profile(problem: &DirichletProblem, req: &ProfileRequest) -> Result<Vec<ProfileCell>> {
    problem.validate()?;
    if req.k_list.is_empty() || req.x0_grid.is_empty() || req.methods.is_empty() {
        return Err(Error::Domain("x0 grid, k list and methods must be non-empty".into()));
    }
    if req.truncation < 8 {
        return Err(Error::TruncationTooSmall(req.truncation));
    }
    if let Some(&k) = req.k_list.iter().find(|&&k| k == 0 || k > req.truncation) {
        return Err(Error::Index { index: k, len: req.truncation });
    }
    for &x0 in &req.x0_grid {
        problem.check_split_point(x0)?;
    }
    let mut x0s = req.x0_grid.clone();
    x0s.sort_by(f64::total_cmp);
    x0s.dedup();
    let mut ks = req.k_list.clone();
    ks.sort_unstable();
    ks.dedup();
    let mut methods = req.methods.clone();
    methods.sort();
    methods.dedup();

    let full = dirichlet_eigenvalues_with(problem, req.truncation, &req.solver)?;
    let oracles: Vec<Option<Result<_>>> =
        ks.iter().map(|&k| req.oracle.then(|| eigenfunction_direct(problem, k, req.solver.grid_size))).collect();

    let mut cells = Vec::new();
    for &x0 in &x0s {
        let prepared = SpectraPair::with_full(problem, full.clone(), x0, req.truncation, &req.solver).and_then(|p| {
            let p = spectral_shift_guard(&p);
            let labels = pair_split_labels(&p.split, p.a, p.b)?;
            Ok((p, labels))
        });
        let limit = match &prepared {
            Ok((p, _)) if methods.contains(&Method::Limit) => Some(c_via_limit(p, &req.schedule)),
            _ => None,
        };
        for (ki, &k) in ks.iter().enumerate() {
            for &method in &methods {
                let outcome = match &prepared {
                    Err(e) => Err(e.clone()),
                    Ok((p, labels)) => match method {
                        Method::Ratio => esq_free_ratio(p, labels, k),
                        Method::Limit => match limit.as_ref().expect("computed above") {
                            Ok(n) => esq_limit_normalized(p, k, n),
                            Err(e) => Err(e.clone()),
                        },
                    },
                };
                let outcome = outcome.and_then(|mut r| {
                    if let Some(o) = &oracles[ki] {
                        let e = o.as_ref().map_err(Clone::clone)?;
                        let v = e.value_at(problem, x0)?;
                        r.oracle = Some(v * v);
                    }
                    Ok(r)
                });
                cells.push(ProfileCell { x0, k, method, outcome });
            }
        }
    }
    Ok(cells)
}

pub const PROFILE_HEADER: &str = "x0,k,method,K,esq,oracle,abs_err,rel_err,tail_estimate,shift_applied";

/// CSV table; failed cells carry `NaN` in every numeric column.
pub fn profile_to_csv(cells: &[ProfileCell], truncation: usize) -> String {
    let opt = |v: Option<f64>| v.map_or_else(String::new, fmt_f64);
    let mut out = format!("{PROFILE_HEADER}\n");
    for c in cells {
        match &c.outcome {
            Ok(r) => out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                fmt_f64(c.x0),
                c.k,
                c.method,
                r.truncation,
                fmt_f64(r.esq),
                opt(r.oracle),
                opt(r.abs_err()),
                opt(r.rel_err()),
                fmt_f64(r.tail_estimate),
                fmt_f64(r.shift_applied)
            )),
            Err(_) => out.push_str(&format!(
                "{},{},{},{},NaN,NaN,NaN,NaN,NaN,NaN\n",
                fmt_f64(c.x0),
                c.k,
                c.method,
                truncation
            )),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_esq(x0: f64, k: usize) -> f64 {
        2.0 * (k as f64 * PI * x0).sin().powi(2)
    }

    #[test]
    fn free_midpoint_values() {
        let p = SpectraPair::free(0.0, 1.0, 0.5, 4000).unwrap();
        let labels = pair_split_labels(&p.split, 0.0, 1.0).unwrap();
        let r1 = esq_free_ratio(&p, &labels, 1).unwrap();
        assert!((r1.esq - 2.0).abs() < 1e-6, "{}", r1.esq);
        let r3 = esq_free_ratio(&p, &labels, 3).unwrap();
        assert!((r3.esq - 2.0).abs() < 1e-6);
        let r2 = esq_free_ratio(&p, &labels, 2).unwrap();
        assert!(r2.vanishing);
        assert_eq!(r2.esq, 0.0);
        let lim = c_via_limit(&p, &default_schedule()).unwrap();
        let l1 = esq_limit_normalized(&p, 1, &lim).unwrap();
        assert!((l1.esq - 2.0).abs() < 1e-4);
        assert!(esq_limit_normalized(&p, 2, &lim).unwrap().vanishing);
    }

    #[test]
    fn free_off_center() {
        let p = SpectraPair::free(0.0, 1.0, 0.3, 2000).unwrap();
        let labels = pair_split_labels(&p.split, 0.0, 1.0).unwrap();
        for k in 1..=6 {
            let r = esq_free_ratio(&p, &labels, k).unwrap();
            let e = free_esq(0.3, k);
            assert!((r.esq - e).abs() < 1e-5 * e, "k = {k}: {} vs {e}", r.esq);
        }
    }

    #[test]
    fn sine_products() {
        assert!((sin_product_identity(1, 10000) - 0.5).abs() < 2e-4);
        assert!((sin_product_identity(2, 10000) + 0.5).abs() < 4e-4);
        for k in 1..=6 {
            let v = sin_product_identity(k, 2000);
            assert_eq!(v.signum(), if k % 2 == 1 { 1.0 } else { -1.0 });
        }
    }

    #[test]
    fn method_tokens() {
        assert_eq!("limit".parse::<Method>().unwrap(), Method::Limit);
        assert_eq!(Method::Ratio.to_string(), "ratio");
        assert!("thm".parse::<Method>().is_err());
    }

    #[test]
    fn unguarded_pair_is_rejected() {
        let p = SpectraPair::free(0.0, PI, 1.0, 20).unwrap().shifted(-1.0);
        let labels = pair_split_labels(&p.split, 0.0, PI).unwrap();
        assert!(matches!(esq_free_ratio(&p, &labels, 2), Err(Error::UnguardedZero { .. })));
    }
}
