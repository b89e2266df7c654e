//! Dirichlet spectra on `[a, b]` and on the split domain `(a, x0) ∪ (x0, b)`.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::DirichletProblem;
use super::pruess::{locate_eigenvalue, CellMesh};
use crate::error::{Error, Result};
use crate::numeric::fmt_f64;

pub const DEFAULT_GRID: usize = 4096;
pub const DEFAULT_TOL_EIG: f64 = 1e-10;
/// Smallest mesh used for a subinterval, however short.
pub const MIN_CELLS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub grid_size: usize,
    pub tol_eig: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { grid_size: DEFAULT_GRID, tol_eig: DEFAULT_TOL_EIG }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.grid_size < MIN_CELLS {
            return Err(Error::Domain(format!("grid_size must be at least {MIN_CELLS}")));
        }
        if !(self.tol_eig > 0.0 && self.tol_eig < 1e-2) {
            return Err(Error::Domain(format!("tol_eig {} out of range", self.tol_eig)));
        }
        Ok(())
    }
}

/// `1e-8 · max(1, |λ|)`: two eigenvalues closer than this are one double one.
pub fn tol_merge(lambda: f64) -> f64 {
    1e-8 * lambda.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EigenDiagnostics {
    pub iterations: usize,
    pub bracket_width: f64,
    pub residual: f64,
}

/// First K Dirichlet eigenvalues, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub fingerprint: u64,
    pub diagnostics: Vec<EigenDiagnostics>,
}

impl Spectrum {
    pub fn from_values(values: Vec<f64>, fingerprint: u64) -> Self {
        let diagnostics = vec![EigenDiagnostics::default(); values.len()];
        Self { values, fingerprint, diagnostics }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// 1-based access.
    pub fn get(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.values.len() {
            return Err(Error::Index { index: k, len: self.values.len() });
        }
        Ok(self.values[k - 1])
    }

    pub fn truncate(&self, k: usize) -> Self {
        let k = k.min(self.values.len());
        Self {
            values: self.values[..k].to_vec(),
            fingerprint: self.fingerprint,
            diagnostics: self.diagnostics[..k].to_vec(),
        }
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| v + c).collect(), ..self.clone() }
    }

    pub fn max_residual(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.residual).fold(0.0, f64::max)
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] < w[1])
    }
}

/// Which side of the split point an entry comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Left,
    Right,
    Both,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Left => "left",
            Tag::Right => "right",
            Tag::Both => "both",
        })
    }
}

/// Merged spectrum of the two half-interval problems.
///
/// `left` and `right` hold the side spectra that were merged; each entry of
/// `values` uses the next unused eigenvalue of the side(s) named by its tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpectrum {
    pub values: Vec<f64>,
    pub multiplicities: Vec<u8>,
    pub tags: Vec<Tag>,
    pub residuals: Vec<f64>,
    pub x0: f64,
    pub left: Spectrum,
    pub right: Spectrum,
}

impl SplitSpectrum {
    /// Merges two sorted side spectra; values within `tol_merge` coincide.
    pub fn merge(left: Spectrum, right: Spectrum, x0: f64) -> Self {
        let (l, r) = (&left.values, &right.values);
        let (mut i, mut j) = (0, 0);
        let mut values = Vec::with_capacity(l.len() + r.len());
        let mut multiplicities = Vec::with_capacity(l.len() + r.len());
        let mut tags = Vec::with_capacity(l.len() + r.len());
        let mut residuals = Vec::with_capacity(l.len() + r.len());
        while i < l.len() || j < r.len() {
            let take = match (l.get(i), r.get(j)) {
                (Some(&x), Some(&y)) if (x - y).abs() <= tol_merge(x.abs().max(y.abs())) => Tag::Both,
                (Some(&x), Some(&y)) => {
                    if x < y {
                        Tag::Left
                    } else {
                        Tag::Right
                    }
                }
                (Some(_), None) => Tag::Left,
                _ => Tag::Right,
            };
            match take {
                Tag::Both => {
                    values.push(0.5 * (l[i] + r[j]));
                    multiplicities.push(2);
                    residuals.push(left.diagnostics[i].residual.max(right.diagnostics[j].residual));
                    i += 1;
                    j += 1;
                }
                Tag::Left => {
                    values.push(l[i]);
                    multiplicities.push(1);
                    residuals.push(left.diagnostics[i].residual);
                    i += 1;
                }
                Tag::Right => {
                    values.push(r[j]);
                    multiplicities.push(1);
                    residuals.push(right.diagnostics[j].residual);
                    j += 1;
                }
            }
            tags.push(take);
        }
        Self { values, multiplicities, tags, residuals, x0, left, right }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of entries counted with multiplicity.
    pub fn count_with_multiplicity(&self) -> usize {
        self.multiplicities.iter().map(|&m| m as usize).sum()
    }

    /// Values repeated by multiplicity, in order.
    pub fn expanded(&self) -> Vec<f64> {
        self.values.iter().zip(&self.multiplicities).flat_map(|(&v, &m)| std::iter::repeat_n(v, m as usize)).collect()
    }

    /// Keeps the leading entries whose multiplicities sum to at most `k`.
    ///
    /// A double entry that would straddle `k` is dropped whole, so the kept
    /// list is an energy cutoff of the union. The side spectra are cut to the
    /// eigenvalues actually used.
    pub fn truncate(&self, k: usize) -> Self {
        let mut total = 0;
        let mut n = 0;
        while n < self.values.len() && total + self.multiplicities[n] as usize <= k {
            total += self.multiplicities[n] as usize;
            n += 1;
        }
        let nl = self.tags[..n].iter().filter(|t| **t != Tag::Right).count();
        let nr = self.tags[..n].iter().filter(|t| **t != Tag::Left).count();
        Self {
            values: self.values[..n].to_vec(),
            multiplicities: self.multiplicities[..n].to_vec(),
            tags: self.tags[..n].to_vec(),
            residuals: self.residuals[..n].to_vec(),
            x0: self.x0,
            left: self.left.truncate(nl),
            right: self.right.truncate(nr),
        }
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + c).collect(),
            left: self.left.shifted(c),
            right: self.right.shifted(c),
            ..self.clone()
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

fn cells_for(problem: &DirichletProblem, opts: &SolverOptions, length: f64) -> usize {
    let frac = length / problem.length();
    ((opts.grid_size as f64 * frac).round() as usize).max(MIN_CELLS)
}

fn spectrum_on_mesh(mesh: &CellMesh, k: usize, opts: &SolverOptions, fingerprint: u64) -> Result<Spectrum> {
    let located: Vec<_> =
        (1..=k).into_par_iter().map(|i| locate_eigenvalue(mesh, i, opts.tol_eig)).collect::<Result<_>>()?;
    let values: Vec<f64> = located.iter().map(|e| e.value).collect();
    let diagnostics = located
        .iter()
        .map(|e| EigenDiagnostics { iterations: e.iterations, bracket_width: e.bracket_width, residual: e.residual })
        .collect();
    let s = Spectrum { values, fingerprint, diagnostics };
    if !s.is_strictly_increasing() {
        return Err(Error::Domain("located eigenvalues are not strictly increasing".into()));
    }
    Ok(s)
}

pub fn dirichlet_eigenvalues(problem: &DirichletProblem, k: usize) -> Result<Spectrum> {
    dirichlet_eigenvalues_with(problem, k, &SolverOptions::default())
}

/// First `k` eigenvalues of `problem` on a mesh of `opts.grid_size` cells.
pub fn dirichlet_eigenvalues_with(problem: &DirichletProblem, k: usize, opts: &SolverOptions) -> Result<Spectrum> {
    problem.validate()?;
    opts.validate()?;
    if k == 0 {
        return Err(Error::Domain("K must be at least 1".into()));
    }
    let mesh = CellMesh::new(problem, opts.grid_size);
    spectrum_on_mesh(&mesh, k, opts, problem.fingerprint())
}

/// The single eigenvalue `λ_k` (1-based).
pub fn dirichlet_eigenvalue(problem: &DirichletProblem, k: usize, opts: &SolverOptions) -> Result<f64> {
    problem.validate()?;
    opts.validate()?;
    if k == 0 {
        return Err(Error::Index { index: 0, len: 0 });
    }
    let mesh = CellMesh::new(problem, opts.grid_size);
    Ok(locate_eigenvalue(&mesh, k, opts.tol_eig)?.value)
}

/// Number of eigenvalues of `problem` strictly below `z`.
pub fn count_below(problem: &DirichletProblem, z: f64, opts: &SolverOptions) -> usize {
    CellMesh::new(problem, opts.grid_size).count_below(z)
}

/// Meshes for the two halves, with cell counts proportional to their
/// lengths so that all three problems share the same step.
pub fn split_meshes(problem: &DirichletProblem, x0: f64, opts: &SolverOptions) -> Result<(CellMesh, CellMesh)> {
    problem.check_split_point(x0)?;
    let left = problem.restrict(problem.a, x0)?;
    let right = problem.restrict(x0, problem.b)?;
    Ok((
        CellMesh::new(&left, cells_for(problem, opts, x0 - problem.a)),
        CellMesh::new(&right, cells_for(problem, opts, problem.b - x0)),
    ))
}

pub fn split_eigenvalues(problem: &DirichletProblem, x0: f64, k: usize) -> Result<SplitSpectrum> {
    split_eigenvalues_with(problem, x0, k, &SolverOptions::default())
}

/// First `k` entries (with multiplicity) of the merged half-interval spectra.
pub fn split_eigenvalues_with(
    problem: &DirichletProblem,
    x0: f64,
    k: usize,
    opts: &SolverOptions,
) -> Result<SplitSpectrum> {
    problem.validate()?;
    opts.validate()?;
    if k == 0 {
        return Err(Error::Domain("K must be at least 1".into()));
    }
    let (lm, rm) = split_meshes(problem, x0, opts)?;
    // smallest energy below which the union holds at least k + 2 entries
    let want = k + 2;
    let total = |e: f64| lm.count_below(e) + rm.count_below(e);
    let mut hi = (want as f64 * PI / problem.length()).powi(2) + lm.v_max.max(rm.v_max) + 1.0;
    while total(hi) < want {
        hi = 2.0 * hi.abs() + 1.0;
    }
    let mut lo = lm.v_min.min(rm.v_min);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if total(mid) >= want {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (nl, nr) = (lm.count_below(hi).max(1), rm.count_below(hi).max(1));
    let fp = problem.fingerprint();
    let (left, right) = rayon::join(|| spectrum_on_mesh(&lm, nl, opts, fp), || spectrum_on_mesh(&rm, nr, opts, fp));
    Ok(SplitSpectrum::merge(left?, right?, x0).truncate(k))
}

/// Closed-form spectra of `-d²/dx²` on `[a, b]` and on the split domain.
pub fn free_spectra(a: f64, b: f64, x0: f64, k: usize) -> Result<(Spectrum, SplitSpectrum)> {
    let p = DirichletProblem::free(a, b)?;
    p.check_split_point(x0)?;
    if k == 0 {
        return Err(Error::Domain("K must be at least 1".into()));
    }
    let fp = p.fingerprint();
    let side = |len: f64| Spectrum::from_values((1..=k).map(|j| (j as f64 * PI / len).powi(2)).collect(), fp);
    let full = side(b - a);
    let split = SplitSpectrum::merge(side(x0 - a), side(b - x0), x0).truncate(k);
    Ok((full, split))
}

pub const SPECTRUM_HEADER: &str = "k,lambda,multiplicity,tag,residual";

/// CSV rows for a full spectrum (multiplicity 1, tag `full`).
pub fn spectrum_to_csv(spec: &Spectrum) -> String {
    let mut out = format!("{SPECTRUM_HEADER}\n");
    for (i, (v, d)) in spec.values.iter().zip(&spec.diagnostics).enumerate() {
        out.push_str(&format!("{},{},1,full,{}\n", i + 1, fmt_f64(*v), fmt_f64(d.residual)));
    }
    out
}

pub fn split_to_csv(split: &SplitSpectrum) -> String {
    let mut out = format!("{SPECTRUM_HEADER}\n");
    for i in 0..split.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            i + 1,
            fmt_f64(split.values[i]),
            split.multiplicities[i],
            split.tags[i],
            fmt_f64(split.residuals[i])
        ));
    }
    out
}
