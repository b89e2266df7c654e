//! The two eigenvalue sequences consumed by the reconstruction formulas,
//! the shift guard that keeps zero out of both, and the side labelling used
//! by the ratio normalization.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sl_engine::spectrum::{
    dirichlet_eigenvalues_with, free_spectra, split_eigenvalues_with, SolverOptions, Spectrum, SplitSpectrum, Tag,
};
use crate::sl_engine::DirichletProblem;

/// Full and split spectra for one split point, truncated to a common budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectraPair {
    pub full: Spectrum,
    pub split: SplitSpectrum,
    pub x0: f64,
    pub a: f64,
    pub b: f64,
    pub shift_applied: f64,
}

impl SpectraPair {
    /// Truncates `full` to `k` entries and `split` to `k` entries counted
    /// with multiplicity.
    pub fn new(full: Spectrum, split: SplitSpectrum, a: f64, b: f64, k: usize) -> Result<Self> {
        let x0 = split.x0;
        if !(a < x0 && x0 < b) {
            return Err(Error::Domain(format!("split point {x0} is not inside ({a}, {b})")));
        }
        if full.len() < k || split.count_with_multiplicity() + 1 < k {
            return Err(Error::Window(format!(
                "need {k} entries, have {} full and {} split",
                full.len(),
                split.count_with_multiplicity()
            )));
        }
        Ok(Self { full: full.truncate(k), split: split.truncate(k), x0, a, b, shift_applied: 0.0 })
    }

    pub fn compute(problem: &DirichletProblem, x0: f64, k: usize, opts: &SolverOptions) -> Result<Self> {
        let full = dirichlet_eigenvalues_with(problem, k, opts)?;
        Self::with_full(problem, full, x0, k, opts)
    }

    /// Reuses an already computed full spectrum (it does not depend on `x0`).
    pub fn with_full(
        problem: &DirichletProblem,
        full: Spectrum,
        x0: f64,
        k: usize,
        opts: &SolverOptions,
    ) -> Result<Self> {
        let split = split_eigenvalues_with(problem, x0, k, opts)?;
        Self::new(full, split, problem.a, problem.b, k)
    }

    /// Closed-form pair for `V = 0`.
    pub fn free(a: f64, b: f64, x0: f64, k: usize) -> Result<Self> {
        let (full, split) = free_spectra(a, b, x0, k + 2)?;
        Self::new(full, split, a, b, k)
    }

    /// Truncation budget K (the full-spectrum length).
    pub fn truncation(&self) -> usize {
        self.full.len()
    }

    pub fn truncated(&self, k: usize) -> Self {
        Self { full: self.full.truncate(k), split: self.split.truncate(k), ..self.clone() }
    }

    /// Every eigenvalue moved by `c`, with the shift recorded.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            full: self.full.shifted(c),
            split: self.split.shifted(c),
            shift_applied: self.shift_applied + c,
            ..self.clone()
        }
    }

    /// `1e-6 · max(1, |λ_1|)`.
    pub fn tol_zero(&self) -> f64 {
        1e-6 * self.full.values.first().map_or(1.0, |v| v.abs().max(1.0))
    }

    fn all_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.full.values.iter().chain(&self.split.values).copied()
    }

    /// Entry of either list closest to zero.
    pub fn nearest_to_zero(&self) -> Option<f64> {
        self.all_values().min_by(|x, y| x.abs().total_cmp(&y.abs()))
    }

    pub fn is_guarded(&self) -> bool {
        self.nearest_to_zero().is_none_or(|v| v.abs() > self.tol_zero())
    }

    pub fn check_guarded(&self) -> Result<()> {
        match self.nearest_to_zero() {
            Some(v) if v.abs() <= self.tol_zero() => Err(Error::UnguardedZero { value: v }),
            _ => Ok(()),
        }
    }
}

/// Moves both spectra off zero when an entry sits within `tol_zero` of it.
///
/// The candidate shifts are `±gap/2`, where `gap` separates the offending
/// entry from its nearest distinct neighbour; the one leaving the shifted
/// lists farther from zero wins, ties going to the positive shift. A guarded
/// pair is returned unchanged.
pub fn spectral_shift_guard(pair: &SpectraPair) -> SpectraPair {
    let Some(v0) = pair.nearest_to_zero() else {
        return pair.clone();
    };
    let tol = pair.tol_zero();
    if v0.abs() > tol {
        return pair.clone();
    }
    let gap = pair.all_values().map(|v| (v - v0).abs()).filter(|d| *d > tol).fold(f64::INFINITY, f64::min);
    let gap = if gap.is_finite() { gap } else { 1.0 };
    let distance = |c: f64| pair.all_values().map(|v| (v + c).abs()).fold(f64::INFINITY, f64::min);
    let (up, down) = (0.5 * gap, -0.5 * gap);
    let c = if distance(up) >= distance(down) { up } else { down };
    pair.shifted(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// One split eigenvalue (counted with multiplicity) and its label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub label: usize,
    pub side: Side,
    /// 1-based position within its side.
    pub index: usize,
    pub value: f64,
    /// Eigenvalue of `-d²/dx²` on the same side with the same index.
    pub free_value: f64,
}

/// Labels sorted by label number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedLabels {
    pub labels: Vec<Label>,
}

impl PairedLabels {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, label: usize) -> Option<&Label> {
        self.labels.get(label.checked_sub(1)?)
    }
}

/// Even labels go to `(a, x0)` and odd ones to `(x0, b)`, in eigenvalue
/// order on each side. Once the shorter side runs out, the remaining entries
/// of the other side take the following labels consecutively.
pub fn pair_split_labels(split: &SplitSpectrum, a: f64, b: f64) -> Result<PairedLabels> {
    if split.tags.len() != split.values.len() || (split.tags.is_empty() && !split.values.is_empty()) {
        return Err(Error::MissingTags);
    }
    let x0 = split.x0;
    if !(a < x0 && x0 < b) {
        return Err(Error::Domain(format!("split point {x0} is not inside ({a}, {b})")));
    }
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (&v, tag) in split.values.iter().zip(&split.tags) {
        if *tag != Tag::Right {
            left.push(v);
        }
        if *tag != Tag::Left {
            right.push(v);
        }
    }
    let paired = left.len().min(right.len());
    let label_of = |side: Side, i: usize| -> usize {
        if i <= paired {
            match side {
                Side::Left => 2 * i,
                Side::Right => 2 * i - 1,
            }
        } else {
            2 * paired + (i - paired)
        }
    };
    let mut labels = Vec::with_capacity(left.len() + right.len());
    for (side, values, len) in [(Side::Left, &left, x0 - a), (Side::Right, &right, b - x0)] {
        for (j, &value) in values.iter().enumerate() {
            let i = j + 1;
            labels.push(Label {
                label: label_of(side, i),
                side,
                index: i,
                value,
                free_value: (i as f64 * PI / len).powi(2),
            });
        }
    }
    labels.sort_by_key(|l| l.label);
    Ok(PairedLabels { labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl_engine::Potential;

    #[test]
    fn free_pair_needs_no_shift() {
        let p = SpectraPair::free(0.0, PI, 1.0, 20).unwrap();
        let g = spectral_shift_guard(&p);
        assert_eq!(g, p);
        assert_eq!(g.shift_applied, 0.0);
    }

    #[test]
    fn zero_eigenvalue_is_shifted_away() {
        let problem = DirichletProblem::new(0.0, PI, Potential::Constant { value: -1.0 }).unwrap();
        let opts = SolverOptions { grid_size: 512, ..Default::default() };
        let p = SpectraPair::compute(&problem, 1.0, 10, &opts).unwrap();
        assert!(!p.is_guarded());
        assert!(p.check_guarded().is_err());
        let g = spectral_shift_guard(&p);
        assert!(g.shift_applied > 0.0);
        assert!(g.is_guarded());
        assert_eq!(spectral_shift_guard(&g), g);
    }

    #[test]
    fn symmetric_labels() {
        let p = SpectraPair::free(0.0, 1.0, 0.5, 8).unwrap();
        let labels = pair_split_labels(&p.split, 0.0, 1.0).unwrap();
        assert_eq!(labels.len(), 8);
        for k in 1..=4 {
            let even = labels.get(2 * k).unwrap();
            let odd = labels.get(2 * k - 1).unwrap();
            let e = (2.0 * k as f64 * PI).powi(2);
            assert_eq!(even.side, Side::Left);
            assert_eq!(odd.side, Side::Right);
            assert!((even.value - e).abs() < 1e-9 * e && (odd.value - e).abs() < 1e-9 * e);
        }
    }

    #[test]
    fn third_labels_and_exhaustion() {
        let p = SpectraPair::free(0.0, 1.0, 1.0 / 3.0, 12).unwrap();
        let labels = pair_split_labels(&p.split, 0.0, 1.0).unwrap();
        let l2 = labels.get(2).unwrap();
        let l1 = labels.get(1).unwrap();
        assert_eq!(l2.side, Side::Left);
        assert!((l2.value - (3.0 * PI).powi(2)).abs() < 1e-9);
        assert_eq!(l1.side, Side::Right);
        assert!((l1.value - (1.5 * PI).powi(2)).abs() < 1e-9);
        // the right side is twice as long, so it supplies the trailing labels
        let last = labels.labels.last().unwrap();
        assert_eq!(last.side, Side::Right);
        assert_eq!(last.label, labels.len());
        for w in labels.labels.windows(2) {
            assert_eq!(w[1].label, w[0].label + 1);
        }
        for side in [Side::Left, Side::Right] {
            let v: Vec<f64> = labels.labels.iter().filter(|l| l.side == side).map(|l| l.value).collect();
            assert!(v.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn missing_tags_rejected() {
        let p = SpectraPair::free(0.0, 1.0, 0.5, 8).unwrap();
        let mut s = p.split.clone();
        s.tags.clear();
        assert_eq!(pair_split_labels(&s, 0.0, 1.0), Err(Error::MissingTags));
    }
}
