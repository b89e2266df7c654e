//! The spectral shift function of the pair (full, split) as a step function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sl_engine::spectrum::{tol_merge, Spectrum, SplitSpectrum};

/// Right-continuous step function, zero below the first jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    /// Sorted jump locations; a repeated location carries several jumps.
    pub locations: Vec<f64>,
    /// `+1` or `−1` for each location.
    pub signs: Vec<i8>,
}

impl StepFunction {
    /// Lowest jump location.
    pub fn e0(&self) -> Option<f64> {
        self.locations.first().copied()
    }

    pub fn value(&self, lambda: f64) -> i64 {
        let n = self.locations.partition_point(|&t| t <= lambda);
        self.signs[..n].iter().map(|&s| s as i64).sum()
    }

    /// Distinct breakpoints with the value taken just after each.
    pub fn pieces(&self) -> Vec<(f64, i64)> {
        let mut out: Vec<(f64, i64)> = Vec::new();
        let mut acc = 0i64;
        for (&t, &s) in self.locations.iter().zip(&self.signs) {
            acc += s as i64;
            match out.last_mut() {
                Some(last) if last.0 == t => last.1 = acc,
                _ => out.push((t, acc)),
            }
        }
        out
    }

    /// Largest and smallest values attained.
    pub fn range(&self) -> (i64, i64) {
        self.pieces().iter().fold((0, 0), |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)))
    }

    /// `∫ ξ(λ) (λ − z)^{-2} dλ` from the first to the last jump, summed
    /// exactly over the intervals of constancy. `z` must lie below `E0`.
    pub fn integral_inverse_square(&self, z: f64) -> Result<f64> {
        let pieces = self.pieces();
        match pieces.first() {
            None => return Ok(0.0),
            Some(&(e0, _)) if z >= e0 => {
                return Err(Error::Domain(format!("z = {z} must lie below E0 = {e0}")));
            }
            _ => {}
        }
        Ok(pieces.windows(2).map(|w| w[0].1 as f64 * (1.0 / (w[0].0 - z) - 1.0 / (w[1].0 - z))).sum())
    }
}

/// `ξ` jumping by `+1` at each full eigenvalue and by `−1` at each split
/// eigenvalue, counted with multiplicity.
///
/// The two lists must end at a common energy cutoff, which by interlacing
/// means the full list holds the same number of entries as the split list
/// (with multiplicity) or one more.
pub fn spectral_shift_function(spec: &Spectrum, split: &SplitSpectrum) -> Result<StepFunction> {
    let nf = spec.len();
    let ns = split.count_with_multiplicity();
    if !(nf == ns || nf == ns + 1) {
        return Err(Error::Window(format!("{nf} full entries against {ns} split entries")));
    }
    let mut jumps: Vec<(f64, i8)> = spec.values.iter().map(|&v| (v, 1)).collect();
    jumps.extend(split.expanded().into_iter().map(|v| (snap(&spec.values, v), -1)));
    // at a shared location the rise is listed first
    jumps.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)));
    Ok(StepFunction { locations: jumps.iter().map(|j| j.0).collect(), signs: jumps.iter().map(|j| j.1).collect() })
}

/// A split entry within `tol_merge` of a full eigenvalue is the same point of
/// the spectrum, so it is moved onto it.
fn snap(full: &[f64], v: f64) -> f64 {
    let i = full.partition_point(|&t| t < v);
    [i.checked_sub(1), Some(i)]
        .into_iter()
        .flatten()
        .filter_map(|j| full.get(j).copied())
        .find(|&t| (t - v).abs() <= tol_merge(v))
        .unwrap_or(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green_trace::identities::trace_sum;
    use crate::sl_engine::spectrum::free_spectra;
    use std::f64::consts::PI;

    #[test]
    fn free_symmetric_steps() {
        let (full, split) = free_spectra(0.0, 1.0, 0.5, 8).unwrap();
        let xi = spectral_shift_function(&full, &split).unwrap();
        assert_eq!(xi.value(PI * PI - 1.0), 0);
        assert_eq!(xi.value(PI * PI + 1.0), 1);
        // (2π)² is a full eigenvalue and a double split one
        assert_eq!(xi.value(4.0 * PI * PI + 1.0), 0);
        assert_eq!(xi.value(9.0 * PI * PI + 1.0), 1);
        assert_eq!(xi.range(), (0, 1));
        assert_eq!(xi.e0(), Some(PI * PI));
    }

    #[test]
    fn integral_matches_trace_sum() {
        let (full, split) = free_spectra(0.0, 1.0, 0.5, 200).unwrap();
        let xi = spectral_shift_function(&full, &split).unwrap();
        let z = -5.0;
        let lhs = trace_sum(&full.values, &split.expanded(), z, 200).unwrap();
        let integral = xi.integral_inverse_square(z).unwrap();
        assert!((integral + lhs).abs() < 1e-14, "{integral} {lhs}");
    }

    #[test]
    fn near_coincident_entries_share_a_step() {
        let (full, split) = free_spectra(0.0, 1.0, 0.5, 8).unwrap();
        let nudged = split.shifted(1e-12);
        let xi = spectral_shift_function(&full, &nudged).unwrap();
        assert_eq!(xi.range(), (0, 1));
        let xi = spectral_shift_function(&full, &split.shifted(-1e-12)).unwrap();
        assert_eq!(xi.range(), (0, 1));
    }

    #[test]
    fn mismatched_windows_rejected() {
        let (full, split) = free_spectra(0.0, 1.0, 0.5, 20).unwrap();
        let r = spectral_shift_function(&full, &split.truncate(10));
        assert!(matches!(r, Err(Error::Window(_))));
    }
}
