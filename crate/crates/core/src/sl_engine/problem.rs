use serde::{Deserialize, Serialize};

use super::potential::Potential;
use crate::error::{Error, Result};
use crate::numeric::fnv1a;

/// `-ψ'' + (V + shift) ψ` on `[a, b]` with Dirichlet conditions at both ends.
///
/// A nonzero `shift` is part of the problem identity (it changes the
/// fingerprint) and is never folded into `potential`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletProblem {
    pub a: f64,
    pub b: f64,
    pub potential: Potential,
    #[serde(default)]
    pub shift: f64,
}

impl DirichletProblem {
    pub fn new(a: f64, b: f64, potential: Potential) -> Result<Self> {
        let p = Self { a, b, potential, shift: 0.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn free(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, Potential::Zero)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite()) || self.b - self.a <= 0.0 {
            return Err(Error::Domain(format!("need finite a < b, got [{}, {}]", self.a, self.b)));
        }
        if !self.shift.is_finite() {
            return Err(Error::Domain("shift must be finite".into()));
        }
        self.potential.validate(self.a, self.b)
    }

    /// Same problem with `c` added to the recorded shift.
    pub fn with_shift(&self, c: f64) -> Self {
        Self { shift: self.shift + c, ..self.clone() }
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Effective potential `V(x) + shift`.
    pub fn v(&self, x: f64) -> f64 {
        self.potential.eval(x) + self.shift
    }

    pub fn cell_average(&self, x0: f64, x1: f64) -> f64 {
        self.potential.average(x0, x1) + self.shift
    }

    /// The same differential expression on a subinterval `[lo, hi]`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= self.a && hi <= self.b && lo < hi) {
            return Err(Error::Domain(format!("[{lo}, {hi}] is not a subinterval of [{}, {}]", self.a, self.b)));
        }
        Ok(Self { a: lo, b: hi, ..self.clone() })
    }

    /// Checks that `x0` is an interior point.
    pub fn check_split_point(&self, x0: f64) -> Result<()> {
        if x0.is_finite() && x0 > self.a && x0 < self.b {
            Ok(())
        } else {
            Err(Error::Domain(format!("split point {x0} is not inside ({}, {})", self.a, self.b)))
        }
    }

    pub fn check_point(&self, x: f64) -> Result<()> {
        if x.is_finite() && x >= self.a && x <= self.b {
            Ok(())
        } else {
            Err(Error::Domain(format!("point {x} is outside [{}, {}]", self.a, self.b)))
        }
    }

    /// Stable identifier of the problem data.
    pub fn fingerprint(&self) -> u64 {
        let json = serde_json::to_string(self).unwrap_or_default();
        fnv1a(json.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert!(DirichletProblem::free(1.0, 1.0).is_err());
        assert!(DirichletProblem::free(0.0, f64::INFINITY).is_err());
        let p = DirichletProblem::free(0.0, 1.0).unwrap();
        assert!(p.check_split_point(0.0).is_err());
        assert!(p.check_split_point(0.5).is_ok());
        assert!(p.restrict(0.2, 1.5).is_err());
    }

    #[test]
    fn shift_is_recorded() {
        let p = DirichletProblem::free(0.0, 1.0).unwrap();
        let q = p.with_shift(0.37);
        assert_eq!(q.shift, 0.37);
        assert_eq!(q.potential, Potential::Zero);
        assert_ne!(p.fingerprint(), q.fingerprint());
        assert_eq!(p.fingerprint(), DirichletProblem::free(0.0, 1.0).unwrap().fingerprint());
        assert!((q.v(0.3) - 0.37).abs() < 1e-15);
    }
}
