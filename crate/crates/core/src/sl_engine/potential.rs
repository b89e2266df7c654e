use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One term `amplitude * cos(frequency * x + phase)` of a trigonometric sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Real potential `V` on `[a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Potential {
    Zero,
    Constant {
        value: f64,
    },
    /// `Σ coeffs[i] x^i`.
    Polynomial {
        coeffs: Vec<f64>,
    },
    #[serde(rename = "trigsum")]
    TrigSum {
        terms: Vec<TrigTerm>,
    },
    /// Linear interpolation between `(x, V(x))` knots.
    #[serde(rename = "piecewise")]
    PiecewiseLinear {
        knots: Vec<[f64; 2]>,
    },
}

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_26,
];

impl Potential {
    pub fn cos_2pi() -> Self {
        Potential::TrigSum {
            terms: vec![TrigTerm { amplitude: 1.0, frequency: 2.0 * std::f64::consts::PI, phase: 0.0 }],
        }
    }

    pub fn linear(slope: f64, intercept: f64) -> Self {
        Potential::Polynomial { coeffs: vec![intercept, slope] }
    }

    /// Checks finiteness and, for piecewise-linear data, that the knots are
    /// strictly increasing and cover `[a, b]`.
    pub fn validate(&self, a: f64, b: f64) -> Result<()> {
        fn finite(mut xs: impl Iterator<Item = f64>) -> bool {
            xs.all(f64::is_finite)
        }
        match self {
            Potential::Zero => Ok(()),
            Potential::Constant { value } => {
                if value.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidPotential("constant is not finite".into()))
                }
            }
            Potential::Polynomial { coeffs } => {
                if finite(coeffs.iter().copied()) {
                    Ok(())
                } else {
                    Err(Error::InvalidPotential("polynomial coefficient is not finite".into()))
                }
            }
            Potential::TrigSum { terms } => {
                if finite(terms.iter().flat_map(|t| [t.amplitude, t.frequency, t.phase])) {
                    Ok(())
                } else {
                    Err(Error::InvalidPotential("trigonometric term is not finite".into()))
                }
            }
            Potential::PiecewiseLinear { knots } => {
                if knots.len() < 2 {
                    return Err(Error::InvalidPotential("need at least two knots".into()));
                }
                if !finite(knots.iter().flat_map(|k| [k[0], k[1]])) {
                    return Err(Error::InvalidPotential("knot is not finite".into()));
                }
                if knots.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(Error::InvalidPotential("knots must be strictly increasing".into()));
                }
                if knots[0][0] > a || knots[knots.len() - 1][0] < b {
                    return Err(Error::InvalidPotential(format!("knots do not cover [{a}, {b}]")));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Constant { value } => *value,
            Potential::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c),
            Potential::TrigSum { terms } => terms.iter().map(|t| t.amplitude * (t.frequency * x + t.phase).cos()).sum(),
            Potential::PiecewiseLinear { knots } => {
                let i = knots.partition_point(|k| k[0] <= x);
                if i == 0 {
                    knots[0][1]
                } else if i == knots.len() {
                    knots[knots.len() - 1][1]
                } else {
                    let [x0, v0] = knots[i - 1];
                    let [x1, v1] = knots[i];
                    v0 + (v1 - v0) * (x - x0) / (x1 - x0)
                }
            }
        }
    }

    /// Interior kink locations of a piecewise-linear potential.
    pub fn kinks_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            Potential::PiecewiseLinear { knots } => knots.iter().map(|k| k[0]).filter(|&x| x > lo && x < hi).collect(),
            _ => Vec::new(),
        }
    }

    /// Mean value of `V` over `[x0, x1]`.
    pub fn average(&self, x0: f64, x1: f64) -> f64 {
        let h = x1 - x0;
        if h == 0.0 {
            return self.eval(x0);
        }
        match self {
            Potential::Zero => 0.0,
            Potential::Constant { value } => *value,
            Potential::Polynomial { coeffs } if coeffs.len() <= 16 => gauss_average(|x| self.eval(x), x0, x1),
            Potential::Polynomial { .. } => {
                // high degree: split the cell so the 8-point rule stays accurate
                let m = 4;
                (0..m)
                    .map(|i| {
                        let l = x0 + h * i as f64 / m as f64;
                        let r = x0 + h * (i + 1) as f64 / m as f64;
                        gauss_average(|x| self.eval(x), l, r)
                    })
                    .sum::<f64>()
                    / m as f64
            }
            Potential::TrigSum { terms } => {
                let mid = 0.5 * (x0 + x1);
                terms
                    .iter()
                    .map(|t| {
                        let arg = 0.5 * t.frequency * h;
                        let sinc = if arg.abs() < 1e-8 { 1.0 - arg * arg / 6.0 } else { arg.sin() / arg };
                        t.amplitude * (t.frequency * mid + t.phase).cos() * sinc
                    })
                    .sum()
            }
            Potential::PiecewiseLinear { .. } => {
                let mut pts = vec![x0];
                pts.extend(self.kinks_in(x0, x1));
                pts.push(x1);
                pts.windows(2).map(|w| 0.5 * (self.eval(w[0]) + self.eval(w[1])) * (w[1] - w[0])).sum::<f64>() / h
            }
        }
    }
}

fn gauss_average<F: Fn(f64) -> f64>(f: F, x0: f64, x1: f64) -> f64 {
    let mid = 0.5 * (x0 + x1);
    let half = 0.5 * (x1 - x0);
    0.5 * GL_NODES.iter().zip(GL_WEIGHTS).map(|(&t, w)| w * f(mid + half * t)).sum::<f64>()
}
