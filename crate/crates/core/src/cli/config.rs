use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::matrix_identity::MatrixInput;
use crate::reconstruction::Method;
use crate::sl_engine::{DirichletProblem, Potential, SolverOptions};

use super::CliError;

/// Largest truncation the CLI accepts.
pub const MAX_TRUNCATION: usize = 100_000;
/// Largest matrix dimension for random suites.
pub const MAX_RANDOM_DIM: usize = 64;

/// Geometric schedule `z_m = -base^m`, `m = m_min..=m_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZSchedule {
    pub base: f64,
    pub m_min: i32,
    pub m_max: i32,
}

impl Default for ZSchedule {
    fn default() -> Self {
        Self { base: 4.0, m_min: 4, m_max: 15 }
    }
}

impl ZSchedule {
    pub fn points(&self) -> Vec<f64> {
        (self.m_min..=self.m_max).map(|m| -self.base.powi(m)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSuite {
    pub count: usize,
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_true")]
    pub complex: bool,
    /// Matrices whose smallest eigenvalue gap (of the matrix or of any minor)
    /// falls below this are redrawn.
    #[serde(default = "default_min_gap")]
    pub min_gap: f64,
}

fn default_n_min() -> usize {
    2
}
fn default_n_max() -> usize {
    12
}
fn default_true() -> bool {
    true
}
fn default_min_gap() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Sample points used for both `x` and `x'` of the Krein check.
    #[serde(default)]
    pub x_points: Vec<f64>,
    #[serde(default)]
    pub krein_z: Vec<f64>,
    /// Spectral points for the trace identity and the step-function integral.
    #[serde(default)]
    pub trace_z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    /// Truncations to sweep, typically a doubling schedule.
    pub k_values: Vec<usize>,
    /// Eigenfunction indices for the `esq` sweep.
    #[serde(default)]
    pub esq_k: Vec<usize>,
    /// Indices for the truncated sine-product sweep.
    #[serde(default)]
    pub sin_k: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative error budget against the direct eigenfunction.
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    /// Cells whose oracle amplitude is below this count as nodes.
    #[serde(default = "default_node_tol")]
    pub node_tol: f64,
}

fn default_rel_tol() -> f64 {
    1e-3
}
fn default_node_tol() -> f64 {
    1e-4
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel_tol: default_rel_tol(), node_tol: default_node_tol() }
    }
}

/// Everything a subcommand may read; each subcommand checks the keys it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Potential>,
    #[serde(default)]
    pub shift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0_grid: Option<Vec<f64>>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<Method>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_schedule: Option<ZSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomSuite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<bool>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_finite(name: &str, xs: &[f64]) -> Result<(), CliError> {
    match xs.iter().find(|x| !x.is_finite()) {
        Some(x) => Err(bad(format!("{name}: {x} is not finite"))),
        None => Ok(()),
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Range checks that the type system cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        if let (Some(a), Some(b)) = (self.a, self.b) {
            check_finite("interval", &[a, b])?;
            if a >= b {
                return Err(bad(format!("interval requires a < b, got [{a}, {b}]")));
            }
        }
        check_finite("shift", &[self.shift])?;
        if let (Some(p), Some(a), Some(b)) = (&self.potential, self.a, self.b) {
            p.validate(a, b).map_err(|e| bad(e.to_string()))?;
        }
        let inside = |x: f64| match (self.a, self.b) {
            (Some(a), Some(b)) => x > a && x < b,
            _ => true,
        };
        if let Some(x0) = self.x0 {
            check_finite("x0", &[x0])?;
            if !inside(x0) {
                return Err(bad(format!("x0 = {x0} is not interior")));
            }
        }
        if let Some(grid) = &self.x0_grid {
            check_finite("x0_grid", grid)?;
            if let Some(x) = grid.iter().find(|&&x| !inside(x)) {
                return Err(bad(format!("x0_grid entry {x} is not interior")));
            }
        }
        if let Some(k) = self.truncation {
            if !(1..=MAX_TRUNCATION).contains(&k) {
                return Err(bad(format!("K = {k} outside [1, {MAX_TRUNCATION}]")));
            }
        }
        if let Some(ks) = &self.k_list {
            if ks.contains(&0) {
                return Err(bad("k_list indices are 1-based"));
            }
            if let (Some(k), Some(&max)) = (self.truncation, ks.iter().max()) {
                if max > k {
                    return Err(bad(format!("k_list entry {max} exceeds K = {k}")));
                }
            }
        }
        if let Some(s) = &self.z_schedule {
            if !(s.base.is_finite() && s.base > 1.0) || s.m_min > s.m_max || s.m_max - s.m_min < 2 {
                return Err(bad("z_schedule needs base > 1 and at least three points"));
            }
        }
        if let Some(s) = &self.solver {
            s.validate().map_err(|e| bad(e.to_string()))?;
        }
        if let Some(t) = &self.tolerances {
            if !(t.rel_tol > 0.0 && t.rel_tol.is_finite() && t.node_tol > 0.0 && t.node_tol.is_finite()) {
                return Err(bad("tolerances must be positive and finite"));
            }
        }
        if let Some(r) = &self.random {
            if r.count == 0 || r.n_min < 2 || r.n_min > r.n_max || r.n_max > MAX_RANDOM_DIM {
                return Err(bad(format!("random suite needs count >= 1 and 2 <= n_min <= n_max <= {MAX_RANDOM_DIM}")));
            }
            if !(r.min_gap >= 0.0 && r.min_gap < 1.0) {
                return Err(bad("random.min_gap must lie in [0, 1)"));
            }
        }
        if let Some(v) = &self.verify {
            check_finite("verify.x_points", &v.x_points)?;
            check_finite("verify.krein_z", &v.krein_z)?;
            check_finite("verify.trace_z", &v.trace_z)?;
            if let Some(x) = v.x_points.iter().find(|&&x| !inside(x)) {
                return Err(bad(format!("verify.x_points entry {x} is not interior")));
            }
        }
        if let Some(c) = &self.convergence {
            if c.k_values.is_empty() || c.k_values.iter().any(|k| !(8..=MAX_TRUNCATION).contains(k)) {
                return Err(bad(format!("convergence.k_values must be non-empty and within [8, {MAX_TRUNCATION}]")));
            }
            if c.esq_k.iter().chain(&c.sin_k).any(|&k| k == 0) {
                return Err(bad("convergence indices are 1-based"));
            }
            if let (Some(&kmax), Some(&kmin)) = (c.esq_k.iter().max(), c.k_values.iter().min()) {
                if kmax > kmin {
                    return Err(bad(format!("convergence.esq_k entry {kmax} exceeds smallest K = {kmin}")));
                }
            }
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<DirichletProblem, CliError> {
        let (a, b) = match (self.a, self.b) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(CliError::Usage("config needs both `a` and `b`".into())),
        };
        let potential = self.potential.clone().unwrap_or(Potential::Zero);
        let p = DirichletProblem::new(a, b, potential).map_err(|e| bad(e.to_string()))?;
        Ok(if self.shift != 0.0 { p.with_shift(self.shift) } else { p })
    }

    pub fn require_truncation(&self) -> Result<usize, CliError> {
        self.truncation.ok_or_else(|| CliError::Usage("config needs `K`".into()))
    }

    pub fn require_x0(&self) -> Result<f64, CliError> {
        self.x0.ok_or_else(|| CliError::Usage("config needs `x0`".into()))
    }

    /// `x0_grid` if given, otherwise the single `x0`.
    pub fn x0_list(&self) -> Result<Vec<f64>, CliError> {
        match (&self.x0_grid, self.x0) {
            (Some(g), _) if !g.is_empty() => Ok(g.clone()),
            (Some(_), _) => Err(CliError::Usage("x0_grid is empty".into())),
            (None, Some(x)) => Ok(vec![x]),
            (None, None) => Err(CliError::Usage("config needs `x0` or `x0_grid`".into())),
        }
    }

    pub fn methods(&self) -> Vec<Method> {
        self.methods.clone().unwrap_or_else(|| vec![Method::Limit, Method::Ratio])
    }

    pub fn solver(&self) -> SolverOptions {
        self.solver.unwrap_or_default()
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.unwrap_or_default()
    }

    pub fn schedule(&self) -> Vec<f64> {
        self.z_schedule.unwrap_or_default().points()
    }
}
