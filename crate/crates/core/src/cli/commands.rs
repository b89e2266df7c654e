use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Error;
use crate::green_trace::{
    check_split_poles, krein_unchecked, spectral_shift_function, trace_identity_from_spectra, trace_sum,
};
use crate::matrix_identity::{
    hermitian_eigensolve, identity_sweep, min_gap, principal_minor, reports_to_csv, IdentityReport, SymmetricMatrix,
    REPORT_HEADER,
};
use crate::numeric::fmt_f64;
use crate::reconstruction::{
    c_via_limit, c_via_ratio, esq_free_ratio, esq_limit_normalized, pair_split_labels, profile_to_csv,
    reconstruct_profile, sin_product_identity, spectral_shift_guard, Method, ProfileRequest, SpectraPair,
};
use crate::sl_engine::{
    dirichlet_eigenvalues_with, eigenfunction_direct, free_spectra, spectrum_to_csv, split_eigenvalues_with,
    split_to_csv, DirichletProblem, Potential, SPECTRUM_HEADER,
};

use super::config::{RunConfig, VerifyConfig};
use super::{is_precondition, CliError};

/// Rendered document plus the cells that missed their budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub failures: Vec<String>,
}

fn numerical(e: Error) -> CliError {
    CliError::Numerical(e)
}

fn failing_cells(reports: &[IdentityReport], prefix: &str) -> Vec<String> {
    reports
        .iter()
        .filter(|r| !r.passes())
        .map(|r| format!("{prefix}k={} ell={} lhs={:e} rhs={:e}", r.k, r.ell, r.lhs, r.rhs))
        .collect()
}

/// Smallest eigenvalue gap of `a` and of all its principal minors.
fn suite_gap(a: &SymmetricMatrix) -> Result<f64, Error> {
    let mut gap = min_gap(&hermitian_eigensolve(a)?.eigenvalues);
    for j in 1..=a.n() {
        gap = gap.min(min_gap(&hermitian_eigensolve(&principal_minor(a, j)?)?.eigenvalues));
    }
    Ok(gap)
}

/// Identity sweep over one matrix, or over a seeded random suite with an
/// extra leading `matrix` column.
pub fn cmd_matrix(cfg: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    if let Some(input) = &cfg.matrix {
        let a = input.to_matrix().map_err(|e| CliError::Config(e.to_string()))?;
        let reports = identity_sweep(&a).map_err(numerical)?;
        return Ok(Outcome { output: reports_to_csv(&reports), failures: failing_cells(&reports, "") });
    }
    let Some(suite) = cfg.random else {
        return Err(CliError::Usage("matrix needs `matrix` or `random` in the config".into()));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut output = format!("matrix,{REPORT_HEADER}\n");
    let mut failures = Vec::new();
    for index in 0..suite.count {
        let a = loop {
            let n = rng.gen_range(suite.n_min..=suite.n_max);
            let a = SymmetricMatrix::random_with(n, &mut rng, suite.complex).map_err(numerical)?;
            if suite_gap(&a).map_err(numerical)? >= suite.min_gap {
                break a;
            }
        };
        let reports = identity_sweep(&a).map_err(numerical)?;
        for line in reports_to_csv(&reports).lines().skip(1) {
            let _ = writeln!(output, "{index},{line}");
        }
        failures.extend(failing_cells(&reports, &format!("matrix={index} ")));
    }
    Ok(Outcome { output, failures })
}

/// Full spectrum, then the split spectrum when `x0` is given. For `V = 0`
/// a `closed_form` column is appended.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let problem = cfg.problem()?;
    let k = cfg.require_truncation()?;
    let opts = cfg.solver();
    let full = dirichlet_eigenvalues_with(&problem, k, &opts).map_err(numerical)?;
    let split = match cfg.x0 {
        Some(x0) => Some(split_eigenvalues_with(&problem, x0, k, &opts).map_err(numerical)?),
        None => None,
    };
    let mut rows: Vec<String> = spectrum_to_csv(&full).lines().skip(1).map(str::to_owned).collect();
    if let Some(s) = &split {
        rows.extend(split_to_csv(s).lines().skip(1).map(str::to_owned));
    }
    let is_free = matches!(problem.potential, Potential::Zero);
    let mut output = String::from(SPECTRUM_HEADER);
    if is_free {
        output.push_str(",closed_form");
        let (a, b) = (problem.a, problem.b);
        let mut exact: Vec<f64> = (1..=k).map(|j| (j as f64 * PI / (b - a)).powi(2)).collect();
        if let (Some(x0), Some(s)) = (cfg.x0, &split) {
            let (_, free_split) = free_spectra(a, b, x0, k).map_err(numerical)?;
            exact.extend(free_split.values.iter().take(s.len()));
        }
        for (row, v) in rows.iter_mut().zip(exact) {
            let _ = write!(row, ",{}", fmt_f64(v + problem.shift));
        }
    }
    output.push('\n');
    for row in &rows {
        output.push_str(row);
        output.push('\n');
    }
    Ok(Outcome { output, failures: Vec::new() })
}

/// Reconstruction table. With oracle columns every cell must meet the
/// relative budget, or be a node on both sides.
pub fn cmd_reconstruct(cfg: &RunConfig, oracle_flag: bool) -> Result<Outcome, CliError> {
    let problem = cfg.problem()?;
    let truncation = cfg.require_truncation()?;
    let k_list = cfg.k_list.clone().unwrap_or_default();
    if k_list.is_empty() {
        return Err(CliError::Usage("k_list must name at least one index".into()));
    }
    let tol = cfg.tolerances();
    let mut req = ProfileRequest::new(cfg.x0_list()?, k_list, cfg.methods(), truncation);
    req.oracle = oracle_flag || cfg.oracle.unwrap_or(false);
    req.schedule = cfg.schedule();
    req.solver = cfg.solver();
    let cells = reconstruct_profile(&problem, &req).map_err(numerical)?;
    let mut failures = Vec::new();
    for c in &cells {
        let id = format!("x0={} k={} method={}", c.x0, c.k, c.method);
        match &c.outcome {
            Err(e) => failures.push(format!("{id}: {e}")),
            Ok(r) => {
                if let Some(o) = r.oracle {
                    let node = o.max(0.0).sqrt() <= tol.node_tol && r.esq.max(0.0).sqrt() <= tol.node_tol;
                    let within = r.rel_err().is_some_and(|e| e <= tol.rel_tol);
                    if !(node || within) {
                        failures.push(format!(
                            "{id}: esq={:e} oracle={o:e} rel_err={:e}",
                            r.esq,
                            r.rel_err().unwrap_or(f64::NAN)
                        ));
                    }
                }
            }
        }
    }
    Ok(Outcome { output: profile_to_csv(&cells, truncation), failures })
}

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyEntry {
    pub check: String,
    pub params: BTreeMap<String, f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub residual: Option<f64>,
    pub budget: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl VerifyEntry {
    fn measured(check: &str, params: BTreeMap<String, f64>, lhs: f64, rhs: f64, residual: f64, budget: f64) -> Self {
        let finite = |v: f64| v.is_finite().then_some(v);
        Self {
            check: check.into(),
            params,
            lhs: finite(lhs),
            rhs: finite(rhs),
            residual: finite(residual),
            budget: finite(budget),
            pass: residual <= budget,
            error: None,
        }
    }

    fn failed(check: &str, params: BTreeMap<String, f64>, e: &Error) -> Self {
        Self {
            check: check.into(),
            params,
            lhs: None,
            rhs: None,
            residual: None,
            budget: None,
            pass: false,
            error: Some(e.to_string()),
        }
    }
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_owned(), v)).collect()
}

fn default_verify(problem: &DirichletProblem) -> VerifyConfig {
    let (a, l) = (problem.a, problem.length());
    VerifyConfig {
        x_points: (1..=5).map(|i| a + l * i as f64 / 6.0).collect(),
        krein_z: vec![-5.0, -20.0, -50.0],
        trace_z: vec![-5.0, -20.0],
    }
}

/// Krein, trace and step-function checks. A sample point on a pole of
/// either operator aborts the run as a precondition violation.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let problem = cfg.problem()?;
    let x0 = cfg.require_x0()?;
    let opts = cfg.solver();
    let v = cfg.verify.clone().unwrap_or_else(|| default_verify(&problem));
    let mut entries = Vec::new();

    for &z in &v.krein_z {
        check_split_poles(&problem, x0, z, &opts).map_err(numerical)?;
        for &x in &v.x_points {
            for &xp in &v.x_points {
                let p = params(&[("x0", x0), ("z", z), ("x", x), ("x_prime", xp)]);
                entries.push(match krein_unchecked(&problem, x0, z, x, xp, opts.grid_size) {
                    Ok(c) => VerifyEntry::measured("krein", p, c.lhs, c.rhs, c.residual, c.budget()),
                    Err(e) => VerifyEntry::failed("krein", p, &e),
                });
            }
        }
    }

    if !v.trace_z.is_empty() {
        let k = cfg.require_truncation()?;
        let full = dirichlet_eigenvalues_with(&problem, k, &opts).map_err(numerical)?;
        let split = split_eigenvalues_with(&problem, x0, k, &opts).map_err(numerical)?;
        let kk = k as f64;
        for &z in &v.trace_z {
            let p = params(&[("x0", x0), ("z", z), ("K", kk)]);
            entries.push(match trace_identity_from_spectra(&problem, x0, z, &full, &split, k, &opts) {
                Ok(t) => VerifyEntry::measured("trace", p, t.lhs, t.rhs, t.residual, t.budget()),
                Err(e) if is_precondition(&e) => return Err(numerical(e)),
                Err(e) => VerifyEntry::failed("trace", p, &e),
            });
        }
        match spectral_shift_function(&full, &split) {
            Ok(xi) => {
                let (lo, hi) = xi.range();
                let below = xi.e0().map_or(0, |e0| xi.value(e0 - 1.0));
                let violation = (below.abs() + (-lo).max(0) + (hi - 1).max(0)) as f64;
                entries.push(VerifyEntry::measured(
                    "ssf_steps",
                    params(&[("x0", x0), ("K", kk)]),
                    lo as f64,
                    hi as f64,
                    violation,
                    0.0,
                ));
                let expanded = split.expanded();
                for &z in &v.trace_z {
                    let p = params(&[("x0", x0), ("z", z), ("K", kk)]);
                    let tail = 1.0 / (full.values[k - 1] - z);
                    entries.push(match (xi.integral_inverse_square(z), trace_sum(&full.values, &expanded, z, k)) {
                        (Ok(int), Ok(sum)) => {
                            VerifyEntry::measured("ssf_integral", p, int, -sum, (int + sum).abs(), tail)
                        }
                        (Err(e), _) | (_, Err(e)) => VerifyEntry::failed("ssf_integral", p, &e),
                    });
                }
            }
            Err(e) => entries.push(VerifyEntry::failed("ssf_steps", params(&[("x0", x0), ("K", kk)]), &e)),
        }
    }

    let failures = entries
        .iter()
        .filter(|e| !e.pass)
        .map(|e| format!("{} {:?} residual={:?} budget={:?}", e.check, e.params, e.residual, e.budget))
        .collect();
    let mut output = serde_json::to_string_pretty(&entries).map_err(|e| CliError::Io(e.to_string()))?;
    output.push('\n');
    Ok(Outcome { output, failures })
}

/// `(K, method, value, error)` rows over the configured truncations.
///
/// Methods are `sin_product_k<k>`, `c_limit`, `c_ratio`, `esq_limit_k<k>`,
/// `esq_ratio_k<k>` and `gap_k<k>` (limit minus ratio). References are the
/// closed forms for `V = 0`; otherwise `C` is compared with the ratio value
/// at the largest K and `esq` with the direct eigenfunction.
pub fn cmd_convergence(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let conv =
        cfg.convergence.clone().ok_or_else(|| CliError::Usage("convergence needs a `convergence` section".into()))?;
    let mut ks = conv.k_values.clone();
    ks.sort_unstable();
    ks.dedup();
    let kmax = *ks.last().expect("validated non-empty");
    let mut output = String::from("K,method,value,error\n");
    let mut failures = Vec::new();
    let mut row = |k: usize, method: &str, value: f64, error: f64| {
        let _ = writeln!(output, "{k},{method},{},{}", fmt_f64(value), fmt_f64(error));
    };

    for &k in &ks {
        for &j in &conv.sin_k {
            let v = sin_product_identity(j, k);
            let target = if j % 2 == 1 { 0.5 } else { -0.5 };
            row(k, &format!("sin_product_k{j}"), v, (v - target).abs());
        }
    }

    if cfg.a.is_some() && cfg.x0.is_some() {
        let problem = cfg.problem()?;
        let x0 = cfg.require_x0()?;
        let opts = cfg.solver();
        let schedule = cfg.schedule();
        let free = matches!(problem.potential, Potential::Zero) && problem.shift == 0.0;
        let (a, b) = (problem.a, problem.b);
        let full_pair = SpectraPair::compute(&problem, x0, kmax, &opts).map_err(numerical)?;
        let mut esq_ref = BTreeMap::new();
        for &j in &conv.esq_k {
            let value = if free {
                2.0 / (b - a) * (j as f64 * PI * (x0 - a) / (b - a)).sin().powi(2)
            } else {
                let e = eigenfunction_direct(&problem, j, opts.grid_size).map_err(numerical)?;
                e.value_at(&problem, x0).map_err(numerical)?.powi(2)
            };
            esq_ref.insert(j, value);
        }
        let mut rows = Vec::new();
        for &k in &ks {
            let pair = spectral_shift_guard(&full_pair.truncated(k));
            let labels = pair_split_labels(&pair.split, pair.a, pair.b).map_err(numerical)?;
            let limit = c_via_limit(&pair, &schedule);
            let ratio = c_via_ratio(&pair, &labels);
            rows.push((k, pair, labels, limit, ratio));
        }
        let c_ref = if free {
            Some((x0 - a) * (b - x0) / (b - a))
        } else {
            rows.last().and_then(|r| r.4.as_ref().ok()).map(|r| r.c)
        };
        for (k, pair, labels, limit, ratio) in &rows {
            let err = |v: f64| c_ref.map_or(f64::NAN, |c| (v - c).abs());
            match limit {
                Ok(n) => row(*k, "c_limit", n.c, err(n.c)),
                Err(e) => failures.push(format!("K={k} c_limit: {e}")),
            }
            match ratio {
                Ok(n) => row(*k, "c_ratio", n.c, err(n.c)),
                Err(e) => failures.push(format!("K={k} c_ratio: {e}")),
            }
            for &j in &conv.esq_k {
                let reference = esq_ref[&j];
                let by_limit = limit.as_ref().map_err(Clone::clone).and_then(|n| esq_limit_normalized(pair, j, n));
                let by_ratio = esq_free_ratio(pair, labels, j);
                for (method, r) in [(Method::Limit, &by_limit), (Method::Ratio, &by_ratio)] {
                    match r {
                        Ok(r) => row(*k, &format!("esq_{method}_k{j}"), r.esq, (r.esq - reference).abs()),
                        Err(e) => failures.push(format!("K={k} esq_{method}_k{j}: {e}")),
                    }
                }
                if let (Ok(l), Ok(r)) = (&by_limit, &by_ratio) {
                    let gap = l.esq - r.esq;
                    row(*k, &format!("gap_k{j}"), gap, gap.abs());
                }
            }
        }
    } else if !conv.esq_k.is_empty() {
        return Err(CliError::Usage("esq sweeps need `a`, `b` and `x0`".into()));
    }
    Ok(Outcome { output, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> RunConfig {
        RunConfig::from_json(json).unwrap()
    }

    #[test]
    fn two_by_two_matrix() {
        let c = cfg(r#"{"matrix":{"n":2,"real":[[2,1],[1,2]]}}"#);
        let out = cmd_matrix(&c, 0).unwrap();
        assert_eq!(out.output.lines().count(), 5);
        assert!(out.failures.is_empty());
    }

    #[test]
    fn repeated_eigenvalue_is_flagged_not_failed() {
        let c = cfg(r#"{"matrix":{"n":3,"real":[[1,0,0],[0,1,0],[0,0,2]]}}"#);
        let out = cmd_matrix(&c, 0).unwrap();
        assert!(out.failures.is_empty());
        assert!(out.output.contains(",false"));
    }

    #[test]
    fn random_suite_is_seeded() {
        let c = cfg(r#"{"random":{"count":3,"n_max":5}}"#);
        let a = cmd_matrix(&c, 9).unwrap();
        let b = cmd_matrix(&c, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.failures.is_empty());
        assert!(a.output.starts_with("matrix,k,ell"));
    }

    #[test]
    fn free_spectrum_with_closed_form() {
        let c = cfg(r#"{"a":0,"b":3.141592653589793,"K":8}"#);
        let out = cmd_spectrum(&c).unwrap().output;
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("k,lambda,multiplicity,tag,residual,closed_form"));
        for (i, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            let v: f64 = f[1].parse().unwrap();
            let exact: f64 = f[5].parse().unwrap();
            assert_eq!(exact, ((i + 1) * (i + 1)) as f64);
            assert!((v - exact).abs() <= 1e-10 * exact);
        }
    }

    #[test]
    fn empty_k_list_is_usage_error() {
        let c = cfg(r#"{"a":0,"b":1,"x0":0.5,"K":16,"k_list":[]}"#);
        assert_eq!(cmd_reconstruct(&c, false).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn verify_pole_is_precondition() {
        let c = cfg(&format!(r#"{{"a":0,"b":1,"x0":0.5,"verify":{{"x_points":[0.3],"krein_z":[{}]}}}}"#, PI * PI));
        assert_eq!(cmd_verify(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn sin_product_sweep() {
        let c = cfg(r#"{"convergence":{"k_values":[100,200,400],"sin_k":[1]}}"#);
        let out = cmd_convergence(&c).unwrap().output;
        let errs: Vec<f64> = out.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(errs.len(), 3);
        assert!(errs[0] > errs[1] && errs[1] > errs[2]);
        assert!((errs[0] / errs[1] - 2.0).abs() < 0.1);
    }
}
