//! The normalization constant `C(x0) = G(0, x0, x0)` from eigenvalues alone.

use serde::{Deserialize, Serialize};

use super::pair::{PairedLabels, SpectraPair};
use crate::error::{Error, Result};
use crate::numeric::SignedLog;

/// `z_m = −4^m` for `m = 4..=15`.
pub fn default_schedule() -> Vec<f64> {
    (4..=15).map(|m| -(4.0f64.powi(m))).collect()
}

/// `½ |z|^{-1/2} Π(1 − z/λ_n) / Π(1 − z/μ_ℓ)^{m_ℓ}` over the truncated pair.
///
/// For the untruncated products this tends to `C(x0)` as `z → −∞`, because
/// `|z|^{1/2} G(z, x0, x0) → 1/2`.
pub fn limit_sequence_value(pair: &SpectraPair, z: f64) -> SignedLog {
    let mut p = SignedLog::from_value(0.5);
    p.log_abs -= 0.5 * z.abs().ln();
    for &l in &pair.full.values {
        p.mul(1.0 - z / l);
    }
    for (&m, &mult) in pair.split.values.iter().zip(&pair.split.multiplicities) {
        for _ in 0..mult {
            p.div(1.0 - z / m);
        }
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub z: f64,
    pub value: f64,
    /// False when the step from the previous row reverses direction.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitNormalization {
    pub c: f64,
    /// Raw value at the flattest point of the schedule.
    pub plateau: f64,
    /// Disagreement between the extrapolated and plateau values, plus the
    /// local variation of the table around the plateau.
    pub spread: f64,
    pub extrapolated: bool,
    pub table: Vec<LimitRow>,
}

/// Solves `v_i = c + α u_i + β w_i` for three points.
fn fit3(u: [f64; 3], w: [f64; 3], v: [f64; 3]) -> Option<f64> {
    // eliminate c, then α
    let (du1, dw1, dv1) = (u[1] - u[0], w[1] - w[0], v[1] - v[0]);
    let (du2, dw2, dv2) = (u[2] - u[1], w[2] - w[1], v[2] - v[1]);
    let det = du1 * dw2 - du2 * dw1;
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let alpha = (dv1 * dw2 - dv2 * dw1) / det;
    let beta = (du1 * dv2 - du2 * dv1) / det;
    let c = v[1] - alpha * u[1] - beta * w[1];
    c.is_finite().then_some(c)
}

/// Evaluates the limit sequence along `schedule` and extrapolates.
///
/// The truncated sequence is `C + α/|z| + β|z| + …`: the first correction
/// comes from the potential near `x0`, the second from the missing factors
/// beyond the truncation. The point where the table is flattest is fitted
/// together with its two neighbours to remove both.
pub fn c_via_limit(pair: &SpectraPair, schedule: &[f64]) -> Result<LimitNormalization> {
    pair.check_guarded()?;
    let floor = pair.full.values.iter().chain(&pair.split.values).copied().fold(f64::INFINITY, f64::min);
    let mut zs: Vec<f64> = schedule.iter().copied().filter(|&z| z < 0.0 && z < floor - 1.0).collect();
    zs.sort_by(|x, y| y.total_cmp(x));
    if zs.len() < 3 {
        return Err(Error::Window(format!(
            "limit schedule needs at least three points below the spectrum (lowest entry {floor})"
        )));
    }
    let values: Vec<f64> = zs.iter().map(|&z| limit_sequence_value(pair, z).value()).collect();
    let mut table = Vec::with_capacity(zs.len());
    for i in 0..zs.len() {
        let monotone = i < 2 || (values[i] - values[i - 1]) * (values[i - 1] - values[i - 2]) >= 0.0;
        table.push(LimitRow { z: zs[i], value: values[i], monotone });
    }
    let best = (1..zs.len() - 1)
        .min_by(|&i, &j| {
            let di = (values[i + 1] - values[i - 1]).abs();
            let dj = (values[j + 1] - values[j - 1]).abs();
            di.total_cmp(&dj)
        })
        .expect("at least three points");
    let variation = 0.5 * (values[best + 1] - values[best - 1]).abs();
    let plateau = values[best];
    let idx = [best - 1, best, best + 1];
    let u = idx.map(|i| 1.0 / zs[i].abs());
    let w = idx.map(|i| zs[i].abs());
    let v = idx.map(|i| values[i]);
    match fit3(u, w, v) {
        Some(c) if (c - plateau).abs() <= 4.0 * variation + 1e-14 * plateau.abs() => {
            Ok(LimitNormalization { c, plateau, spread: (c - plateau).abs(), extrapolated: true, table })
        }
        _ => Ok(LimitNormalization { c: plateau, plateau, spread: variation, extrapolated: false, table }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioNormalization {
    pub c: f64,
    /// Leading-order size of the omitted factors.
    pub tail_estimate: f64,
}

/// `C0 · Π μ_ℓ/μ_ℓ⁰ ÷ Π λ_k/λ_k⁰` with `C0 = (x0−a)(b−x0)/(b−a)`; each
/// split entry is paired with the free eigenvalue carrying the same label.
pub fn c_via_ratio(pair: &SpectraPair, labels: &PairedLabels) -> Result<RatioNormalization> {
    pair.check_guarded()?;
    let (a, b, x0) = (pair.a, pair.b, pair.x0);
    let c0 = (x0 - a) * (b - x0) / (b - a);
    let mut p = SignedLog::from_value(c0);
    let l = b - a;
    let mut last_full = 0.0;
    for (i, &lam) in pair.full.values.iter().enumerate() {
        let free = ((i + 1) as f64 * std::f64::consts::PI / l).powi(2);
        let r = lam / free;
        if r == 0.0 {
            return Err(Error::ZeroRatio(i + 1));
        }
        p.div(r);
        last_full = r;
    }
    let mut last_side = [(0usize, 1.0f64); 2];
    for lab in &labels.labels {
        let r = lab.value / lab.free_value;
        if r == 0.0 {
            return Err(Error::ZeroRatio(lab.label));
        }
        p.mul(r);
        let s = lab.side as usize;
        if lab.index > last_side[s].0 {
            last_side[s] = (lab.index, r);
        }
    }
    let c = p.value();
    // the factors behave like 1 + c/n², so the tail beyond n is ≈ n |ln r_n|
    let mut tail = pair.full.len() as f64 * last_full.abs().ln().abs();
    for (n, r) in last_side {
        tail += n as f64 * r.abs().ln().abs();
    }
    Ok(RatioNormalization { c, tail_estimate: c.abs() * tail })
}
