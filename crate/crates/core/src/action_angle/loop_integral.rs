//! `I = (1/2π) ∮ p dq` over one period of a compact factor `(qᵢ, pᵢ)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ActionAngleError;
use crate::dynamics::{integrate_vertical, IntegratorConfig};
use crate::phase_space::{PhasePoint, SystemSpec};

/// Where to start the orbit and which factor to close.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelData {
    pub start: PhasePoint,
    /// Zero-based degree of freedom whose `(q, p)` plane carries the loop.
    pub dof: usize,
    /// Longest run allowed before giving up on a return.
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopAction {
    pub action: f64,
    pub period: f64,
    /// Distance between the interpolated return point and the start.
    pub closure_gap: f64,
}

/// Lagrange weights at `x` for nodes `s`.
fn lagrange(s: [f64; 3], x: f64) -> [f64; 3] {
    [
        (x - s[1]) * (x - s[2]) / ((s[0] - s[1]) * (s[0] - s[2])),
        (x - s[0]) * (x - s[2]) / ((s[1] - s[0]) * (s[1] - s[2])),
        (x - s[0]) * (x - s[1]) / ((s[2] - s[0]) * (s[2] - s[1])),
    ]
}

fn interp(w: [f64; 3], v: [f64; 3]) -> f64 {
    w[0] * v[0] + w[1] * v[1] + w[2] * v[2]
}

/// Root of the quadratic through `(s, f)` inside `[s[1], s[2]]`, where `f`
/// changes sign from `f[1] < 0` to `f[2] ≥ 0`.
fn crossing(s: [f64; 3], f: [f64; 3]) -> f64 {
    // f(x) = a (x - s1)^2 + b (x - s1) + c
    let (h0, h2) = (s[0] - s[1], s[2] - s[1]);
    let d0 = (f[0] - f[1]) / h0;
    let d2 = (f[2] - f[1]) / h2;
    let a = (d2 - d0) / (h2 - h0);
    let b = d0 - a * h0;
    let c = f[1];
    let linear = s[1] - c * h2 / (f[2] - f[1]);
    if a.abs() < 1e-300 {
        return linear;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return linear;
    }
    let sq = disc.sqrt();
    // numerically stable pair of roots
    let qv = -0.5 * (b + b.signum() * sq);
    let roots = [qv / a, if qv != 0.0 { c / qv } else { f64::NAN }];
    roots
        .into_iter()
        .filter(|r| r.is_finite() && *r >= -1e-12 * h2 && *r <= h2 * (1.0 + 1e-12))
        .map(|r| s[1] + r)
        .next()
        .unwrap_or(linear)
}

/// Integrates one period of the factor orbit through `level.start`.
///
/// The period ends where the orbit returns to the section through the start
/// point orthogonal to the initial velocity, located by quadratic
/// interpolation. The loop integral is the trapezoidal rule on `pᵢ q̇ᵢ`.
pub fn action_loop_integral(system: &SystemSpec, level: &LevelData, cfg: &IntegratorConfig) -> Result<LoopAction, ActionAngleError> {
    let i = level.dof;
    let m = system.m;
    assert!(i < m, "factor index out of range");
    let x0 = &level.start;
    let g0 = system.hamiltonian.gradient(&x0.coords()).map_err(super::domain)?;
    let z0 = [x0.q[i], x0.p[i]];
    let v0 = [g0.dp[i], -g0.dq[i]];
    if v0[0] == 0.0 && v0[1] == 0.0 {
        return Err(ActionAngleError::NotClosedOrbit { horizon: 0.0 });
    }
    let cfg = cfg.clone().with_record_every(1);
    let tr = integrate_vertical(system, x0, x0.t + level.horizon, &cfg)?;
    let n = tr.samples.len();
    let s: Vec<f64> = tr.samples.iter().map(|x| x.s).collect();
    let q: Vec<f64> = tr.samples.iter().map(|x| x.coords[1 + i]).collect();
    let p: Vec<f64> = tr.samples.iter().map(|x| x.coords[1 + m + i]).collect();
    let sigma: Vec<f64> = (0..n).map(|j| (q[j] - z0[0]) * v0[0] + (p[j] - z0[1]) * v0[1]).collect();

    let j = (2..n)
        .find(|&j| sigma[j - 1] < 0.0 && sigma[j] >= 0.0)
        .ok_or(ActionAngleError::NotClosedOrbit { horizon: level.horizon })?;
    let nodes = [s[j - 2], s[j - 1], s[j]];
    let period = crossing(nodes, [sigma[j - 2], sigma[j - 1], sigma[j]]);
    let w = lagrange(nodes, period);
    let zq = interp(w, [q[j - 2], q[j - 1], q[j]]);
    let zp = interp(w, [p[j - 2], p[j - 1], p[j]]);
    let closure_gap = ((zq - z0[0]).powi(2) + (zp - z0[1]).powi(2)).sqrt();
    let scale = (z0[0].powi(2) + z0[1].powi(2)).sqrt().max(1.0);
    if closure_gap > 1e-6 * scale {
        return Err(ActionAngleError::NonConvergedPeriod { gap: closure_gap });
    }

    let integrand = |k: usize| -> Result<f64, ActionAngleError> {
        let g = system.hamiltonian.gradient(&tr.samples[k].coords).map_err(super::domain)?;
        Ok(p[k] * g.dp[i])
    };
    let f: Vec<f64> = (0..=j).map(integrand).collect::<Result<_, _>>()?;
    let mut area = 0.0;
    for k in 1..j {
        area += 0.5 * (s[k] - s[k - 1]) * (f[k] + f[k - 1]);
    }
    let f_end = interp(w, [f[j - 2], f[j - 1], f[j]]);
    area += 0.5 * (period - s[j - 1]) * (f[j - 1] + f_end);
    Ok(LoopAction {
        action: area / (2.0 * PI),
        period,
        closure_gap,
    })
}
