//! Explicit Runge–Kutta steppers for autonomous systems `y' = f(y)`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{IntegrationError, IntegratorConfig, Method};
use crate::expr::EvalError;

pub(crate) type Rhs<'a> = dyn Fn(&[f64], &mut [f64]) -> Result<(), EvalError> + 'a;

/// Accepted/rejected step counts and step-size extremes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub min_step: f64,
    pub max_step: f64,
}

impl StepStats {
    fn record(&mut self, h: f64) {
        let h = h.abs();
        if self.accepted == 0 {
            self.min_step = h;
            self.max_step = h;
        } else {
            self.min_step = self.min_step.min(h);
            self.max_step = self.max_step.max(h);
        }
        self.accepted += 1;
    }
}

pub(crate) struct Problem<'a> {
    pub rhs: &'a Rhs<'a>,
    /// Components watched by the blowup guard.
    pub norm: Range<usize>,
    /// Components entering the adaptive error norm.
    pub error: Range<usize>,
}

fn eval(problem: &Problem, s: f64, y: &[f64], out: &mut [f64]) -> Result<(), IntegrationError> {
    match (problem.rhs)(y, out) {
        Ok(()) => Ok(()),
        Err(EvalError::NonFinite(_)) => Err(IntegrationError::BlowupDetected {
            s,
            norm: f64::INFINITY,
        }),
        Err(e) => Err(IntegrationError::Eval(e)),
    }
}

fn guard(problem: &Problem, cfg: &IntegratorConfig, s: f64, y: &[f64]) -> Result<(), IntegrationError> {
    let norm = y[problem.norm.clone()]
        .iter()
        .fold(0.0_f64, |a, v| if v.is_finite() { a.max(v.abs()) } else { f64::INFINITY });
    if !(norm <= cfg.blowup_threshold) || y.iter().any(|v| !v.is_finite()) {
        return Err(IntegrationError::BlowupDetected { s, norm });
    }
    Ok(())
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])], out: &mut [f64]) {
    for i in 0..y.len() {
        out[i] = y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>();
    }
}

/// Integrates from parameter 0 to `span` (either sign). `observe` sees the
/// initial state and every accepted step.
pub(crate) fn solve(
    problem: &Problem,
    y0: &[f64],
    span: f64,
    cfg: &IntegratorConfig,
    observe: &mut dyn FnMut(f64, &[f64]) -> Result<(), IntegrationError>,
) -> Result<StepStats, IntegrationError> {
    cfg.validate()?;
    guard(problem, cfg, 0.0, y0)?;
    observe(0.0, y0)?;
    if span == 0.0 {
        return Ok(StepStats::default());
    }
    match cfg.method {
        Method::Rk4 { step } => rk4(problem, y0, span, step, cfg, observe),
        Method::Dopri5 { atol, rtol } => dopri5(problem, y0, span, atol, rtol, cfg, observe),
    }
}

fn rk4(
    problem: &Problem,
    y0: &[f64],
    span: f64,
    step: f64,
    cfg: &IntegratorConfig,
    observe: &mut dyn FnMut(f64, &[f64]) -> Result<(), IntegrationError>,
) -> Result<StepStats, IntegrationError> {
    // N equal steps landing exactly on the endpoint; the slack absorbs
    // spans that are an integer number of steps up to round-off
    let n_steps = ((span.abs() / step) * (1.0 - 1e-12)).ceil().max(1.0);
    if n_steps > cfg.max_steps as f64 {
        return Err(IntegrationError::StepLimitExceeded {
            steps: cfg.max_steps,
            s: 0.0,
        });
    }
    let n_steps = n_steps as usize;
    let h = span / n_steps as f64;
    let d = y0.len();
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let mut stats = StepStats::default();
    for i in 0..n_steps {
        let s = i as f64 * h;
        eval(problem, s, &y, &mut k1)?;
        axpy(&y, 0.5 * h, &[(1.0, &k1)], &mut tmp);
        eval(problem, s, &tmp, &mut k2)?;
        axpy(&y, 0.5 * h, &[(1.0, &k2)], &mut tmp);
        eval(problem, s, &tmp, &mut k3)?;
        axpy(&y, h, &[(1.0, &k3)], &mut tmp);
        eval(problem, s, &tmp, &mut k4)?;
        for j in 0..d {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let s_next = if i + 1 == n_steps { span } else { (i + 1) as f64 * h };
        guard(problem, cfg, s_next, &y)?;
        stats.record(h);
        observe(s_next, &y)?;
    }
    Ok(stats)
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dopri5(
    problem: &Problem,
    y0: &[f64],
    span: f64,
    atol: f64,
    rtol: f64,
    cfg: &IntegratorConfig,
    observe: &mut dyn FnMut(f64, &[f64]) -> Result<(), IntegrationError>,
) -> Result<StepStats, IntegrationError> {
    let d = y0.len();
    let dir = span.signum();
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; d]; 7];
    let mut tmp = vec![0.0; d];
    let mut y_new = vec![0.0; d];
    let mut s = 0.0_f64;
    let mut h = (1e-2_f64).min(span.abs()) * dir;
    let mut stats = StepStats::default();
    let mut attempts = 0usize;
    eval(problem, s, &y, &mut k[0])?;
    while (span - s) * dir > 0.0 {
        attempts += 1;
        if attempts > cfg.max_steps {
            return Err(IntegrationError::StepLimitExceeded { steps: cfg.max_steps, s });
        }
        let last = (s + h - span) * dir >= 0.0;
        if last {
            h = span - s;
        }
        for stage in 1..7 {
            let terms: Vec<(f64, &[f64])> = (0..stage).map(|j| (A[stage][j], k[j].as_slice())).collect();
            axpy(&y, h, &terms, &mut tmp);
            let mut out = vec![0.0; d];
            eval(problem, s + C[stage] * h, &tmp, &mut out)?;
            k[stage] = out;
        }
        let terms: Vec<(f64, &[f64])> = (0..7).map(|j| (B5[j], k[j].as_slice())).collect();
        axpy(&y, h, &terms, &mut y_new);
        let mut err_sq = 0.0;
        for i in problem.error.clone() {
            let e: f64 = h * (0..7).map(|j| (B5[j] - B4[j]) * k[j][i]).sum::<f64>();
            let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sc).powi(2);
        }
        let err = (err_sq / problem.error.len().max(1) as f64).sqrt();
        if !err.is_finite() {
            return Err(IntegrationError::BlowupDetected { s, norm: f64::INFINITY });
        }
        if err <= 1.0 {
            s = if last { span } else { s + h };
            std::mem::swap(&mut y, &mut y_new);
            guard(problem, cfg, s, &y)?;
            stats.record(h);
            observe(s, &y)?;
            // first-same-as-last
            k.swap(0, 6);
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h.abs() < 1e-14 * s.abs().max(1.0) {
            // the step collapsed: either a singularity ahead or a stiff spot
            let norm = y[problem.norm.clone()].iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            return Err(IntegrationError::BlowupDetected { s, norm });
        }
    }
    Ok(stats)
}
