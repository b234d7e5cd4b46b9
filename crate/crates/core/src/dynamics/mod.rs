//! Flows of γ_H on V*Q and of u_ℋ* on T*Q.
//!
//! Both are integrated as autonomous systems in the flow parameter `s`, with
//! time carried as a state component (`ṫ = 1`), so `t = t0 + s`.

mod ode;

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use ode::StepStats;

use crate::expr::{EvalError, ScalarField};
use crate::lift::{section_h, ExtendedPoint, LiftedSystem};
use crate::phase_space::{PhasePoint, SystemSpec};
use ode::{solve, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Method {
    /// Classical fixed-step fourth order.
    Rk4 { step: f64 },
    /// Embedded adaptive Dormand–Prince 5(4).
    Dopri5 { atol: f64, rtol: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub max_steps: usize,
    /// Bound on the max-norm of `(q, p)`.
    pub blowup_threshold: f64,
    /// Keep every n-th accepted step; the last step is always kept.
    pub record_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig::rk4(1e-3)
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4 { step },
            max_steps: 10_000_000,
            blowup_threshold: 1e8,
            record_every: 1,
        }
    }

    pub fn dopri5(atol: f64, rtol: f64) -> Self {
        IntegratorConfig {
            method: Method::Dopri5 { atol, rtol },
            ..IntegratorConfig::rk4(1e-3)
        }
    }

    pub fn with_record_every(mut self, n: usize) -> Self {
        self.record_every = n;
        self
    }

    pub(crate) fn validate(&self) -> Result<(), IntegrationError> {
        let ok = match self.method {
            Method::Rk4 { step } => step > 0.0 && step.is_finite(),
            Method::Dopri5 { atol, rtol } => atol > 0.0 && rtol > 0.0 && atol.is_finite() && rtol.is_finite(),
        };
        if !ok {
            return Err(IntegrationError::InvalidConfig("step and tolerances must be positive".into()));
        }
        if self.record_every == 0 || self.max_steps == 0 || !(self.blowup_threshold > 0.0) {
            return Err(IntegrationError::InvalidConfig(
                "record_every, max_steps and blowup threshold must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrationError {
    #[error("blowup detected at s = {s} (state norm {norm:e})")]
    BlowupDetected { s: f64, norm: f64 },
    #[error("step limit of {steps} exceeded at s = {s}")]
    StepLimitExceeded { steps: usize, s: f64 },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Vertical,
    Extended,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub s: f64,
    /// `[t, q, p]`, or `[t, q, p, p0]` on T*Q.
    pub coords: Vec<f64>,
    pub i0: Option<f64>,
}

/// Largest deviation of a field from its initial value along a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monitor {
    pub name: String,
    pub initial: f64,
    pub max_drift: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub space: Space,
    pub m: usize,
    pub integrator: IntegratorConfig,
    /// Sample parameters are monotone in the direction of integration.
    pub samples: Vec<TrajectorySample>,
    pub monitors: Vec<Monitor>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn point(&self, i: usize) -> PhasePoint {
        PhasePoint::from_coords(self.m, &self.samples[i].coords)
    }

    pub fn extended_point(&self, i: usize) -> Option<ExtendedPoint> {
        (self.space == Space::Extended).then(|| ExtendedPoint::from_coords(self.m, &self.samples[i].coords))
    }

    pub fn last_point(&self) -> PhasePoint {
        self.point(self.samples.len() - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = PhasePoint> + '_ {
        (0..self.samples.len()).map(|i| self.point(i))
    }

    pub fn monitor(&self, name: &str) -> Option<&Monitor> {
        self.monitors.iter().find(|m| m.name == name)
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["s".to_string(), "t".to_string()];
        cols.extend((1..=self.m).map(|i| format!("q{i}")));
        cols.extend((1..=self.m).map(|i| format!("p{i}")));
        if self.space == Space::Extended {
            cols.push("p0".into());
            cols.push("I0".into());
        }
        cols.join(",")
    }

    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        for smp in &self.samples {
            let mut row = vec![smp.s];
            row.extend(&smp.coords);
            row.extend(smp.i0);
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

struct Recorder<'a> {
    fields: Vec<&'a ScalarField>,
    monitors: Vec<Monitor>,
    hstar: Option<&'a ScalarField>,
    samples: Vec<TrajectorySample>,
    record_every: usize,
    seen: usize,
    pending: Option<TrajectorySample>,
}

impl<'a> Recorder<'a> {
    fn new(fields: Vec<&'a ScalarField>, hstar: Option<&'a ScalarField>, record_every: usize) -> Self {
        Recorder {
            fields,
            monitors: Vec::new(),
            hstar,
            samples: Vec::new(),
            record_every,
            seen: 0,
            pending: None,
        }
    }

    fn observe(&mut self, s: f64, y: &[f64]) -> Result<(), IntegrationError> {
        let values: Vec<f64> = self.fields.iter().map(|f| f.value(y)).collect::<Result<_, _>>()?;
        if self.monitors.is_empty() {
            self.monitors = self
                .fields
                .iter()
                .zip(&values)
                .map(|(f, v)| Monitor {
                    name: f.name().to_string(),
                    initial: *v,
                    max_drift: 0.0,
                })
                .collect();
        }
        for (mon, v) in self.monitors.iter_mut().zip(&values) {
            mon.max_drift = mon.max_drift.max((v - mon.initial).abs());
        }
        let i0 = self.hstar.map(|h| h.value(y)).transpose()?;
        let sample = TrajectorySample {
            s,
            coords: y.to_vec(),
            i0,
        };
        if self.seen % self.record_every == 0 {
            self.samples.push(sample);
            self.pending = None;
        } else {
            self.pending = Some(sample);
        }
        self.seen += 1;
        Ok(())
    }

    fn finish(mut self) -> (Vec<TrajectorySample>, Vec<Monitor>) {
        self.samples.extend(self.pending.take());
        (self.samples, self.monitors)
    }
}

fn monitored_fields(system: &SystemSpec) -> Vec<&ScalarField> {
    let mut fields = Vec::new();
    if !system.hamiltonian.is_time_dependent() {
        fields.push(&system.hamiltonian);
    }
    fields.extend(&system.integrals);
    fields
}

fn vertical_rhs(system: &SystemSpec) -> impl Fn(&[f64], &mut [f64]) -> Result<(), EvalError> + '_ {
    let m = system.m;
    move |y, out| {
        let g = system.hamiltonian.gradient(y)?;
        out[0] = 1.0;
        for i in 0..m {
            out[1 + i] = g.dp[i];
            out[1 + m + i] = -g.dq[i];
        }
        Ok(())
    }
}

fn extended_rhs(system: &SystemSpec) -> impl Fn(&[f64], &mut [f64]) -> Result<(), EvalError> + '_ {
    let m = system.m;
    move |y, out| {
        let g = system.hamiltonian.gradient(y)?;
        out[0] = 1.0;
        for i in 0..m {
            out[1 + i] = g.dp[i];
            out[1 + m + i] = -g.dq[i];
        }
        out[1 + 2 * m] = -g.dt;
        Ok(())
    }
}

/// Solves `ṫ = 1, q̇ⁱ = ∂ⁱℋ, ṗᵢ = −∂ᵢℋ` from `x0` to time `t_end`.
pub fn integrate_vertical(
    system: &SystemSpec,
    x0: &PhasePoint,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrationError> {
    let m = system.m;
    let rhs = vertical_rhs(system);
    let problem = Problem {
        rhs: &rhs,
        norm: 1..1 + 2 * m,
        error: 0..1 + 2 * m,
    };
    let mut rec = Recorder::new(monitored_fields(system), None, cfg.record_every);
    let stats = solve(&problem, &x0.coords(), t_end - x0.t, cfg, &mut |s, y| rec.observe(s, y))?;
    let (samples, monitors) = rec.finish();
    Ok(Trajectory {
        space: Space::Vertical,
        m,
        integrator: cfg.clone(),
        samples,
        monitors,
        stats,
    })
}

/// Solves the autonomous equations of ℋ* on T*Q for flow parameter `s_end`.
/// Adds an `I0` monitor; `p0` is left out of adaptive error control so the
/// step sequence matches the vertical run exactly.
pub fn integrate_extended(
    system: &SystemSpec,
    x0: &ExtendedPoint,
    s_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrationError> {
    let m = system.m;
    let lifted = LiftedSystem::new(system);
    let rhs = extended_rhs(system);
    let problem = Problem {
        rhs: &rhs,
        norm: 1..1 + 2 * m,
        error: 0..1 + 2 * m,
    };
    let mut fields = vec![&lifted.hstar];
    fields.extend(monitored_fields(system));
    let mut rec = Recorder::new(fields, Some(&lifted.hstar), cfg.record_every);
    let stats = solve(&problem, &x0.coords(), s_end, cfg, &mut |s, y| rec.observe(s, y))?;
    let (samples, mut monitors) = rec.finish();
    monitors[0].name = "I0".into();
    Ok(Trajectory {
        space: Space::Extended,
        m,
        integrator: cfg.clone(),
        samples,
        monitors,
        stats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// Max over samples of `|ζ(X(s)) − x(s)|_∞`.
    pub max_deviation: f64,
    /// Max `|I0| = |p0 + ℋ|` along the lifted run.
    pub max_abs_i0: f64,
    pub i0_drift: f64,
    pub samples: usize,
}

/// Integrates `x0` on V*Q and `H(x0)` on T*Q with the same configuration
/// and compares the projected lifted flow against the vertical one.
pub fn equivalence_check(
    system: &SystemSpec,
    x0: &PhasePoint,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<EquivalenceReport, IntegrationError> {
    let vertical = integrate_vertical(system, x0, t_end, cfg)?;
    let lifted = integrate_extended(system, &section_h(system, x0)?, t_end - x0.t, cfg)?;
    let n = 1 + 2 * system.m;
    let mut max_deviation = 0.0_f64;
    for (a, b) in vertical.samples.iter().zip(&lifted.samples) {
        for k in 0..n {
            max_deviation = max_deviation.max((a.coords[k] - b.coords[k]).abs());
        }
    }
    if vertical.samples.len() != lifted.samples.len() {
        max_deviation = f64::INFINITY;
    }
    let max_abs_i0 = lifted
        .samples
        .iter()
        .filter_map(|s| s.i0)
        .fold(0.0_f64, |a, v| a.max(v.abs()));
    Ok(EquivalenceReport {
        max_deviation,
        max_abs_i0,
        i0_drift: lifted.monitor("I0").map_or(0.0, |m| m.max_drift),
        samples: vertical.samples.len(),
    })
}

/// Which Hamiltonian vector field a completeness probe follows.
#[derive(Debug, Clone)]
pub enum ProbeField {
    /// γ_H, with time advancing.
    Hamilton,
    /// ϑ_f, with time frozen.
    Vertical(ScalarField),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ProbeOutcome {
    Completed,
    Blowup { s: f64 },
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeVerdict {
    pub seed: PhasePoint,
    pub forward: ProbeOutcome,
    pub backward: ProbeOutcome,
}

impl ProbeVerdict {
    pub fn completed(&self) -> bool {
        self.forward == ProbeOutcome::Completed && self.backward == ProbeOutcome::Completed
    }
}

fn probe_one(system: &SystemSpec, field: &ProbeField, seed: &PhasePoint, span: f64, cfg: &IntegratorConfig) -> ProbeOutcome {
    let m = system.m;
    let vertical_rhs_of = |f: &ScalarField| {
        let f = f.clone();
        move |y: &[f64], out: &mut [f64]| -> Result<(), EvalError> {
            let g = f.gradient(y)?;
            out[0] = 0.0;
            for i in 0..m {
                out[1 + i] = g.dp[i];
                out[1 + m + i] = -g.dq[i];
            }
            Ok(())
        }
    };
    let result = match field {
        ProbeField::Hamilton => {
            let rhs = vertical_rhs(system);
            let problem = Problem { rhs: &rhs, norm: 1..1 + 2 * m, error: 0..1 + 2 * m };
            solve(&problem, &seed.coords(), span, cfg, &mut |_, _| Ok(()))
        }
        ProbeField::Vertical(f) => {
            let rhs = vertical_rhs_of(f);
            let problem = Problem { rhs: &rhs, norm: 1..1 + 2 * m, error: 1..1 + 2 * m };
            solve(&problem, &seed.coords(), span, cfg, &mut |_, _| Ok(()))
        }
    };
    match result {
        Ok(_) => ProbeOutcome::Completed,
        Err(IntegrationError::BlowupDetected { s, .. }) => ProbeOutcome::Blowup { s },
        Err(e) => ProbeOutcome::Failed { message: e.to_string() },
    }
}

/// Integrates every seed to `±horizon` and reports whether the flow
/// survived. Completion is evidence only: a finite run certifies nothing.
pub fn completeness_probe(
    system: &SystemSpec,
    field: &ProbeField,
    seeds: &[PhasePoint],
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Vec<ProbeVerdict> {
    assert!(horizon > 0.0, "horizon must be positive");
    seeds
        .par_iter()
        .map(|seed| ProbeVerdict {
            seed: seed.clone(),
            forward: probe_one(system, field, seed, horizon, cfg),
            backward: probe_one(system, field, seed, -horizon, cfg),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn osc() -> SystemSpec {
        SystemSpec::parse("osc1d", 1, "(p1^2+q1^2)/2", &["(p1^2+q1^2)/2"]).unwrap()
    }

    #[test]
    fn oscillator_closes_after_one_period() {
        let x0 = PhasePoint::new(0.0, vec![1.0], vec![0.0]);
        let tr = integrate_vertical(&osc(), &x0, 2.0 * std::f64::consts::PI, &IntegratorConfig::default()).unwrap();
        let x = tr.last_point();
        assert!((x.q[0] - 1.0).abs() < 1e-9 && x.p[0].abs() < 1e-9, "{x:?}");
        assert!((x.t - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn free_flow_is_linear() {
        let s = SystemSpec::parse("free1d", 1, "p1^2/2", &[]).unwrap();
        let x0 = PhasePoint::new(0.0, vec![0.0], vec![1.0]);
        let tr = integrate_vertical(&s, &x0, 5.0, &IntegratorConfig::default()).unwrap();
        assert!((tr.last_point().q[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn free2d_integrals_do_not_drift() {
        let s = SystemSpec::parse("free2d", 2, "(p1^2+p2^2)/2", &["p1", "p2", "q1 - t*p1"]).unwrap();
        let x0 = PhasePoint::new(0.0, vec![0.3, -0.2], vec![1.1, 0.7]);
        let tr = integrate_vertical(&s, &x0, 10.0, &IntegratorConfig::default()).unwrap();
        for m in &tr.monitors {
            assert!(m.max_drift < 1e-10, "{m:?}");
        }
    }

    #[test]
    fn lifted_run_keeps_time_and_p0() {
        let s = osc();
        let x0 = section_h(&s, &PhasePoint::new(0.5, vec![0.2], vec![0.9])).unwrap();
        let tr = integrate_extended(&s, &x0, 3.0, &IntegratorConfig::default()).unwrap();
        for smp in &tr.samples {
            assert!((smp.coords[0] - (0.5 + smp.s)).abs() < 1e-12);
            assert_eq!(smp.coords[3], x0.p0);
        }
        assert!(tr.monitor("I0").unwrap().max_drift < 1e-10);
    }

    #[test]
    fn backward_integration_and_reversal() {
        let s = osc();
        let x0 = PhasePoint::new(1.0, vec![0.4], vec![-0.8]);
        let cfg = IntegratorConfig::default();
        let fwd = integrate_vertical(&s, &x0, 4.0, &cfg).unwrap();
        let back = integrate_vertical(&s, &fwd.last_point(), 1.0, &cfg).unwrap();
        let x = back.last_point();
        assert!((x.q[0] - 0.4).abs() < 1e-9 && (x.p[0] + 0.8).abs() < 1e-9);
        assert!(back.samples.windows(2).all(|w| w[1].s < w[0].s));
    }

    #[test]
    fn dopri5_matches_closed_form() {
        let x0 = PhasePoint::new(0.0, vec![1.0], vec![0.0]);
        let tr = integrate_vertical(&osc(), &x0, 3.0, &IntegratorConfig::dopri5(1e-10, 1e-10)).unwrap();
        let x = tr.last_point();
        assert!((x.q[0] - 3.0_f64.cos()).abs() < 1e-8);
        assert!((x.p[0] + 3.0_f64.sin()).abs() < 1e-8);
        assert!(tr.stats.accepted < 2000);
    }

    #[test]
    fn record_every_keeps_endpoint() {
        let x0 = PhasePoint::new(0.0, vec![1.0], vec![0.0]);
        let cfg = IntegratorConfig::rk4(0.01).with_record_every(7);
        let tr = integrate_vertical(&osc(), &x0, 1.0, &cfg).unwrap();
        assert_eq!(tr.samples.last().unwrap().s, 1.0);
        assert_eq!(tr.samples.len(), 16);
    }

    #[test]
    fn blowup_is_reported() {
        let s = SystemSpec::parse("blowup", 1, "p1^2/2 - q1^4", &[]).unwrap();
        let x0 = PhasePoint::new(0.0, vec![1.0], vec![0.0]);
        let err = integrate_vertical(&s, &x0, 10.0, &IntegratorConfig::default()).unwrap_err();
        match err {
            IntegrationError::BlowupDetected { s, .. } => assert!(s > 0.5 && s < 2.0, "{s}"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn csv_layout() {
        let s = osc();
        let x0 = section_h(&s, &PhasePoint::new(0.0, vec![1.0], vec![0.0])).unwrap();
        let tr = integrate_extended(&s, &x0, 0.002, &IntegratorConfig::default()).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("s,t,q1,p1,p0,I0"));
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn probes() {
        let free = SystemSpec::parse("free2d", 2, "(p1^2+p2^2)/2", &[]).unwrap();
        let seeds = vec![PhasePoint::new(0.0, vec![0.1, 0.2], vec![0.3, -0.4])];
        let cfg = IntegratorConfig::rk4(1e-2);
        let p1 = ScalarField::parse("p1", "p1", 2, false).unwrap();
        let v = completeness_probe(&free, &ProbeField::Vertical(p1), &seeds, 5.0, &cfg);
        assert!(v[0].completed());

        let s = SystemSpec::parse("blowup", 1, "p1^2/2 - q1^4", &[]).unwrap();
        let seeds = vec![PhasePoint::new(0.0, vec![1.0], vec![0.0])];
        let v = completeness_probe(&s, &ProbeField::Hamilton, &seeds, 5.0, &cfg);
        assert!(matches!(v[0].forward, ProbeOutcome::Blowup { .. }));
    }
}
