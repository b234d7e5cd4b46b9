//! Generalized action-angle charts `(P_A, Q^A, I_λ, t, y^λ)`.
//!
//! A chart is supplied in closed form: forward fields on V*Q and inverse
//! expressions for `q, p` in chart variables. Its Hamiltonian is
//!
//! ```text
//! K = ℋ ∘ inverse + correction
//! ```
//!
//! where the correction accounts for the time dependence of the change of
//! coordinates. Verification compares everything against exact duals.

mod loop_integral;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use loop_integral::{action_loop_integral, LevelData, LoopAction};

use crate::dynamics::{integrate_vertical, IntegrationError, IntegratorConfig, Trajectory};
use crate::expr::{parse_with, Dual1, EvalError, Expression, ParseContext, ParseError, ScalarField, Scalar, Var};
use crate::phase_space::{lie_derivative, vertical_bracket, PhasePoint, SystemSpec};
use crate::sampling::{sample_points, SamplingConfig, SamplingError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ActionAngleError {
    #[error("chart domain error: {0}")]
    ChartDomain(String),
    #[error("orbit did not return to its section within s = {horizon}")]
    NotClosedOrbit { horizon: f64 },
    #[error("period did not converge: return point misses the start by {gap:e}")]
    NonConvergedPeriod { gap: f64 },
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

fn domain(e: EvalError) -> ActionAngleError {
    ActionAngleError::ChartDomain(e.to_string())
}

/// A point in chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub t: f64,
    pub pair_mom: Vec<f64>,
    pub pair_pos: Vec<f64>,
    pub actions: Vec<f64>,
    pub angles: Vec<f64>,
}

impl ChartPoint {
    /// Flat layout `[t, P.., Q.., I.., y..]`.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = vec![self.t];
        c.extend(&self.pair_mom);
        c.extend(&self.pair_pos);
        c.extend(&self.actions);
        c.extend(&self.angles);
        c
    }
}

fn chart_slot(pairs: usize, k: usize, v: Var) -> Option<usize> {
    match v {
        Var::Time => Some(0),
        Var::PairMom(a) if a < pairs => Some(1 + a),
        Var::PairPos(a) if a < pairs => Some(1 + pairs + a),
        Var::Action(l) if l < k => Some(1 + 2 * pairs + l),
        Var::Angle(l) if l < k => Some(1 + 2 * pairs + k + l),
        _ => None,
    }
}

/// Textual definition of a chart, as kept in the catalog.
#[derive(Debug, Clone, Default)]
pub struct ChartDef<'a> {
    pub name: &'a str,
    pub m: usize,
    /// Leading angles that are 2π-periodic.
    pub r: usize,
    pub pair_mom: &'a [&'a str],
    pub pair_pos: &'a [&'a str],
    pub actions: &'a [&'a str],
    pub angles: &'a [&'a str],
    pub inverse_q: &'a [&'a str],
    pub inverse_p: &'a [&'a str],
    pub correction: &'a str,
    /// Expressions on V*Q that must be positive on the chart domain.
    pub domain: &'a [&'a str],
    pub initial_data: bool,
}

#[derive(Debug, Clone)]
pub struct ActionAngleChart {
    pub name: String,
    pub m: usize,
    pub k: usize,
    pub r: usize,
    pub pairs: usize,
    pub pair_mom: Vec<ScalarField>,
    pub pair_pos: Vec<ScalarField>,
    pub actions: Vec<ScalarField>,
    pub angles: Vec<ScalarField>,
    pub inverse_q: Vec<Expression>,
    pub inverse_p: Vec<Expression>,
    pub correction: Expression,
    pub domain: Vec<ScalarField>,
    /// All chart coordinates are constant along the flow (K = const).
    pub initial_data: bool,
}

impl ActionAngleChart {
    pub fn from_def(def: &ChartDef) -> Result<Self, ParseError> {
        let m = def.m;
        let pairs = def.pair_mom.len();
        let k = def.actions.len();
        assert_eq!(def.pair_pos.len(), pairs, "P and Q counts differ");
        assert_eq!(def.angles.len(), k, "I and y counts differ");
        assert_eq!(2 * pairs + 2 * k, 2 * m, "chart does not cover 2m coordinates");
        assert!(def.r <= k, "r must not exceed k");
        assert_eq!((def.inverse_q.len(), def.inverse_p.len()), (m, m), "inverse needs m positions and m momenta");
        let fields = |prefix: &str, srcs: &[&str]| -> Result<Vec<ScalarField>, ParseError> {
            srcs.iter()
                .enumerate()
                .map(|(i, s)| ScalarField::parse(&format!("{prefix}{}", i + 1), s, m, false))
                .collect()
        };
        let ctx = ParseContext::chart(pairs, k);
        let exprs = |srcs: &[&str]| -> Result<Vec<Expression>, ParseError> {
            srcs.iter().map(|s| parse_with(s, &ctx)).collect()
        };
        let correction = if def.correction.trim().is_empty() { "0" } else { def.correction };
        Ok(ActionAngleChart {
            name: def.name.to_string(),
            m,
            k,
            r: def.r,
            pairs,
            pair_mom: fields("P", def.pair_mom)?,
            pair_pos: fields("Q", def.pair_pos)?,
            actions: fields("I", def.actions)?,
            angles: fields("y", def.angles)?,
            inverse_q: exprs(def.inverse_q)?,
            inverse_p: exprs(def.inverse_p)?,
            correction: parse_with(correction, &ctx)?,
            domain: fields("domain", def.domain)?,
            initial_data: def.initial_data,
        })
    }

    /// `(P, Q, I, y)` fields, in that order.
    pub fn coordinate_fields(&self) -> Vec<&ScalarField> {
        self.pair_mom
            .iter()
            .chain(&self.pair_pos)
            .chain(&self.actions)
            .chain(&self.angles)
            .collect()
    }

    pub fn in_domain(&self, x: &PhasePoint) -> bool {
        let c = x.coords();
        self.domain.iter().all(|f| f.value(&c).is_ok_and(|v| v > 0.0))
    }

    pub fn forward(&self, x: &PhasePoint) -> Result<ChartPoint, ActionAngleError> {
        let c = x.coords();
        let vals = |fs: &[ScalarField]| fs.iter().map(|f| f.value(&c)).collect::<Result<Vec<_>, _>>();
        Ok(ChartPoint {
            t: x.t,
            pair_mom: vals(&self.pair_mom).map_err(domain)?,
            pair_pos: vals(&self.pair_pos).map_err(domain)?,
            actions: vals(&self.actions).map_err(domain)?,
            angles: vals(&self.angles).map_err(domain)?,
        })
    }

    fn chart_lookup<S: Scalar + 'static>(&self, seeds: &[S]) -> impl Fn(Var) -> Option<S> {
        let (pairs, k) = (self.pairs, self.k);
        let seeds = seeds.to_vec();
        move |v| chart_slot(pairs, k, v).map(|i| seeds[i].clone())
    }

    pub fn inverse(&self, c: &ChartPoint) -> Result<PhasePoint, ActionAngleError> {
        let flat = c.coords();
        let look = self.chart_lookup(&flat);
        let eval = |es: &[Expression]| es.iter().map(|e| e.eval_with(&look)).collect::<Result<Vec<_>, _>>();
        Ok(PhasePoint::new(
            c.t,
            eval(&self.inverse_q).map_err(domain)?,
            eval(&self.inverse_p).map_err(domain)?,
        ))
    }

    /// Replaces `q, p` by their inverse expressions.
    fn compose(&self, e: &Expression) -> Expression {
        e.substitute(&|v| match v {
            Var::Pos(i) => self.inverse_q.get(i).cloned(),
            Var::Mom(i) => self.inverse_p.get(i).cloned(),
            _ => None,
        })
    }

    /// `K = ℋ ∘ inverse + correction`, in chart variables.
    pub fn hamiltonian(&self, system: &SystemSpec) -> Expression {
        self.compose(system.hamiltonian.expression()).add(&self.correction)
    }

    /// Value and gradient over `[t, P, Q, I, y]` of a chart-variable expression.
    fn chart_dual(&self, e: &Expression, c: &ChartPoint) -> Result<Dual1, ActionAngleError> {
        let flat = c.coords();
        let n = flat.len();
        let seeds: Vec<Dual1> = flat.iter().enumerate().map(|(i, &x)| Dual1::variable(x, i, n)).collect();
        let mut d = e.eval_with(&self.chart_lookup(&seeds)).map_err(domain)?;
        d.grad.resize(n, 0.0);
        Ok(d)
    }

    /// `K` at a chart point, as a plain value.
    pub fn hamiltonian_value(&self, system: &SystemSpec, c: &ChartPoint) -> Result<f64, ActionAngleError> {
        let flat = c.coords();
        self.hamiltonian(system)
            .eval_with(&self.chart_lookup(&flat))
            .map_err(domain)
    }

    fn slot_of_action(&self, l: usize) -> usize {
        1 + 2 * self.pairs + l
    }

    fn slot_of_angle(&self, l: usize) -> usize {
        1 + 2 * self.pairs + self.k + l
    }

    /// Angles scaled by two; the bracket `{I, y}` becomes 2.
    pub fn corrupted(&self) -> Self {
        let half = |l: usize| Expression::var(Var::Angle(l)).div(&Expression::constant(2.0));
        let sub = |e: &Expression| {
            e.substitute(&|v| match v {
                Var::Angle(l) => Some(half(l)),
                _ => None,
            })
        };
        let mut c = self.clone();
        c.name = format!("{}-corrupted", self.name);
        c.angles = self
            .angles
            .iter()
            .map(|f| ScalarField::new(f.name(), Expression::constant(2.0).mul(f.expression()), self.m))
            .collect();
        c.inverse_q = self.inverse_q.iter().map(sub).collect();
        c.inverse_p = self.inverse_p.iter().map(sub).collect();
        c.correction = sub(&self.correction);
        c
    }
}

/// A Hamiltonian `ℋ'(I)` used to re-gauge the angles.
#[derive(Debug, Clone)]
pub struct RegaugeSpec {
    pub hprime: Expression,
}

impl RegaugeSpec {
    pub fn parse(source: &str, k: usize) -> Result<Self, ParseError> {
        Ok(RegaugeSpec {
            hprime: parse_with(source, &ParseContext::actions(k))?,
        })
    }

    pub fn negated(&self) -> Self {
        RegaugeSpec {
            hprime: self.hprime.neg(),
        }
    }
}

/// `y' = y + t ∂ℋ'/∂I`, `I' = I`. The chart Hamiltonian gains `+ℋ'`, so an
/// initial-data chart (K = 0) becomes one whose Hamiltonian is exactly ℋ'.
pub fn regauge(chart: &ActionAngleChart, spec: &RegaugeSpec) -> Result<ActionAngleChart, ActionAngleError> {
    let k = chart.k;
    if let Some(v) = spec.hprime.variables().into_iter().find(|v| !matches!(v, Var::Action(l) if *l < k)) {
        return Err(ActionAngleError::ChartDomain(format!("ℋ' may only reference actions, found `{v}`")));
    }
    let t = Expression::var(Var::Time);
    let omega: Vec<Expression> = (0..k).map(|l| spec.hprime.derivative(Var::Action(l))).collect();
    let zero = |e: &Expression| e.is_constant() && e.evaluate(|_| None) == Ok(0.0);
    let actions_forward = |e: &Expression| {
        e.substitute(&|v| match v {
            Var::Action(l) => Some(chart.actions[l].expression().clone()),
            _ => None,
        })
    };
    let mut out = chart.clone();
    out.angles = chart
        .angles
        .iter()
        .zip(&omega)
        .map(|(y, w)| {
            if zero(w) {
                y.clone()
            } else {
                let shifted = y.expression().add(&t.mul(&actions_forward(w)));
                ScalarField::new(y.name(), shifted, chart.m)
            }
        })
        .collect();
    // old y = y' − t ω'(I)
    let back = |e: &Expression| {
        e.substitute(&|v| match v {
            Var::Angle(l) if l < k && !zero(&omega[l]) => {
                Some(Expression::var(Var::Angle(l)).sub(&t.mul(&omega[l])))
            }
            _ => None,
        })
    };
    out.inverse_q = chart.inverse_q.iter().map(back).collect();
    out.inverse_p = chart.inverse_p.iter().map(back).collect();
    out.correction = if spec.hprime.is_constant() && zero(&spec.hprime) {
        chart.correction.clone()
    } else {
        back(&chart.correction).add(&spec.hprime)
    };
    out.initial_data = chart.initial_data && spec.hprime.is_constant();
    out.name = format!("{}-regauged", chart.name);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCheck {
    pub name: String,
    pub max_error: f64,
    pub tol: f64,
    pub detail: Option<String>,
    pub witness: Option<Vec<f64>>,
    pub pass: bool,
}

impl SubCheck {
    fn new(name: &str, tol: f64, worst: Option<(f64, String, Vec<f64>)>) -> Self {
        let (max_error, detail, witness) = match worst {
            Some((e, d, w)) => (e, Some(d), Some(w)),
            None => (0.0, None, None),
        };
        let pass = max_error < tol;
        SubCheck {
            name: name.into(),
            max_error,
            tol,
            detail: if pass { None } else { detail },
            witness: if pass { None } else { witness },
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartReport {
    pub chart: String,
    pub samples: usize,
    /// (a) canonical brackets of the chart coordinates.
    pub brackets: SubCheck,
    /// (b) K depends on the actions only, and `ẏ = ∂K/∂I`.
    pub hamiltonian: SubCheck,
    /// (c) integrals do not depend on `(t, y)`.
    pub integrals: SubCheck,
    pub round_trip: SubCheck,
    pub pass: bool,
}

/// Ten decimals, enough for reports without round-off noise.
fn rounded(v: f64) -> f64 {
    (v * 1e10).round() / 1e10
}

type Worst = Option<(f64, String, Vec<f64>)>;

fn keep_worst(a: Worst, b: Worst) -> Worst {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.0 > x.0 { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

fn coord_names(chart: &ActionAngleChart) -> Vec<String> {
    let mut names: Vec<String> = (1..=chart.pairs).map(|a| format!("P{a}")).collect();
    names.extend((1..=chart.pairs).map(|a| format!("Q{a}")));
    names.extend((1..=chart.k).map(|l| format!("I{l}")));
    names.extend((1..=chart.k).map(|l| format!("y{l}")));
    names
}

/// Expected `{c_i, c_j}_V` for the chart ordering `(P, Q, I, y)`.
fn canonical(chart: &ActionAngleChart, i: usize, j: usize) -> f64 {
    let (np, k) = (chart.pairs, chart.k);
    let conj = |a: usize| -> Option<usize> {
        if a < np {
            Some(a + np)
        } else if a >= 2 * np && a < 2 * np + k {
            Some(a + k)
        } else {
            None
        }
    };
    if conj(i) == Some(j) {
        1.0
    } else if conj(j) == Some(i) {
        -1.0
    } else {
        0.0
    }
}

struct PointCheck {
    brackets: Worst,
    hamiltonian: Worst,
    integrals: Worst,
    round_trip: Worst,
}

fn check_point(system: &SystemSpec, chart: &ActionAngleChart, k_expr: &Expression, phis: &[Expression], x: &PhasePoint) -> Result<PointCheck, ActionAngleError> {
    let names = coord_names(chart);
    let fields = chart.coordinate_fields();
    let xc = x.coords();

    let mut brackets: Worst = None;
    for i in 0..fields.len() {
        for j in i + 1..fields.len() {
            let b = vertical_bracket(fields[i], fields[j], x).map_err(domain)?;
            let err = (b - canonical(chart, i, j)).abs();
            brackets = keep_worst(brackets, Some((err, format!("{{{}, {}}} = {}", names[i], names[j], rounded(b)), xc.clone())));
        }
    }

    let c = chart.forward(x)?;
    let kd = chart.chart_dual(k_expr, &c)?;
    let mut hamiltonian: Worst = None;
    let mut note = |err: f64, what: String| {
        hamiltonian = keep_worst(hamiltonian.take(), Some((err, what, xc.clone())));
    };
    note(kd.d(0).abs(), format!("∂K/∂t = {}", kd.d(0)));
    for (i, name) in names.iter().enumerate() {
        let slot = 1 + i;
        let is_action = (0..chart.k).any(|l| chart.slot_of_action(l) == slot);
        if !is_action {
            note(kd.d(slot).abs(), format!("∂K/∂{name} = {}", kd.d(slot)));
        }
        let rate = lie_derivative(system, fields[i], x).map_err(domain)?;
        let angle = (0..chart.k).find(|&l| chart.slot_of_angle(l) == slot);
        match angle {
            Some(l) => {
                let w = kd.d(chart.slot_of_action(l));
                note((rate - w).abs(), format!("d{name}/dt = {rate} but ∂K/∂I{} = {w}", l + 1));
            }
            None => note(rate.abs(), format!("d{name}/dt = {rate}")),
        }
    }

    let mut integrals: Worst = None;
    for (a, phi) in phis.iter().enumerate() {
        let d = chart.chart_dual(phi, &c)?;
        integrals = keep_worst(integrals, Some((d.d(0).abs(), format!("∂Phi{}/∂t = {}", a + 1, d.d(0)), xc.clone())));
        for l in 0..chart.k {
            let v = d.d(chart.slot_of_angle(l));
            integrals = keep_worst(integrals, Some((v.abs(), format!("∂Phi{}/∂y{} = {v}", a + 1, l + 1), xc.clone())));
        }
    }

    let back = chart.inverse(&c)?;
    let gap = back
        .q
        .iter()
        .chain(&back.p)
        .zip(x.q.iter().chain(&x.p))
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let round_trip = Some((gap, format!("inverse(forward(x)) misses x by {gap:e}"), xc));

    Ok(PointCheck {
        brackets,
        hamiltonian,
        integrals,
        round_trip,
    })
}

/// Chart samples: the system's sampling box restricted to the chart domain.
pub fn chart_samples(chart: &ActionAngleChart, sampling: &SamplingConfig) -> Result<Vec<PhasePoint>, ActionAngleError> {
    let mut cfg = sampling.clone();
    cfg.require.extend(chart.domain.iter().cloned());
    Ok(sample_points(&cfg)?)
}

/// Checks the conclusions of the action-angle theorem on `samples`.
pub fn chart_verify(system: &SystemSpec, chart: &ActionAngleChart, samples: &[PhasePoint], tol: f64) -> Result<ChartReport, ActionAngleError> {
    let k_expr = chart.hamiltonian(system);
    let phis: Vec<Expression> = system.integrals.iter().map(|f| chart.compose(f.expression())).collect();
    let per = samples
        .par_iter()
        .map(|x| check_point(system, chart, &k_expr, &phis, x))
        .collect::<Result<Vec<_>, _>>()?;
    let fold = |f: fn(&PointCheck) -> &Worst| per.iter().fold(None, |acc, p| keep_worst(acc, f(p).clone()));
    let brackets = SubCheck::new("canonical brackets", tol, fold(|p| &p.brackets));
    let hamiltonian = SubCheck::new("hamiltonian depends only on actions", tol, fold(|p| &p.hamiltonian));
    let integrals = SubCheck::new("integrals independent of (t, y)", tol, fold(|p| &p.integrals));
    let round_trip = SubCheck::new("round trip", 1e-10, fold(|p| &p.round_trip));
    Ok(ChartReport {
        chart: chart.name.clone(),
        samples: samples.len(),
        pass: brackets.pass && hamiltonian.pass && integrals.pass && round_trip.pass,
        brackets,
        hamiltonian,
        integrals,
        round_trip,
    })
}

/// `∂K/∂I_λ` by central differences with step `1e-5`.
pub fn frequencies_fd(system: &SystemSpec, chart: &ActionAngleChart, at: &ChartPoint) -> Result<Vec<f64>, ActionAngleError> {
    let h = 1e-5;
    (0..chart.k)
        .map(|l| {
            let (mut a, mut b) = (at.clone(), at.clone());
            a.actions[l] += h;
            b.actions[l] -= h;
            Ok((chart.hamiltonian_value(system, &a)? - chart.hamiltonian_value(system, &b)?) / (2.0 * h))
        })
        .collect()
}

/// Adds multiples of 2π so consecutive values never jump by more than π.
pub fn unwrap_angles(values: &mut [f64]) {
    for i in 1..values.len() {
        let d = values[i] - values[i - 1];
        let turns = (d / (2.0 * PI)).round();
        if turns != 0.0 {
            for v in values[i..].iter_mut() {
                *v -= turns * 2.0 * PI;
            }
        }
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fitted_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Angle series along a trajectory, unwrapped for the compact factors.
fn angle_series(chart: &ActionAngleChart, tr: &Trajectory) -> Result<(Vec<f64>, Vec<Vec<f64>>), ActionAngleError> {
    let pts: Vec<ChartPoint> = tr.points().map(|x| chart.forward(&x)).collect::<Result<_, _>>()?;
    let times = pts.iter().map(|c| c.t).collect();
    let mut series: Vec<Vec<f64>> = (0..chart.k).map(|l| pts.iter().map(|c| c.angles[l]).collect()).collect();
    for s in series.iter_mut().take(chart.r) {
        unwrap_angles(s);
    }
    Ok((times, series))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub actions: Vec<f64>,
    /// `∂K/∂I_λ` by finite differences.
    pub fd: Vec<f64>,
    /// Fitted rotation rate of `y^λ` along an integrated trajectory.
    pub measured: Vec<f64>,
    pub max_mismatch: f64,
}

/// Frequencies at a chart point, cross-checked against the flow.
pub fn frequencies(
    system: &SystemSpec,
    chart: &ActionAngleChart,
    at: &ChartPoint,
    duration: f64,
    cfg: &IntegratorConfig,
) -> Result<FrequencyReport, ActionAngleError> {
    let fd = frequencies_fd(system, chart, at)?;
    let x0 = chart.inverse(at)?;
    let tr = integrate_vertical(system, &x0, x0.t + duration, cfg)?;
    let (times, series) = angle_series(chart, &tr)?;
    let measured: Vec<f64> = series.iter().map(|s| fitted_slope(&times, s)).collect();
    let max_mismatch = fd.iter().zip(&measured).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(FrequencyReport {
        actions: at.actions.clone(),
        fd,
        measured,
        max_mismatch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleMode {
    /// Angles must stay constant.
    Constant,
    /// Angles must advance at `∂K/∂I`.
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDataReport {
    pub mode: AngleMode,
    pub trajectories: usize,
    pub max_action_drift: f64,
    pub max_pair_drift: f64,
    /// Constant mode: max `|y(t) − y(t0)|`. Linear mode: max `|slope − ∂K/∂I|`.
    pub max_angle_error: f64,
    /// Drift of K along the trajectories.
    pub max_hamiltonian_drift: f64,
    pub pass: bool,
}

/// Maps trajectories into the chart and checks how the coordinates move.
pub fn initial_data_check(system: &SystemSpec, chart: &ActionAngleChart, trajectories: &[Trajectory]) -> Result<InitialDataReport, ActionAngleError> {
    let mode = if chart.initial_data { AngleMode::Constant } else { AngleMode::Linear };
    let (mut action, mut pair, mut angle, mut ham) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for tr in trajectories {
        let pts: Vec<ChartPoint> = tr.points().map(|x| chart.forward(&x)).collect::<Result<_, _>>()?;
        let c0 = &pts[0];
        let k0 = chart.hamiltonian_value(system, c0)?;
        for c in &pts {
            for (a, b) in c.actions.iter().zip(&c0.actions) {
                action = action.max((a - b).abs());
            }
            for (a, b) in c.pair_mom.iter().chain(&c.pair_pos).zip(c0.pair_mom.iter().chain(&c0.pair_pos)) {
                pair = pair.max((a - b).abs());
            }
            ham = ham.max((chart.hamiltonian_value(system, c)? - k0).abs());
        }
        let (times, series) = angle_series(chart, tr)?;
        match mode {
            AngleMode::Constant => {
                for s in &series {
                    angle = s.iter().fold(angle, |m, v| m.max((v - s[0]).abs()));
                }
            }
            AngleMode::Linear => {
                let w = frequencies_fd(system, chart, c0)?;
                for (s, w) in series.iter().zip(&w) {
                    angle = angle.max((fitted_slope(&times, s) - w).abs());
                }
            }
        }
    }
    let angle_tol = match mode {
        AngleMode::Constant => 1e-7,
        AngleMode::Linear => 1e-5,
    };
    Ok(InitialDataReport {
        mode,
        trajectories: trajectories.len(),
        pass: action < 1e-7 && pair < 1e-7 && angle < angle_tol && ham < 1e-8,
        max_action_drift: action,
        max_pair_drift: pair,
        max_angle_error: angle,
        max_hamiltonian_drift: ham,
    })
}
