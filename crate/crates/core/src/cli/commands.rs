use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::action_angle::{
    action_loop_integral, chart_samples, chart_verify, frequencies, initial_data_check, regauge, ActionAngleChart,
    ActionAngleError, RegaugeSpec,
};
use crate::catalog::{self, CatalogEntry};
use crate::dynamics::{equivalence_check, integrate_extended, integrate_vertical, EquivalenceReport, IntegrationError};
use crate::integrability::{structure_matrix, verify as run_verify, Check, VerifyConfig};
use crate::lift::section_h;
use crate::phase_space::PhasePoint;
use crate::sampling::sample_points;

use super::report::*;
use super::{CatalogAction, CliError, Resolved};

const EQUIVALENCE_SPAN: f64 = 10.0;
const EQUIVALENCE_TOL: f64 = 1e-8;
const CHART_TOL: f64 = 1e-8;

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| input(e.to_string()))?;
    match path {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => writeln!(stdout, "{text}")?,
    }
    Ok(())
}

fn csv_sink<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

fn code(pass: bool) -> i32 {
    if pass {
        0
    } else {
        1
    }
}

fn equivalence(r: &Resolved) -> Result<EquivalenceSummary, CliError> {
    let starts: Vec<PhasePoint> = match &r.entry {
        Some(e) if !e.initial_points.is_empty() => e.initial_points.clone(),
        _ => sample_points(&r.sampling.clone().with_count(3)).map_err(|e| input(e.to_string()))?,
    };
    let mut runs = Vec::new();
    let mut pass = true;
    for x0 in starts {
        match equivalence_check(&r.system, &x0, x0.t + EQUIVALENCE_SPAN, &r.integrator) {
            Ok(report) => runs.push(EquivalenceRun { start: x0, report }),
            Err(e) => {
                pass = false;
                runs.push(EquivalenceRun {
                    start: x0,
                    report: EquivalenceReport {
                        max_deviation: f64::INFINITY,
                        max_abs_i0: f64::INFINITY,
                        i0_drift: f64::INFINITY,
                        samples: 0,
                    },
                });
                eprintln!("equivalence run failed: {e}");
            }
        }
    }
    let max_deviation = runs.iter().fold(0.0_f64, |m, r| m.max(r.report.max_deviation));
    let max_i0_drift = runs.iter().fold(0.0_f64, |m, r| m.max(r.report.i0_drift));
    pass &= max_deviation < EQUIVALENCE_TOL && max_i0_drift < EQUIVALENCE_TOL;
    Ok(EquivalenceSummary {
        t_span: EQUIVALENCE_SPAN,
        tol: EQUIVALENCE_TOL,
        runs,
        max_deviation,
        max_i0_drift,
        pass,
    })
}

fn entry_charts(r: &Resolved) -> Result<&CatalogEntry, CliError> {
    match &r.entry {
        Some(e) if !e.charts.is_empty() => Ok(e),
        _ => Err(input(format!("system `{}` has no action-angle chart", r.system.name))),
    }
}

pub fn verify(r: &Resolved, checks: Option<&[String]>, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let mut cfg = VerifyConfig::new(r.system.m);
    cfg.sampling = r.sampling.clone();
    let requested: Vec<Check> = match checks {
        Some(names) => names
            .iter()
            .map(|n| Check::from_name(n.trim()).ok_or_else(|| input(format!("unknown check `{n}`"))))
            .collect::<Result<_, _>>()?,
        None => r.checks.clone().unwrap_or_else(|| cfg.checks.clone()),
    };
    if requested.contains(&Check::Involution) && r.system.n() != r.system.m {
        return Err(input(format!(
            "involution needs n = m integrals, got n = {}, m = {}",
            r.system.n(),
            r.system.m
        )));
    }
    let charts_wanted = requested.contains(&Check::Chart);
    let entry = if charts_wanted { Some(entry_charts(r)?) } else { None };
    cfg.checks = requested.iter().copied().filter(|c| !matches!(c, Check::Equivalence | Check::Chart)).collect();

    let verdict = run_verify(&r.system, &cfg).map_err(|e| input(e.to_string()))?;
    let equivalence = requested.contains(&Check::Equivalence).then(|| equivalence(r)).transpose()?;
    let charts = match entry {
        Some(e) => Some(
            e.charts
                .iter()
                .map(|c| {
                    let samples = chart_samples(c, &r.sampling)?;
                    chart_verify(&r.system, c, &samples, CHART_TOL)
                })
                .collect::<Result<Vec<_>, ActionAngleError>>()
                .map_err(|e| input(e.to_string()))?,
        ),
        None => None,
    };

    let mut failed: Vec<String> = verdict.failed_checks().iter().map(|s| s.to_string()).collect();
    if !verdict.count_ok {
        failed.push("count".into());
    }
    if equivalence.as_ref().is_some_and(|e| !e.pass) {
        failed.push("equivalence".into());
    }
    if charts.as_ref().is_some_and(|cs| cs.iter().any(|c| !c.pass)) {
        failed.push("chart".into());
    }
    let mut report = VerifyReport {
        command: "verify".into(),
        k: verdict.corank.as_ref().map(|c| c.k),
        verdict,
        equivalence,
        charts,
        failed,
    };
    report.verdict.pass = report.failed.is_empty();
    let pass = report.verdict.pass;
    emit_json(&report, out.or(r.output.report.as_deref()), stdout)?;
    Ok(code(pass))
}

pub fn integrate(
    r: &Resolved,
    lifted: bool,
    t_end: f64,
    compare: bool,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let x0 = r
        .start
        .clone()
        .ok_or_else(|| input("integrate needs [system] start for inline systems"))?;
    if !t_end.is_finite() {
        return Err(input("--t-end must be finite"));
    }
    let mut report = IntegrateReport {
        schema: SCHEMA,
        command: "integrate".into(),
        system: r.system.name.clone(),
        seed: r.sampling.seed,
        space: if lifted { "extended" } else { "vertical" }.into(),
        start: x0.coords(),
        t_end,
        last: None,
        displacement: None,
        samples: None,
        monitors: None,
        stats: None,
        i0_drift: None,
        equivalence: None,
        error: None,
        pass: false,
    };
    let run = if lifted {
        section_h(&r.system, &x0)
            .map_err(Into::into)
            .and_then(|xe| integrate_extended(&r.system, &xe, t_end - x0.t, &r.integrator))
    } else {
        integrate_vertical(&r.system, &x0, t_end, &r.integrator)
    };
    let tr = match run {
        Ok(tr) => tr,
        Err(IntegrationError::InvalidConfig(msg)) => return Err(input(msg)),
        Err(e) => {
            report.error = Some(ErrorRecord::from_error(&e));
            emit_json(&report, r.output.report.as_deref(), stdout)?;
            return Ok(1);
        }
    };
    let last = tr.last_point();
    report.displacement = Some(
        last.q
            .iter()
            .chain(&last.p)
            .zip(x0.q.iter().chain(&x0.p))
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())),
    );
    report.last = tr.samples.last().map(|s| s.coords.clone());
    report.samples = Some(tr.samples.len());
    report.monitors = Some(tr.monitors.clone());
    report.stats = Some(tr.stats.clone());
    let mut pass = true;
    if lifted {
        let d = tr.monitor("I0").map_or(0.0, |m| m.max_drift);
        report.i0_drift = Some(d);
        pass &= d < EQUIVALENCE_TOL;
    }
    if compare {
        match equivalence_check(&r.system, &x0, t_end, &r.integrator) {
            Ok(eq) => {
                pass &= eq.max_deviation < EQUIVALENCE_TOL && eq.i0_drift < EQUIVALENCE_TOL;
                report.equivalence = Some(eq);
            }
            Err(e) => {
                pass = false;
                report.error = Some(ErrorRecord::from_error(&e));
            }
        }
    }
    report.pass = pass;
    if let Some(path) = out.or(r.output.csv.as_deref()) {
        let mut w = BufWriter::new(File::create(path)?);
        tr.write_csv(&mut w)?;
        w.flush()?;
    }
    emit_json(&report, r.output.report.as_deref(), stdout)?;
    Ok(code(pass))
}

pub fn brackets(r: &Resolved, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let (m, n) = (r.system.m, r.system.n());
    let samples = sample_points(&r.sampling).map_err(|e| input(e.to_string()))?;
    let mut cols = vec!["sample".to_string(), "t".to_string()];
    cols.extend((1..=m).map(|i| format!("q{i}")));
    cols.extend((1..=m).map(|i| format!("p{i}")));
    cols.extend(r.system.integrals.iter().map(|f| f.name().to_string()));
    for a in 0..n {
        for b in a + 1..n {
            cols.push(format!("s_{}_{}", a + 1, b + 1));
        }
    }
    let mut w = csv_sink(out.or(r.output.csv.as_deref()), stdout)?;
    writeln!(w, "{}", cols.join(","))?;
    let mut ok = true;
    for (i, x) in samples.iter().enumerate() {
        let sm = match structure_matrix(&r.system, x) {
            Ok(sm) => sm,
            Err(e) => {
                eprintln!("sample {i}: {e}");
                ok = false;
                continue;
            }
        };
        let mut row = vec![i.to_string()];
        row.extend(x.coords().iter().map(|v| format!("{v:e}")));
        row.extend(sm.phi.iter().map(|v| format!("{v:e}")));
        for a in 0..n {
            for b in a + 1..n {
                row.push(format!("{:e}", sm.values[a][b]));
            }
        }
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(code(ok))
}

pub struct ActionOptions {
    pub energies: Vec<f64>,
    pub dof: Option<usize>,
    pub corrupt: bool,
    pub regauge: Option<String>,
}

fn action_rows(
    r: &Resolved,
    entry: &CatalogEntry,
    chart: &ActionAngleChart,
    opts: &ActionOptions,
) -> Result<Vec<ActionRow>, CliError> {
    let cfg = &r.integrator;
    let mut rows = Vec::new();
    for factor in &entry.action_factors {
        if opts.dof.is_some_and(|d| d != factor.dof + 1) {
            continue;
        }
        for &energy in &opts.energies {
            if !(energy > 0.0) {
                return Err(input(format!("energy {energy} must be positive")));
            }
            let level = entry.level(energy, factor.dof).expect("factor has a level");
            let loop_action = action_loop_integral(&r.system, &level, cfg).map_err(|e| input(e.to_string()))?;
            let action_closed = factor
                .closed_form
                .value(&level.start.coords())
                .map_err(|e| input(e.to_string()))?;
            let frequency_loop = 2.0 * PI / loop_action.period;
            let (fd, measured) = if chart.r > 0 {
                let c = chart.forward(&level.start).map_err(|e| input(e.to_string()))?;
                let f = frequencies(&r.system, chart, &c, EQUIVALENCE_SPAN, cfg).map_err(|e| input(e.to_string()))?;
                (f.fd[0], f.measured[0])
            } else {
                (f64::NAN, f64::NAN)
            };
            let pass = (loop_action.action - action_closed).abs() < 1e-6
                && (fd - measured).abs() < 1e-4
                && (frequency_loop - fd).abs() < 1e-4;
            rows.push(ActionRow {
                energy,
                dof: factor.dof,
                action_loop: loop_action.action,
                action_closed,
                period: loop_action.period,
                frequency_loop,
                frequency_fd: fd,
                frequency_measured: measured,
                pass,
            });
        }
    }
    Ok(rows)
}

fn regauge_summary(r: &Resolved, entry: &CatalogEntry, source: &str, opts: &ActionOptions) -> Result<RegaugeSummary, CliError> {
    let base = entry.initial_data_chart().or(entry.plain_chart()).expect("entry has charts");
    let spec = RegaugeSpec::parse(source, base.k).map_err(|e| input(format!("--regauge: {e}")))?;
    let fail = |e: ActionAngleError| input(e.to_string());
    let chart = regauge(base, &spec).map_err(fail)?;
    let back = regauge(&chart, &spec.negated()).map_err(fail)?;
    let samples = chart_samples(base, &r.sampling).map_err(fail)?;
    let report = chart_verify(&r.system, &chart, &samples, CHART_TOL).map_err(fail)?;
    let mut round_trip = 0.0_f64;
    for x in &samples {
        let (a, b) = (base.forward(x).map_err(fail)?, back.forward(x).map_err(fail)?);
        for (u, v) in a.coords().iter().zip(b.coords()) {
            round_trip = round_trip.max((u - v).abs());
        }
        let y = back.inverse(&a).map_err(fail)?;
        for (u, v) in y.q.iter().chain(&y.p).zip(x.q.iter().chain(&x.p)) {
            round_trip = round_trip.max((u - v).abs());
        }
    }
    let cfg = r.integrator.clone().with_record_every(10);
    let mut trajectories = Vec::new();
    for factor in &entry.action_factors {
        for &energy in &opts.energies {
            let level = entry.level(energy, factor.dof).expect("factor has a level");
            let x0 = &level.start;
            trajectories.push(integrate_vertical(&r.system, x0, x0.t + EQUIVALENCE_SPAN, &cfg).map_err(|e| input(e.to_string()))?);
        }
    }
    let flow = initial_data_check(&r.system, &chart, &trajectories).map_err(fail)?;
    Ok(RegaugeSummary {
        hprime: source.to_string(),
        pass: report.pass && flow.pass && round_trip < 1e-10,
        chart: report,
        flow,
        round_trip,
    })
}

pub fn actions(r: &Resolved, opts: &ActionOptions, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let entry = entry_charts(r)?;
    let plain = entry.plain_chart().or(entry.charts.first()).expect("entry has charts");
    let chart = if opts.corrupt { plain.corrupted() } else { plain.clone() };
    let samples = chart_samples(&chart, &r.sampling).map_err(|e| input(e.to_string()))?;
    let chart_report = chart_verify(&r.system, &chart, &samples, CHART_TOL).map_err(|e| input(e.to_string()))?;
    let rows = action_rows(r, entry, &chart, opts)?;
    let regauge = opts
        .regauge
        .as_deref()
        .map(|src| regauge_summary(r, entry, src, opts))
        .transpose()?;
    let pass = chart_report.pass && rows.iter().all(|x| x.pass) && regauge.as_ref().is_none_or(|g| g.pass);
    let report = ActionsReport {
        schema: SCHEMA,
        command: "actions".into(),
        system: r.system.name.clone(),
        seed: r.sampling.seed,
        chart: chart_report,
        rows,
        regauge,
        pass,
    };
    if let Some(path) = out.or(r.output.csv.as_deref()) {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{}", ActionRow::CSV_HEADER)?;
        for row in &report.rows {
            writeln!(w, "{}", row.csv())?;
        }
        w.flush()?;
    }
    emit_json(&report, r.output.report.as_deref(), stdout)?;
    Ok(code(pass))
}

pub fn catalog(action: &CatalogAction, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match action {
        CatalogAction::List => {
            for e in catalog::catalog_entries() {
                writeln!(stdout, "{:<20} m={}  n={}  {}", e.name, e.system.m, e.system.n(), e.description)?;
            }
        }
        CatalogAction::Show { name } => {
            let e = catalog::entry(name).ok_or_else(|| input(format!("unknown catalog system `{name}`")))?;
            write!(stdout, "{}", e.describe())?;
        }
    }
    Ok(0)
}
