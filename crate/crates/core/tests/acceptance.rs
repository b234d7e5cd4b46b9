//! Acceptance suite: one line per criterion, nonzero exit on any failure.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use hamverify::action_angle::{
    action_loop_integral, chart_samples, chart_verify, fitted_slope, frequencies, initial_data_check, regauge,
    unwrap_angles, RegaugeSpec,
};
use hamverify::catalog::{catalog_entries, entry};
use hamverify::dynamics::{equivalence_check, integrate_vertical, IntegratorConfig};
use hamverify::integrability::{
    involution_check, lifted_involution_residual, verify, RankPolicy, VerifyConfig,
};
use hamverify::lift::{extended_bracket, projection_identity_defect};
use hamverify::phase_space::{commutator_defect, gamma_commutator_defect, vertical_bracket, PhasePoint, SystemSpec};
use hamverify::sampling::{sample_extended_points, sample_points, SamplingConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{max_abs, product, random_poly, symbolic_bracket};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn bracket_algebra() -> Outcome {
    let m = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut anti, mut leibniz, mut jacobi) = (0.0_f64, 0.0_f64, 0.0_f64);
    for trial in 0..100 {
        let (f, g, h) = (random_poly(&mut rng, m, 3), random_poly(&mut rng, m, 3), random_poly(&mut rng, m, 3));
        let gh = product(&g, &h);
        let b_gh = symbolic_bracket(&g, &h);
        let b_hf = symbolic_bracket(&h, &f);
        let b_fg = symbolic_bracket(&f, &g);
        let pts = sample_points(&SamplingConfig::new(m).with_count(50).with_seed(trial)).map_err(|e| e.to_string())?;
        for x in &pts {
            let br = |a, b| vertical_bracket(a, b, x).unwrap();
            anti = anti.max((br(&f, &g) + br(&g, &f)).abs());
            let val = |a: &hamverify::expr::ScalarField| a.value(&x.coords()).unwrap();
            leibniz = leibniz.max((br(&f, &gh) - br(&f, &g) * val(&h) - val(&g) * br(&f, &h)).abs());
            jacobi = jacobi.max((br(&f, &b_gh) + br(&g, &b_hf) + br(&h, &b_fg)).abs());
        }
    }
    let detail = format!("antisymmetry {anti:.1e}, Leibniz {leibniz:.1e}, Jacobi {jacobi:.1e}");
    ensure(anti == 0.0 && leibniz < 1e-10 && jacobi < 1e-9, detail.clone())?;
    Ok(detail)
}

fn commutator_identity() -> Outcome {
    let m = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut vertical, mut gamma) = (0.0_f64, 0.0_f64);
    for trial in 0..50 {
        let (f, g) = (random_poly(&mut rng, m, 3), random_poly(&mut rng, m, 3));
        let h = random_poly(&mut rng, m, 3);
        let system = SystemSpec {
            name: "random".into(),
            m,
            hamiltonian: h,
            integrals: vec![],
        };
        for x in sample_points(&SamplingConfig::new(m).with_count(20).with_seed(100 + trial)).unwrap() {
            vertical = vertical.max(max_abs(&commutator_defect(&f, &g, &x).unwrap()));
            gamma = gamma.max(max_abs(&gamma_commutator_defect(&system, &f, &x).unwrap()));
        }
    }
    let detail = format!("[ϑ_f, ϑ_g] defect {vertical:.1e}, [γ_H, ϑ_F] defect {gamma:.1e}");
    ensure(vertical < 1e-9 && gamma < 1e-9, detail.clone())?;
    Ok(detail)
}

fn lift_equivalence() -> Outcome {
    let cfg = IntegratorConfig::rk4(1e-3);
    let (mut dev, mut drift, mut runs) = (0.0_f64, 0.0_f64, 0);
    for e in catalog_entries().into_iter().filter(|e| e.complete_flow) {
        for x0 in &e.initial_points {
            let r = equivalence_check(&e.system, x0, x0.t + 10.0, &cfg).map_err(|err| format!("{}: {err}", e.name))?;
            dev = dev.max(r.max_deviation);
            drift = drift.max(r.i0_drift).max(r.max_abs_i0);
            runs += 1;
        }
    }
    // pullback brackets agree bit for bit with vertical brackets
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut homomorphism = 0.0_f64;
    for e in catalog_entries() {
        let m = e.system.m;
        let (f, g) = (random_poly(&mut rng, m, 3), random_poly(&mut rng, m, 3));
        let mut pairs: Vec<_> = vec![(f, g)];
        for a in 0..e.system.n() {
            for b in a + 1..e.system.n() {
                pairs.push((e.system.integrals[a].clone(), e.system.integrals[b].clone()));
            }
        }
        let pts = sample_extended_points(&e.sampling.clone().with_count(200)).unwrap();
        for x in &pts {
            for (f, g) in &pairs {
                let lhs = extended_bracket(f, g, x).unwrap();
                let rhs = vertical_bracket(f, g, &x.project()).unwrap();
                homomorphism = homomorphism.max((lhs - rhs).abs());
            }
        }
    }
    let detail = format!("{runs} runs: deviation {dev:.1e}, I0 drift {drift:.1e}, pullback bracket gap {homomorphism:e}");
    ensure(dev < 1e-8 && drift < 1e-8 && homomorphism == 0.0, detail.clone())?;
    Ok(detail)
}

fn projection_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut worst = 0.0_f64;
    let mut systems = 0;
    for e in catalog_entries() {
        let m = e.system.m;
        let pts = sample_extended_points(&e.sampling.clone().with_count(20).with_seed(5)).unwrap();
        for _ in 0..50 {
            let f = random_poly(&mut rng, m, 3);
            for x in &pts {
                worst = worst.max(projection_identity_defect(&e.system, &f, x).unwrap());
            }
        }
        systems += 1;
    }
    let detail = format!("{systems} systems, max defect {worst:.1e}");
    ensure(worst < 1e-10, detail.clone())?;
    Ok(detail)
}

fn superintegrability_verdicts() -> Outcome {
    let run = |name: &str| {
        let e = entry(name).unwrap();
        let mut cfg = VerifyConfig::new(e.system.m);
        cfg.sampling = e.sampling.clone();
        verify(&e.system, &cfg).unwrap()
    };
    let mut notes = Vec::new();
    for name in ["free2d", "osc2d"] {
        let v = run(name);
        let ind = v.independence.as_ref().unwrap();
        let cor = v.corank.as_ref().unwrap();
        let res = v.integrals_residual.as_ref().unwrap();
        let lif = v.lifted.as_ref().unwrap();
        ensure(ind.pass && ind.consensus == 3, format!("{name}: independence rank {}", ind.consensus))?;
        ensure(v.closure.as_ref().unwrap().pass, format!("{name}: closure failed"))?;
        ensure(cor.pass && cor.constant && cor.k == 1, format!("{name}: corank {:?}", cor.values_seen))?;
        ensure(res.max < 1e-12, format!("{name}: integral residual {:e}", res.max))?;
        ensure(
            lif.s0_pass && lif.max_s0 < 1e-12 && lif.corank.pass && lif.corank.k == 2,
            format!("{name}: lifted s0 {:e}, bordered corank {}", lif.max_s0, lif.corank.k),
        )?;
        ensure(v.pass, format!("{name}: verdict {:?}", v.failed_checks()))?;
        notes.push(format!("{name} ok (residual {:.0e})", res.max));
    }
    let broken = run("broken_closure");
    let closure = broken.closure.as_ref().unwrap();
    let witness = closure.pairs.iter().find_map(|p| p.witness.as_ref());
    ensure(!closure.pass && witness.is_some(), "broken_closure: closure did not fail with a witness".into())?;
    ensure(broken.independence.as_ref().unwrap().pass, "broken_closure: independence should hold".into())?;
    let dup = run("duplicated_integral");
    ensure(!dup.independence.as_ref().unwrap().pass, "duplicated_integral: independence passed".into())?;
    ensure(dup.failed_checks() == vec!["independence"], format!("duplicated_integral: {:?}", dup.failed_checks()))?;
    notes.push("broken_closure fails closure with witness".into());
    notes.push("duplicated_integral fails independence".into());
    Ok(notes.join("; "))
}

fn complete_integrability() -> Outcome {
    let mut worst_bracket = 0.0_f64;
    let mut worst_lifted = 0.0_f64;
    let mut names = Vec::new();
    for e in catalog_entries() {
        if e.system.n() != e.system.m || e.expected.as_ref().is_none_or(|x| !x.failing.is_empty()) {
            continue;
        }
        let samples = sample_points(&e.sampling).unwrap();
        let r = involution_check(&e.system, &samples, &RankPolicy::default(), 1e-10).unwrap();
        ensure(r.pass, format!("{}: involution max bracket {:e}", e.name, r.max_bracket))?;
        let ext = sample_extended_points(&e.sampling).unwrap();
        let l = lifted_involution_residual(&e.system, &ext).unwrap();
        ensure(l < 1e-10, format!("{}: lifted brackets {l:e}", e.name))?;
        worst_bracket = worst_bracket.max(r.max_bracket);
        worst_lifted = worst_lifted.max(l);
        names.push(e.name);
    }
    ensure(names.len() >= 3, format!("only {} involutive entries", names.len()))?;
    Ok(format!(
        "{}: brackets {worst_bracket:.1e}, lifted {worst_lifted:.1e}",
        names.join(", ")
    ))
}

fn action_angle() -> Outcome {
    let cfg = IntegratorConfig::rk4(1e-3);
    let osc = entry("osc1d").unwrap();
    let plain = osc.plain_chart().unwrap();
    let (mut action_err, mut freq_err) = (0.0_f64, 0.0_f64);
    for e in [0.5, 1.0, 2.0] {
        let level = osc.level(e, 0).unwrap();
        let a = action_loop_integral(&osc.system, &level, &cfg).map_err(|err| err.to_string())?;
        action_err = action_err.max((a.action - e).abs());
        let f = frequencies(&osc.system, plain, &plain.forward(&level.start).unwrap(), 10.0, &cfg).unwrap();
        freq_err = freq_err
            .max((f.fd[0] - 1.0).abs())
            .max((f.measured[0] - 1.0).abs())
            .max((2.0 * PI / a.period - 1.0).abs());
    }
    ensure(action_err < 1e-6, format!("loop action error {action_err:e}"))?;
    ensure(freq_err < 1e-4, format!("frequency error {freq_err:e}"))?;

    let mut charts = 0;
    for e in catalog_entries() {
        for c in &e.charts {
            let samples = chart_samples(c, &e.sampling.clone().with_count(200)).unwrap();
            ensure(samples.len() == 200, format!("{}: {} chart samples", c.name, samples.len()))?;
            let r = chart_verify(&e.system, c, &samples, 1e-8).unwrap();
            ensure(r.pass, format!("{}: chart_verify {r:?}", c.name))?;
            charts += 1;
        }
    }

    let mut id_drift = 0.0_f64;
    for e in catalog_entries() {
        let Some(chart) = e.initial_data_chart() else { continue };
        let trs: Vec<_> = e
            .initial_points
            .iter()
            .map(|x0| integrate_vertical(&e.system, x0, x0.t + 10.0, &cfg.clone().with_record_every(10)).unwrap())
            .collect();
        let r = initial_data_check(&e.system, chart, &trs).unwrap();
        ensure(r.pass, format!("{}: {r:?}", chart.name))?;
        id_drift = id_drift.max(r.max_action_drift).max(r.max_angle_error).max(r.max_pair_drift);
    }

    let base = osc.initial_data_chart().unwrap();
    let spec = RegaugeSpec::parse("I1", 1).unwrap();
    let rotated = regauge(base, &spec).unwrap();
    let x0 = osc.initial_points[1].clone();
    let tr = integrate_vertical(&osc.system, &x0, x0.t + 10.0, &cfg).unwrap();
    let pts: Vec<_> = tr.points().map(|x| rotated.forward(&x).unwrap()).collect();
    let times: Vec<f64> = pts.iter().map(|c| c.t).collect();
    let mut y: Vec<f64> = pts.iter().map(|c| c.angles[0]).collect();
    unwrap_angles(&mut y);
    let slope = fitted_slope(&times, &y);
    ensure((slope - 1.0).abs() < 1e-5, format!("regauged slope {slope}"))?;

    let back = regauge(&rotated, &spec.negated()).unwrap();
    let mut round = 0.0_f64;
    for x in chart_samples(base, &osc.sampling).unwrap() {
        let (a, b) = (base.forward(&x).unwrap(), back.forward(&x).unwrap());
        round = a.coords().iter().zip(b.coords()).fold(round, |m, (u, v)| m.max((u - v).abs()));
        let z = back.inverse(&a).unwrap();
        round = z.q.iter().chain(&z.p).zip(x.q.iter().chain(&x.p)).fold(round, |m, (u, v)| m.max((u - v).abs()));
    }
    ensure(round < 1e-10, format!("regauge round trip {round:e}"))?;
    Ok(format!(
        "action {action_err:.1e}, frequency {freq_err:.1e}, {charts} charts verified, initial-data drift {id_drift:.1e}, slope {:.1e} off, round trip {round:.1e}",
        (slope - 1.0).abs()
    ))
}

fn integrator_order() -> Outcome {
    let osc = entry("osc1d").unwrap();
    let x0 = PhasePoint::new(0.0, vec![1.0], vec![0.0]);
    let t = 2.0 * PI;
    let err = |h: f64| {
        let tr = integrate_vertical(&osc.system, &x0, t, &IntegratorConfig::rk4(h)).unwrap();
        let x = tr.last_point();
        let (tq, tp) = (x.t.cos(), -x.t.sin());
        (x.q[0] - tq).abs().max((x.p[0] - tp).abs())
    };
    let ratio = err(0.1) / err(0.05);
    ensure((12.0..=20.0).contains(&ratio), format!("error ratio {ratio:.3}"))?;
    Ok(format!("error ratio {ratio:.3}"))
}

fn cli_contract() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_hamverify");
    let run = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().expect("binary runs");
        (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
    };
    let json = |s: &str| serde_json::from_str::<serde_json::Value>(s).map_err(|e| format!("report does not parse: {e}"));

    let (code, out) = run(&["verify", "--system", "free2d", "--seed", "42"]);
    ensure(code == 0, format!("verify free2d exited {code}"))?;
    let v = json(&out)?;
    ensure(v["schema"] == 1 && v["seed"] == 42 && v["k"] == 1, format!("verify free2d report: {v}"))?;
    let report: hamverify::cli::report::VerifyReport = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    ensure(json(&serde_json::to_string(&report).unwrap())? == v, "verify report does not round-trip".into())?;

    let (code, out) = run(&["verify", "--system", "broken_closure"]);
    ensure(code == 1, format!("verify broken_closure exited {code}"))?;
    let v = json(&out)?;
    ensure(v["closure"]["pass"] == false && v["seed"] == 0, "broken_closure report lacks closure failure".into())?;

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[system]\nm = 1\nhamiltonian = \"(p1^2 + q1^2\"\n").unwrap();
    let (code, out) = run(&["verify", "--config", bad.to_str().unwrap()]);
    ensure(code == 2 && out.is_empty(), format!("malformed config exited {code}"))?;
    let other = dir.path().join("other.toml");
    std::fs::write(&other, "[system]\nname = \"free2d\"\n[sampling]\ncount = 0\n").unwrap();
    ensure(run(&["verify", "--config", other.to_str().unwrap()]).0 == 2, "count = 0 accepted".into())?;

    let good = dir.path().join("good.toml");
    std::fs::write(
        &good,
        "[system]\nm = 1\nhamiltonian = \"(p1^2+q1^2)/2\"\n[integrals]\nexprs = [\"(p1^2+q1^2)/2\"]\n[sampling]\nseed = 9\ncount = 50\n[checks]\nrun = [\"involution\", \"residuals\"]\n",
    )
    .unwrap();
    let (code, out) = run(&["verify", "--config", good.to_str().unwrap()]);
    ensure(code == 0 && json(&out)?["seed"] == 9, format!("inline config exited {code}"))?;

    let (code, out) = run(&["integrate", "--system", "blowup_fixture"]);
    ensure(code == 1 && json(&out)?["error"]["kind"] == "BlowupDetected", format!("blowup exited {code}"))?;
    ensure(run(&["actions", "--system", "osc1d", "--corrupt-chart"]).0 == 1, "corrupted chart passed".into())?;
    ensure(run(&["catalog", "show", "no_such_system"]).0 == 2, "unknown catalog name accepted".into())?;
    let (code, out) = run(&["catalog", "list"]);
    ensure(code == 0 && out.lines().count() >= 6, "catalog list too short".into())?;
    Ok("exit codes 0/1/2 and JSON and CSV outputs well formed".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("bracket algebra", bracket_algebra),
        ("commutator identity", commutator_identity),
        ("lift equivalence", lift_equivalence),
        ("projection identity", projection_identity),
        ("superintegrability verdicts", superintegrability_verdicts),
        ("complete integrability", complete_integrability),
        ("action-angle coordinates", action_angle),
        ("integrator order", integrator_order),
        ("cli contract", cli_contract),
    ];
    let mut failures = 0;
    let start = Instant::now();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {} {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failures,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
