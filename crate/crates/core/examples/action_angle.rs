//! Loop actions, frequencies, and the oscillator's charts.
//!
//! Run with:
//!   cargo run --example action_angle

use hamverify::action_angle::{action_loop_integral, chart_samples, chart_verify, frequencies, regauge, RegaugeSpec};
use hamverify::catalog::entry;
use hamverify::dynamics::IntegratorConfig;

fn main() {
    let e = entry("osc1d").unwrap();
    let cfg = IntegratorConfig::rk4(1e-3);
    let chart = e.plain_chart().unwrap();

    println!("energy  loop action       period            frequency (fd / measured)");
    for energy in [0.5, 1.0, 2.0] {
        let level = e.level(energy, 0).unwrap();
        let a = action_loop_integral(&e.system, &level, &cfg).unwrap();
        let f = frequencies(&e.system, chart, &chart.forward(&level.start).unwrap(), 10.0, &cfg).unwrap();
        println!("{energy:6.2}  {:.12}  {:.12}  {:.9} / {:.9}", a.action, a.period, f.fd[0], f.measured[0]);
    }

    let samples = chart_samples(chart, &e.sampling).unwrap();
    for c in [chart.clone(), chart.corrupted()] {
        let r = chart_verify(&e.system, &c, &samples, 1e-8).unwrap();
        println!("{}: pass = {}", r.chart, r.pass);
        for sub in [&r.brackets, &r.hamiltonian, &r.integrals, &r.round_trip] {
            println!("  {:<40} {:.1e} {}", sub.name, sub.max_error, sub.detail.as_deref().unwrap_or(""));
        }
    }

    let rotating = regauge(e.initial_data_chart().unwrap(), &RegaugeSpec::parse("I1", 1).unwrap()).unwrap();
    println!("regauged angle: {}", rotating.angles[0].expression());
    println!("regauged chart Hamiltonian: {}", rotating.hamiltonian(&e.system));
}
