//! Integrate the Kepler problem and watch its integrals.
//!
//! Run with:
//!   cargo run --example integrate

use hamverify::catalog::entry;
use hamverify::dynamics::{integrate_vertical, IntegratorConfig};

fn main() {
    let Some(e) = entry("kepler2d") else {
        println!("built without the kepler feature");
        return;
    };
    let x0 = &e.initial_points[1];
    for cfg in [IntegratorConfig::rk4(1e-3), IntegratorConfig::dopri5(1e-10, 1e-10)] {
        let tr = integrate_vertical(&e.system, x0, x0.t + 20.0, &cfg).unwrap();
        println!("{:?}: {} accepted, {} rejected steps", cfg.method, tr.stats.accepted, tr.stats.rejected);
        for m in &tr.monitors {
            println!("  {:<4} initial {:+.12}  max drift {:.2e}", m.name, m.initial, m.max_drift);
        }
    }
    let tr = integrate_vertical(&e.system, x0, x0.t + 1.0, &IntegratorConfig::rk4(0.1)).unwrap();
    tr.write_csv(std::io::stdout()).unwrap();
}
