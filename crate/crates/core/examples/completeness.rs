//! Probe for finite-time blowup: the inverted quartic escapes, the
//! oscillator does not.
//!
//! Run with:
//!   cargo run --example completeness

use hamverify::catalog::entry;
use hamverify::dynamics::{completeness_probe, IntegratorConfig, ProbeField};
use hamverify::sampling::sample_points;

fn main() {
    let cfg = IntegratorConfig::dopri5(1e-10, 1e-10);
    for name in ["blowup_fixture", "osc1d"] {
        let e = entry(name).unwrap();
        let seeds = sample_points(&e.sampling.clone().with_count(8)).unwrap();
        let verdicts = completeness_probe(&e.system, &ProbeField::Hamilton, &seeds, 5.0, &cfg);
        println!("{name}:");
        for v in verdicts {
            println!("  q = {:+.3} p = {:+.3}   forward {:?}   backward {:?}", v.seed.q[0], v.seed.p[0], v.forward, v.backward);
        }
    }
}
