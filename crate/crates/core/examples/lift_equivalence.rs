//! The driven oscillator integrated on V*Q and, lifted, on T*Q.
//!
//! Run with:
//!   cargo run --example lift_equivalence

use hamverify::catalog::entry;
use hamverify::dynamics::{equivalence_check, integrate_extended, IntegratorConfig};
use hamverify::lift::section_h;

fn main() {
    let e = entry("driven_osc").unwrap();
    let cfg = IntegratorConfig::rk4(1e-3);
    let x0 = &e.initial_points[0];

    let start = section_h(&e.system, x0).unwrap();
    println!("start on the section: p0 = {:.6}", start.p0);
    let lifted = integrate_extended(&e.system, &start, 10.0, &cfg.clone().with_record_every(2000)).unwrap();
    println!("{}", lifted.csv_header());
    for smp in &lifted.samples {
        println!("{:5.1}  {:?}  I0 = {:e}", smp.s, smp.coords, smp.i0.unwrap());
    }

    let r = equivalence_check(&e.system, x0, x0.t + 10.0, &cfg).unwrap();
    println!("max deviation {:e}, I0 drift {:e} over {} samples", r.max_deviation, r.i0_drift, r.samples);
}
