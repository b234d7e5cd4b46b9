//! Vertical brackets, Lie derivatives and the commutator identity on the
//! isotropic oscillator.
//!
//! Run with:
//!   cargo run --example brackets

use hamverify::catalog::entry;
use hamverify::integrability::structure_matrix;
use hamverify::phase_space::{commutator_defect, lie_derivative, vertical_bracket, PhasePoint};

fn main() {
    let osc = entry("osc2d").unwrap();
    let s = &osc.system;
    let x = PhasePoint::new(0.3, vec![0.8, -0.4], vec![0.2, 1.1]);

    let names = ["E1", "S1", "L"];
    for a in 0..3 {
        for b in a + 1..3 {
            let v = vertical_bracket(&s.integrals[a], &s.integrals[b], &x).unwrap();
            println!("{{{}, {}}} = {v:+.12}", names[a], names[b]);
        }
    }
    let sm = structure_matrix(s, &x).unwrap();
    let (e1, s1, l) = (sm.phi[0], sm.phi[1], sm.phi[2]);
    let e2 = (s1 * s1 + l * l) / (4.0 * e1);
    println!("expected  -L = {:+.12}, S1 = {s1:+.12}, 2(E2 - E1) = {:+.12}", -l, 2.0 * (e2 - e1));

    for (f, name) in s.integrals.iter().zip(names) {
        println!("L_gamma {name} = {:e}", lie_derivative(s, f, &x).unwrap());
    }
    let defect = commutator_defect(&s.integrals[1], &s.integrals[2], &x).unwrap();
    println!("[theta_S1, theta_L] - theta_{{S1,L}} = {defect:?}");
}
