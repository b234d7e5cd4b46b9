//! Parse a phase-space function and read off exact derivatives.
//!
//! Run with:
//!   cargo run --example expressions

use hamverify::expr::{parse, ScalarField, Var};

fn main() {
    let src = "q1^2*p1 - t*sin(p2) + atan2(q2, p1)";
    let f = ScalarField::parse("f", src, 2, false).unwrap();
    println!("f = {}", f.expression());

    // coordinates are [t, q1, q2, p1, p2]
    let x = [0.5, 1.0, -0.3, 2.0, 0.7];
    let g = f.gradient(&x).unwrap();
    println!("f(x)    = {:.12}", g.value);
    println!("df/dt   = {:.12}", g.dt);
    println!("df/dq   = {:?}", g.dq);
    println!("df/dp   = {:?}", g.dp);
    println!("hessian =\n{:.6}", f.hessian(&x).unwrap());

    let d = f.expression().derivative(Var::Pos(0));
    println!("symbolic df/dq1 = {d}");

    match parse("q1 + * p1", 1, false) {
        Ok(_) => unreachable!(),
        Err(e) => println!("error at offset {}: {e}", e.offset()),
    }
}
