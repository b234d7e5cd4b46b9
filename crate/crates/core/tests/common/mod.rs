#![allow(dead_code)]

use hamverify::expr::{Expression, ScalarField, Var};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Source text of a random polynomial in `t, q1..qm, p1..pm` (plus `p0`
/// when `with_p0`) with total degree at most `max_deg`.
pub fn random_poly_src(rng: &mut ChaCha8Rng, m: usize, max_deg: u32, with_p0: bool) -> String {
    let mut vars = vec!["t".to_string()];
    vars.extend((1..=m).map(|i| format!("q{i}")));
    vars.extend((1..=m).map(|i| format!("p{i}")));
    if with_p0 {
        vars.push("p0".into());
    }
    let terms = rng.random_range(1..=5);
    let mut out = Vec::new();
    for _ in 0..terms {
        let c: f64 = rng.random_range(-1.0..1.0);
        let mut term = format!("({c:.6})");
        for _ in 0..rng.random_range(0..=max_deg) {
            term.push('*');
            term.push_str(&vars[rng.random_range(0..vars.len())]);
        }
        out.push(term);
    }
    out.join(" + ")
}

pub fn random_poly(rng: &mut ChaCha8Rng, m: usize, max_deg: u32) -> ScalarField {
    let src = random_poly_src(rng, m, max_deg, false);
    ScalarField::parse("f", &src, m, false).expect("generated polynomial parses")
}

/// `{f, g}_V` built symbolically from derivatives.
pub fn symbolic_bracket(f: &ScalarField, g: &ScalarField) -> ScalarField {
    let m = f.dof();
    let (fe, ge) = (f.expression(), g.expression());
    let mut b = Expression::constant(0.0);
    for i in 0..m {
        let term = fe
            .derivative(Var::Mom(i))
            .mul(&ge.derivative(Var::Pos(i)))
            .sub(&ge.derivative(Var::Mom(i)).mul(&fe.derivative(Var::Pos(i))));
        b = b.add(&term);
    }
    ScalarField::new("bracket", b, m)
}

pub fn product(f: &ScalarField, g: &ScalarField) -> ScalarField {
    ScalarField::new("product", f.expression().mul(g.expression()), f.dof())
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
