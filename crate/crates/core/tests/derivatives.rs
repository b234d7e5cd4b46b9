mod common;

use hamverify::expr::ScalarField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Case {
    src: &'static str,
    at: [f64; 3],
    grad: [f64; 3],
    /// Upper triangle: tt, tq, tp, qq, qp, pp.
    hess: [f64; 6],
}

const CASES: [Case; 10] = [
    Case { src: "q1^2*p1", at: [0.0, 2.0, 3.0], grad: [0.0, 12.0, 4.0], hess: [0.0, 0.0, 0.0, 6.0, 4.0, 0.0] },
    Case { src: "q1 - t*p1", at: [1.5, 2.0, -1.0], grad: [1.0, 1.0, -1.5], hess: [0.0, 0.0, -1.0, 0.0, 0.0, 0.0] },
    Case { src: "(p1^2+q1^2)/2", at: [0.0, 3.0, 4.0], grad: [0.0, 3.0, 4.0], hess: [0.0, 0.0, 0.0, 1.0, 0.0, 1.0] },
    Case { src: "p1^3 - 2*q1*p1 + 5", at: [0.0, 1.0, 2.0], grad: [0.0, -4.0, 10.0], hess: [0.0, 0.0, 0.0, 0.0, -2.0, 12.0] },
    Case { src: "t^2*q1", at: [3.0, 2.0, 0.0], grad: [12.0, 9.0, 0.0], hess: [4.0, 6.0, 0.0, 0.0, 0.0, 0.0] },
    Case { src: "q1/p1", at: [0.0, 3.0, 2.0], grad: [0.0, 0.5, -0.75], hess: [0.0, 0.0, 0.0, 0.0, -0.25, 0.75] },
    Case { src: "exp(q1)", at: [0.0, 0.0, 0.0], grad: [0.0, 1.0, 0.0], hess: [0.0, 0.0, 0.0, 1.0, 0.0, 0.0] },
    Case { src: "sqrt(q1)", at: [0.0, 4.0, 0.0], grad: [0.0, 0.25, 0.0], hess: [0.0, 0.0, 0.0, -0.03125, 0.0, 0.0] },
    Case { src: "sin(q1)*cos(p1) + p1", at: [0.0, 0.0, 0.0], grad: [0.0, 1.0, 1.0], hess: [0.0; 6] },
    Case { src: "atan2(q1, p1)", at: [0.0, 1.0, 1.0], grad: [0.0, 0.5, -0.5], hess: [0.0, 0.0, 0.0, -0.5, 0.0, 0.5] },
];

#[test]
fn hand_expanded_cases() {
    for c in &CASES {
        let f = ScalarField::parse(c.src, c.src, 1, false).unwrap();
        let d = f.dual2(&c.at).unwrap();
        for i in 0..3 {
            assert_eq!(d.d(i), c.grad[i], "{} d{i}", c.src);
        }
        let mut k = 0;
        for i in 0..3 {
            for j in i..3 {
                assert_eq!(d.dd(i, j), c.hess[k], "{} d{i}d{j}", c.src);
                assert_eq!(d.dd(j, i), c.hess[k], "{} symmetry", c.src);
                k += 1;
            }
        }
        let g = f.gradient(&c.at).unwrap();
        assert_eq!([g.dt, g.dq[0], g.dp[0]], c.grad, "{}", c.src);
    }
}

/// Central difference with one Richardson step; exact up to round-off on
/// polynomials of degree ≤ 4.
fn fd_gradient(f: &ScalarField, x: &[f64]) -> Vec<f64> {
    let central = |i: usize, h: f64| {
        let (mut a, mut b) = (x.to_vec(), x.to_vec());
        a[i] += h;
        b[i] -= h;
        (f.value(&a).unwrap() - f.value(&b).unwrap()) / (2.0 * h)
    };
    (0..x.len())
        .map(|i| {
            let h = 1e-2;
            (4.0 * central(i, h / 2.0) - central(i, h)) / 3.0
        })
        .collect()
}

fn fd_hessian(f: &ScalarField, x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mixed = |i: usize, j: usize, h: f64| {
        let at = |si: f64, sj: f64| {
            let mut y = x.to_vec();
            y[i] += si * h;
            y[j] += sj * h;
            f.value(&y).unwrap()
        };
        (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h)
    };
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let h = 2e-2;
                    (4.0 * mixed(i, j, h / 2.0) - mixed(i, j, h)) / 3.0
                })
                .collect()
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[test]
fn random_polynomials_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        // m = 2 gives the five variables t, q1, q2, p1, p2
        let f = common::random_poly(&mut rng, 2, 4);
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d = f.dual2(&x).unwrap();
        let g = fd_gradient(&f, &x);
        let h = fd_hessian(&f, &x);
        for i in 0..5 {
            worst = worst.max(rel(d.d(i), g[i]));
            for j in 0..5 {
                worst = worst.max(rel(d.dd(i, j), h[i][j]));
            }
        }
    }
    assert!(worst <= 1e-6, "worst relative error {worst:e}");
}

#[test]
fn hessian_matrix_matches_second_order_duals() {
    let f = ScalarField::parse("f", "q1^2*p2 - t*q2*p1 + p1^4", 2, false).unwrap();
    let x = [0.3, -1.0, 0.5, 2.0, -0.7];
    let h = f.hessian(&x).unwrap();
    let d = f.dual2(&x).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            assert_eq!(h[(i, j)], d.dd(i, j));
        }
    }
}
