//! Geometry of the vertical cotangent bundle V*Q.
//!
//! Index convention, used everywhere in this crate: `∂ᵢ = ∂/∂qⁱ` and
//! `∂ⁱ = ∂/∂pᵢ`. The vertical bracket is
//!
//! ```text
//! {f, g}_V = Σᵢ ∂ⁱf ∂ᵢg − ∂ⁱg ∂ᵢf
//! ```
//!
//! so `{p1, q1}_V = 1`. Hamiltonian vector fields are
//! `ϑ_f = ∂ⁱf ∂ᵢ − ∂ᵢf ∂ⁱ` and satisfy `[ϑ_f, ϑ_g] = ϑ_{f,g}` with the
//! commutator `[X, Y] = DY·X − DX·Y`. Time is a base coordinate: it never
//! enters the bracket.

use crate::expr::{Dual2, EvalError, ParseError, ScalarField};

/// A point `(t, qⁱ, pᵢ)` of V*Q.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhasePoint {
    pub t: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(t: f64, q: Vec<f64>, p: Vec<f64>) -> Self {
        assert_eq!(q.len(), p.len(), "q and p must have the same length");
        PhasePoint { t, q, p }
    }

    pub fn dof(&self) -> usize {
        self.q.len()
    }

    /// Flat layout `[t, q1..qm, p1..pm]`.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(1 + 2 * self.dof());
        c.push(self.t);
        c.extend_from_slice(&self.q);
        c.extend_from_slice(&self.p);
        c
    }

    pub fn from_coords(m: usize, c: &[f64]) -> Self {
        PhasePoint {
            t: c[0],
            q: c[1..1 + m].to_vec(),
            p: c[1 + m..1 + 2 * m].to_vec(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.q.iter().chain(&self.p).all(|x| x.is_finite())
    }
}

/// A non-autonomous Hamiltonian system with candidate integrals of motion.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub name: String,
    pub m: usize,
    pub hamiltonian: ScalarField,
    pub integrals: Vec<ScalarField>,
}

impl SystemSpec {
    /// Integrals are named `Phi1, Phi2, ...`.
    pub fn parse(name: &str, m: usize, hamiltonian: &str, integrals: &[&str]) -> Result<Self, ParseError> {
        assert!(m >= 1, "a system needs at least one degree of freedom");
        let hamiltonian = ScalarField::parse("H", hamiltonian, m, false)?;
        let integrals = integrals
            .iter()
            .enumerate()
            .map(|(i, src)| ScalarField::parse(&format!("Phi{}", i + 1), src, m, false))
            .collect::<Result<_, _>>()?;
        Ok(SystemSpec {
            name: name.to_string(),
            m,
            hamiltonian,
            integrals,
        })
    }

    pub fn n(&self) -> usize {
        self.integrals.len()
    }

    /// Same Hamiltonian, different integrals.
    pub fn with_integrals(&self, integrals: Vec<ScalarField>) -> Self {
        SystemSpec {
            integrals,
            ..self.clone()
        }
    }
}

/// Tangent vector on V*Q; `dt` is 0 for ϑ_f and 1 for γ_H.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalTangent {
    pub dt: f64,
    pub dq: Vec<f64>,
    pub dp: Vec<f64>,
}

impl VerticalTangent {
    pub fn is_finite(&self) -> bool {
        self.dt.is_finite() && self.dq.iter().chain(&self.dp).all(|x| x.is_finite())
    }
}

/// `Σᵢ ∂ⁱf ∂ᵢg − ∂ⁱg ∂ᵢf` from flat gradients over `[t, q, p, ...]`.
pub(crate) fn bracket_from_grads(m: usize, gf: &[f64], gg: &[f64]) -> f64 {
    (0..m)
        .map(|i| gf[1 + m + i] * gg[1 + i] - gg[1 + m + i] * gf[1 + i])
        .sum()
}

/// Gradient of `{f, g}_V` over every flat coordinate, from second-order duals.
pub(crate) fn bracket_gradient_from_duals(m: usize, f: &Dual2, g: &Dual2) -> Vec<f64> {
    let n = f.dim();
    (0..n)
        .map(|z| {
            (0..m)
                .map(|i| {
                    let (qi, pi) = (1 + i, 1 + m + i);
                    f.dd(pi, z) * g.d(qi) + f.d(pi) * g.dd(qi, z)
                        - g.dd(pi, z) * f.d(qi)
                        - g.d(pi) * f.dd(qi, z)
                })
                .sum()
        })
        .collect()
}

pub fn vertical_bracket(f: &ScalarField, g: &ScalarField, x: &PhasePoint) -> Result<f64, EvalError> {
    let c = x.coords();
    let gf = f.dual1(&c)?.grad;
    let gg = g.dual1(&c)?.grad;
    Ok(bracket_from_grads(x.dof(), &gf, &gg))
}

/// Gradient of `{f, g}_V` in the flat layout `[t, q, p]`.
pub fn bracket_gradient(f: &ScalarField, g: &ScalarField, x: &PhasePoint) -> Result<Vec<f64>, EvalError> {
    let c = x.coords();
    Ok(bracket_gradient_from_duals(x.dof(), &f.dual2(&c)?, &g.dual2(&c)?))
}

/// ϑ_f at `x`: `dqⁱ = ∂ⁱf`, `dpᵢ = −∂ᵢf`, `dt = 0`.
pub fn hamiltonian_vector_field(f: &ScalarField, x: &PhasePoint) -> Result<VerticalTangent, EvalError> {
    let g = f.gradient(&x.coords())?;
    Ok(VerticalTangent {
        dt: 0.0,
        dq: g.dp,
        dp: g.dq.iter().map(|v| -v).collect(),
    })
}

/// The Hamilton vector field γ_H = ∂_t + ∂ⁱℋ ∂ᵢ − ∂ᵢℋ ∂ⁱ.
pub fn gamma_h(system: &SystemSpec, x: &PhasePoint) -> Result<VerticalTangent, EvalError> {
    let mut v = hamiltonian_vector_field(&system.hamiltonian, x)?;
    v.dt = 1.0;
    Ok(v)
}

/// `L_{γ_H} F = ∂_t F + {ℋ, F}_V`; zero everywhere iff F is an integral of motion.
pub fn lie_derivative(system: &SystemSpec, f: &ScalarField, x: &PhasePoint) -> Result<f64, EvalError> {
    let c = x.coords();
    let gh = system.hamiltonian.dual1(&c)?.grad;
    let gf = f.dual1(&c)?.grad;
    Ok(gf[0] + bracket_from_grads(x.dof(), &gh, &gf))
}

/// Components of ϑ_f and its Jacobian over the flat coordinates, from a dual.
/// Row `j` of the Jacobian is the gradient of component `j`; components are
/// ordered `[t, q, p]` with a zero time component.
fn vertical_field_with_jacobian(m: usize, f: &Dual2) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = 1 + 2 * m;
    let mut comp = vec![0.0; n];
    let mut jac = vec![vec![0.0; n]; n];
    for i in 0..m {
        let (qi, pi) = (1 + i, 1 + m + i);
        comp[qi] = f.d(pi);
        comp[pi] = -f.d(qi);
        for z in 0..n {
            jac[qi][z] = f.dd(pi, z);
            jac[pi][z] = -f.dd(qi, z);
        }
    }
    (comp, jac)
}

/// `[X, Y]^j = Σ_z X^z ∂_z Y^j − Y^z ∂_z X^j`
fn lie_bracket(x: &[f64], dx: &[Vec<f64>], y: &[f64], dy: &[Vec<f64>]) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            (0..x.len())
                .map(|z| x[z] * dy[j][z] - y[z] * dx[j][z])
                .sum()
        })
        .collect()
}

/// `[ϑ_f, ϑ_g] − ϑ_{f,g}` over `(q, p)`, length `2m`. Zero up to round-off.
pub fn commutator_defect(f: &ScalarField, g: &ScalarField, x: &PhasePoint) -> Result<Vec<f64>, EvalError> {
    let m = x.dof();
    let c = x.coords();
    let (df, dg) = (f.dual2(&c)?, g.dual2(&c)?);
    let (xf, jf) = vertical_field_with_jacobian(m, &df);
    let (xg, jg) = vertical_field_with_jacobian(m, &dg);
    let comm = lie_bracket(&xf, &jf, &xg, &jg);
    let grad_b = bracket_gradient_from_duals(m, &df, &dg);
    Ok((0..2 * m)
        .map(|k| {
            let j = 1 + k;
            let target = if k < m { grad_b[1 + m + k] } else { -grad_b[1 + (k - m)] };
            comm[j] - target
        })
        .collect())
}

/// `[γ_H, ϑ_F] − ϑ_{L_{γ_H} F}` over `(t, q, p)`, length `2m + 1`.
pub fn gamma_commutator_defect(system: &SystemSpec, f: &ScalarField, x: &PhasePoint) -> Result<Vec<f64>, EvalError> {
    let m = x.dof();
    let c = x.coords();
    let (dh, df) = (system.hamiltonian.dual2(&c)?, f.dual2(&c)?);
    let (mut xh, jh) = vertical_field_with_jacobian(m, &dh);
    xh[0] = 1.0;
    let (xf, jf) = vertical_field_with_jacobian(m, &df);
    let comm = lie_bracket(&xh, &jh, &xf, &jf);
    // ∂_z (∂_t F + {ℋ, F})
    let grad_b = bracket_gradient_from_duals(m, &dh, &df);
    let grad_l: Vec<f64> = (0..c.len()).map(|z| df.dd(0, z) + grad_b[z]).collect();
    let mut target = vec![0.0; c.len()];
    for i in 0..m {
        target[1 + i] = grad_l[1 + m + i];
        target[1 + m + i] = -grad_l[1 + i];
    }
    Ok(comm.iter().zip(&target).map(|(a, b)| a - b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(src: &str, m: usize) -> ScalarField {
        ScalarField::parse(src, src, m, false).unwrap()
    }

    fn pt(t: f64, q: &[f64], p: &[f64]) -> PhasePoint {
        PhasePoint::new(t, q.to_vec(), p.to_vec())
    }

    /// Central-difference bracket, independent of the dual machinery.
    fn fd_bracket(f: &ScalarField, g: &ScalarField, x: &PhasePoint) -> f64 {
        let h = 1e-6;
        let m = x.dof();
        let c = x.coords();
        let partial = |fld: &ScalarField, k: usize| {
            let (mut a, mut b) = (c.clone(), c.clone());
            a[k] += h;
            b[k] -= h;
            (fld.value(&a).unwrap() - fld.value(&b).unwrap()) / (2.0 * h)
        };
        (0..m)
            .map(|i| partial(f, 1 + m + i) * partial(g, 1 + i) - partial(g, 1 + m + i) * partial(f, 1 + i))
            .sum()
    }

    #[test]
    fn canonical_brackets() {
        let x = pt(0.4, &[0.3, -1.0], &[2.0, 0.1]);
        assert_eq!(vertical_bracket(&field("p1", 2), &field("q1", 2), &x).unwrap(), 1.0);
        assert_eq!(vertical_bracket(&field("q1", 2), &field("q2", 2), &x).unwrap(), 0.0);
    }

    #[test]
    fn oscillator_energy_with_angular_momentum() {
        let e1 = field("(p1^2+q1^2)/2", 2);
        let l = field("q1*p2 - q2*p1", 2);
        let x = pt(0.0, &[1.0, 2.0], &[0.5, -1.0]);
        let b = vertical_bracket(&e1, &l, &x).unwrap();
        assert!((b - 1.5).abs() < 1e-15);
        assert!((fd_bracket(&e1, &l, &x) - 1.5).abs() < 1e-8);
    }

    #[test]
    fn vector_field_examples() {
        let h = field("(p1^2+q1^2)/2", 1);
        let v = hamiltonian_vector_field(&h, &pt(0.0, &[1.0], &[0.0])).unwrap();
        assert_eq!((v.dt, v.dq, v.dp), (0.0, vec![0.0], vec![-1.0]));

        let v = hamiltonian_vector_field(&field("p1", 2), &pt(0.0, &[0.3, 0.2], &[1.0, 1.0])).unwrap();
        assert_eq!((v.dq, v.dp), (vec![1.0, 0.0], vec![0.0, 0.0]));

        let v = hamiltonian_vector_field(&field("q1 - t*p1", 2), &pt(3.0, &[0.0, 0.0], &[0.0, 0.0])).unwrap();
        assert_eq!((v.dq, v.dp), (vec![-3.0, 0.0], vec![-1.0, 0.0]));
    }

    #[test]
    fn hamilton_vector_field_examples() {
        let osc = SystemSpec::parse("osc", 1, "(p1^2+q1^2)/2", &[]).unwrap();
        let v = gamma_h(&osc, &pt(0.0, &[0.0], &[1.0])).unwrap();
        assert_eq!((v.dt, v.dq, v.dp), (1.0, vec![1.0], vec![0.0]));

        let free = SystemSpec::parse("free", 2, "(p1^2+p2^2)/2", &[]).unwrap();
        let v = gamma_h(&free, &pt(1.0, &[5.0, -3.0], &[0.25, -2.0])).unwrap();
        assert_eq!((v.dt, v.dq, v.dp), (1.0, vec![0.25, -2.0], vec![0.0, 0.0]));

        let driven = SystemSpec::parse("driven", 1, "p1^2/2 - sin(t)*q1", &[]).unwrap();
        let v = gamma_h(&driven, &pt(std::f64::consts::FRAC_PI_2, &[0.0], &[0.0])).unwrap();
        assert_eq!((v.dq, v.dp), (vec![0.0], vec![1.0]));
    }

    #[test]
    fn lie_derivative_examples() {
        let free = SystemSpec::parse("free", 2, "(p1^2+p2^2)/2", &[]).unwrap();
        let x = pt(1.3, &[0.2, -0.7], &[1.1, 0.4]);
        assert_eq!(lie_derivative(&free, &field("q1 - t*p1", 2), &x).unwrap(), 0.0);

        let osc = SystemSpec::parse("osc", 1, "(p1^2+q1^2)/2", &[]).unwrap();
        let x1 = pt(0.0, &[0.8], &[-0.3]);
        assert_eq!(lie_derivative(&osc, &osc.hamiltonian, &x1).unwrap(), 0.0);

        let kin = SystemSpec::parse("kin", 1, "p1^2/2", &[]).unwrap();
        assert_eq!(lie_derivative(&kin, &field("q1", 1), &x1).unwrap(), -0.3);
    }

    #[test]
    fn commutator_examples() {
        let x = pt(0.2, &[1.0], &[1.0]);
        let d = commutator_defect(&field("p1", 1), &field("q1", 1), &x).unwrap();
        assert_eq!(d, vec![0.0, 0.0]);

        // {q1^2, p1^2} = -4 q1 p1 by hand; both sides of the identity are linear
        let (f, g) = (field("q1^2", 1), field("p1^2", 1));
        assert_eq!(vertical_bracket(&f, &g, &x).unwrap(), -4.0);
        assert_eq!(commutator_defect(&f, &g, &x).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn commutator_identity_on_oscillator_fields() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let e1 = field("(p1^2+q1^2)/2", 2);
        let l = field("q1*p2 - q2*p1", 2);
        for _ in 0..50 {
            let mut r = || rng.random_range(-2.0..2.0);
            let x = pt(r(), &[r(), r()], &[r(), r()]);
            let d = commutator_defect(&e1, &l, &x).unwrap();
            assert!(d.iter().all(|v| v.abs() < 1e-9), "{d:?}");
        }
    }

    #[test]
    fn gamma_commutes_with_flows_of_integrals() {
        let free = SystemSpec::parse("free", 2, "(p1^2+p2^2)/2", &[]).unwrap();
        let f = field("q1 - t*p1", 2);
        let x = pt(0.7, &[0.1, 0.9], &[-1.2, 0.5]);
        let d = gamma_commutator_defect(&free, &f, &x).unwrap();
        assert!(d.iter().all(|v| *v == 0.0));

        // identity holds for non-integrals too
        let driven = SystemSpec::parse("d", 1, "(p1^2+q1^2)/2 - sin(t)*q1", &[]).unwrap();
        let g = field("q1^2*p1 + t*q1", 1);
        let x = pt(0.4, &[0.6], &[-0.3]);
        let d = gamma_commutator_defect(&driven, &g, &x).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-12), "{d:?}");
    }

    #[test]
    fn bracket_ignores_pure_time_terms() {
        let f = field("q1*p2 + p1^2", 2);
        let f_t = field("q1*p2 + p1^2 + sin(t)*t^3", 2);
        let g = field("q2^2*p1", 2);
        let x = pt(1.1, &[0.5, -0.5], &[0.25, 2.0]);
        assert_eq!(
            vertical_bracket(&f, &g, &x).unwrap(),
            vertical_bracket(&f_t, &g, &x).unwrap()
        );
    }
}
