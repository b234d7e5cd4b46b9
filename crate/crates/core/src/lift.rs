//! The homogeneous phase space T*Q with coordinates `(t, qⁱ, p0, pᵢ)`.
//!
//! The symplectic bracket is
//!
//! ```text
//! {f, g} = ∂⁰f ∂_t g − ∂⁰g ∂_t f + ∂ⁱf ∂ᵢg − ∂ⁱg ∂ᵢf
//! ```
//!
//! with `∂⁰ = ∂/∂p0`. The autonomous Hamiltonian `ℋ* = p0 + ℋ` equals
//! `I0`, and the section `H: p0 = −ℋ` embeds V*Q as its zero level.
//!
//! Functions on V*Q are pulled back by the projection ζ that forgets `p0`;
//! since a [`ScalarField`] without `p0` simply ignores that slot, the
//! pull-back of a field is the field itself.
//!
//! Only a single global chart is modelled. Under a change of chart the
//! momentum conjugate to time shifts, `p0' = p0 + (∂qʲ/∂t') pⱼ`.

use serde::{Deserialize, Serialize};

use crate::expr::{EvalError, Expression, ScalarField, Var};
use crate::phase_space::{bracket_from_grads, PhasePoint, SystemSpec};

/// A point `(t, qⁱ, p0, pᵢ)` of T*Q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedPoint {
    pub t: f64,
    pub q: Vec<f64>,
    pub p0: f64,
    pub p: Vec<f64>,
}

impl ExtendedPoint {
    pub fn new(t: f64, q: Vec<f64>, p0: f64, p: Vec<f64>) -> Self {
        assert_eq!(q.len(), p.len(), "q and p must have the same length");
        ExtendedPoint { t, q, p0, p }
    }

    pub fn dof(&self) -> usize {
        self.q.len()
    }

    /// Flat layout `[t, q1..qm, p1..pm, p0]`.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(2 + 2 * self.dof());
        c.push(self.t);
        c.extend_from_slice(&self.q);
        c.extend_from_slice(&self.p);
        c.push(self.p0);
        c
    }

    pub fn from_coords(m: usize, c: &[f64]) -> Self {
        ExtendedPoint {
            t: c[0],
            q: c[1..1 + m].to_vec(),
            p: c[1 + m..1 + 2 * m].to_vec(),
            p0: c[1 + 2 * m],
        }
    }

    /// ζ: forgets `p0`.
    pub fn project(&self) -> PhasePoint {
        PhasePoint::new(self.t, self.q.clone(), self.p.clone())
    }

    pub fn is_finite(&self) -> bool {
        self.p0.is_finite() && self.project().is_finite()
    }
}

/// Tangent vector on T*Q.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedTangent {
    pub dt: f64,
    pub dq: Vec<f64>,
    pub dp0: f64,
    pub dp: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LiftedSystem {
    pub base: SystemSpec,
    pub hstar: ScalarField,
}

impl LiftedSystem {
    pub fn new(base: &SystemSpec) -> Self {
        let expr = Expression::var(Var::TimeMom).add(base.hamiltonian.expression());
        LiftedSystem {
            hstar: ScalarField::new("H*", expr, base.m),
            base: base.clone(),
        }
    }

    /// ζ*Φ₁, …, ζ*Φₙ.
    pub fn lifted_integrals(&self) -> &[ScalarField] {
        &self.base.integrals
    }
}

/// `H(x)`: the point over `x` with `p0 = −ℋ(x)`.
pub fn section_h(system: &SystemSpec, x: &PhasePoint) -> Result<ExtendedPoint, EvalError> {
    let h = system.hamiltonian.value(&x.coords())?;
    Ok(ExtendedPoint::new(x.t, x.q.clone(), -h, x.p.clone()))
}

/// `I0 = p0 + ℋ`, equal to ℋ* at `X`.
pub fn i0(system: &SystemSpec, x: &ExtendedPoint) -> Result<f64, EvalError> {
    Ok(x.p0 + system.hamiltonian.value(&x.project().coords())?)
}

pub(crate) fn extended_bracket_from_grads(m: usize, gf: &[f64], gg: &[f64]) -> f64 {
    let p0 = 1 + 2 * m;
    gf[p0] * gg[0] - gg[p0] * gf[0] + bracket_from_grads(m, gf, gg)
}

pub fn extended_bracket(f: &ScalarField, g: &ScalarField, x: &ExtendedPoint) -> Result<f64, EvalError> {
    let c = x.coords();
    let gf = f.dual1(&c)?.grad;
    let gg = g.dual1(&c)?.grad;
    Ok(extended_bracket_from_grads(x.dof(), &gf, &gg))
}

/// `u_ℋ* = ∂_t − ∂_tℋ ∂⁰ + ∂ⁱℋ ∂ᵢ − ∂ᵢℋ ∂ⁱ`
pub fn u_h_star(system: &SystemSpec, x: &ExtendedPoint) -> Result<ExtendedTangent, EvalError> {
    let g = system.hamiltonian.gradient(&x.coords())?;
    Ok(ExtendedTangent {
        dt: 1.0,
        dq: g.dp,
        dp0: -g.dt,
        dp: g.dq.iter().map(|v| -v).collect(),
    })
}

/// `|L_{γ_H} f (ζX) − {ℋ*, ζ*f}(X)|`
pub fn projection_identity_defect(system: &SystemSpec, f: &ScalarField, x: &ExtendedPoint) -> Result<f64, EvalError> {
    let lifted = LiftedSystem::new(system);
    let lhs = crate::phase_space::lie_derivative(system, f, &x.project())?;
    let rhs = extended_bracket(&lifted.hstar, f, x)?;
    Ok((lhs - rhs).abs())
}
