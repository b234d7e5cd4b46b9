//! Number types an [`Expression`](super::Expression) can be evaluated over.
//!
//! Dual types store derivatives with respect to a fixed list of active
//! variables. A constant carries empty derivative storage, which every
//! operation treats as zeros, so constants never need to know the number of
//! active variables.

/// Arithmetic needed by the evaluator.
///
/// `chain1` and `chain2` apply a function whose value and partial derivatives
/// at the argument values have already been computed; each implementation
/// propagates as many derivative orders as it stores.
pub trait Scalar: Clone {
    fn constant(v: f64) -> Self;
    fn value(&self) -> f64;
    /// Value and all stored derivatives are finite.
    fn is_finite(&self) -> bool;
    /// All stored derivatives are zero.
    fn is_constant(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn chain1(&self, f: f64, d1: f64, d2: f64) -> Self;
    #[allow(clippy::too_many_arguments)]
    fn chain2(a: &Self, b: &Self, f: f64, fa: f64, fb: f64, faa: f64, fab: f64, fbb: f64) -> Self;
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn is_constant(&self) -> bool {
        true
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn chain1(&self, f: f64, _d1: f64, _d2: f64) -> Self {
        f
    }
    fn chain2(_a: &Self, _b: &Self, f: f64, _: f64, _: f64, _: f64, _: f64, _: f64) -> Self {
        f
    }
}

fn zip_with(a: &[f64], b: &[f64], op: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| op(a.get(i).copied().unwrap_or(0.0), b.get(i).copied().unwrap_or(0.0)))
        .collect()
}

/// Value and gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual1 {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Dual1 {
    /// Active variable `index` of `n`, seeded with the unit vector.
    pub fn variable(value: f64, index: usize, n: usize) -> Self {
        let mut grad = vec![0.0; n];
        grad[index] = 1.0;
        Dual1 { value, grad }
    }

    /// Derivative with respect to active variable `i` (zero if not stored).
    pub fn d(&self, i: usize) -> f64 {
        self.grad.get(i).copied().unwrap_or(0.0)
    }
}

impl Scalar for Dual1 {
    fn constant(v: f64) -> Self {
        Dual1 {
            value: v,
            grad: Vec::new(),
        }
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.grad.iter().all(|g| g.is_finite())
    }
    fn is_constant(&self) -> bool {
        self.grad.iter().all(|&g| g == 0.0)
    }
    fn add(&self, o: &Self) -> Self {
        Dual1 {
            value: self.value + o.value,
            grad: zip_with(&self.grad, &o.grad, |x, y| x + y),
        }
    }
    fn sub(&self, o: &Self) -> Self {
        Dual1 {
            value: self.value - o.value,
            grad: zip_with(&self.grad, &o.grad, |x, y| x - y),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        let (a, b) = (self.value, o.value);
        Dual1 {
            value: a * b,
            grad: zip_with(&self.grad, &o.grad, |x, y| x * b + a * y),
        }
    }
    fn neg(&self) -> Self {
        Dual1 {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
        }
    }
    fn chain1(&self, f: f64, d1: f64, _d2: f64) -> Self {
        Dual1 {
            value: f,
            grad: self.grad.iter().map(|g| d1 * g).collect(),
        }
    }
    fn chain2(a: &Self, b: &Self, f: f64, fa: f64, fb: f64, _: f64, _: f64, _: f64) -> Self {
        Dual1 {
            value: f,
            grad: zip_with(&a.grad, &b.grad, |x, y| fa * x + fb * y),
        }
    }
}

/// Value, gradient and (dense, symmetric) Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual2 {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Row-major `n x n`, with `n = grad.len()`.
    pub hess: Vec<f64>,
}

impl Dual2 {
    pub fn variable(value: f64, index: usize, n: usize) -> Self {
        let mut grad = vec![0.0; n];
        grad[index] = 1.0;
        Dual2 {
            value,
            grad,
            hess: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn d(&self, i: usize) -> f64 {
        self.grad.get(i).copied().unwrap_or(0.0)
    }

    pub fn dd(&self, i: usize, j: usize) -> f64 {
        let n = self.dim();
        if i < n && j < n {
            self.hess[i * n + j]
        } else {
            0.0
        }
    }

    fn padded(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        if self.dim() == n {
            return (self.grad.clone(), self.hess.clone());
        }
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n * n];
        let k = self.dim();
        grad[..k].copy_from_slice(&self.grad);
        for i in 0..k {
            hess[i * n..i * n + k].copy_from_slice(&self.hess[i * k..(i + 1) * k]);
        }
        (grad, hess)
    }

    /// `fa*A + fb*B + faa*ga ga' + fab*(ga gb' + gb ga') + fbb*gb gb'`
    #[allow(clippy::too_many_arguments)]
    fn combine(a: &Self, b: &Self, f: f64, fa: f64, fb: f64, faa: f64, fab: f64, fbb: f64) -> Self {
        let n = a.dim().max(b.dim());
        let (ga, ha) = a.padded(n);
        let (gb, hb) = b.padded(n);
        let grad = (0..n).map(|i| fa * ga[i] + fb * gb[i]).collect();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut h = fa * ha[i * n + j] + fb * hb[i * n + j];
                if faa != 0.0 {
                    h += faa * ga[i] * ga[j];
                }
                if fab != 0.0 {
                    h += fab * (ga[i] * gb[j] + gb[i] * ga[j]);
                }
                if fbb != 0.0 {
                    h += fbb * gb[i] * gb[j];
                }
                hess[i * n + j] = h;
            }
        }
        Dual2 {
            value: f,
            grad,
            hess,
        }
    }
}

impl Scalar for Dual2 {
    fn constant(v: f64) -> Self {
        Dual2 {
            value: v,
            grad: Vec::new(),
            hess: Vec::new(),
        }
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().all(|h| h.is_finite())
    }
    fn is_constant(&self) -> bool {
        self.grad.iter().all(|&g| g == 0.0) && self.hess.iter().all(|&h| h == 0.0)
    }
    fn add(&self, o: &Self) -> Self {
        let n = self.dim().max(o.dim());
        let (ga, ha) = self.padded(n);
        let (gb, hb) = o.padded(n);
        Dual2 {
            value: self.value + o.value,
            grad: zip_with(&ga, &gb, |x, y| x + y),
            hess: zip_with(&ha, &hb, |x, y| x + y),
        }
    }
    fn sub(&self, o: &Self) -> Self {
        let n = self.dim().max(o.dim());
        let (ga, ha) = self.padded(n);
        let (gb, hb) = o.padded(n);
        Dual2 {
            value: self.value - o.value,
            grad: zip_with(&ga, &gb, |x, y| x - y),
            hess: zip_with(&ha, &hb, |x, y| x - y),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        Dual2::combine(self, o, self.value * o.value, o.value, self.value, 0.0, 1.0, 0.0)
    }
    fn neg(&self) -> Self {
        Dual2 {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
        }
    }
    fn chain1(&self, f: f64, d1: f64, d2: f64) -> Self {
        let n = self.dim();
        let grad = self.grad.iter().map(|g| d1 * g).collect();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = d1 * self.hess[i * n + j] + d2 * self.grad[i] * self.grad[j];
            }
        }
        Dual2 {
            value: f,
            grad,
            hess,
        }
    }
    fn chain2(a: &Self, b: &Self, f: f64, fa: f64, fb: f64, faa: f64, fab: f64, fbb: f64) -> Self {
        Dual2::combine(a, b, f, fa, fb, faa, fab, fbb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_second_order() {
        // x*y at (2, 3): grad (3, 2), hessian [[0,1],[1,0]]
        let x = Dual2::variable(2.0, 0, 2);
        let y = Dual2::variable(3.0, 1, 2);
        let z = x.mul(&y);
        assert_eq!(z.value, 6.0);
        assert_eq!(z.grad, vec![3.0, 2.0]);
        assert_eq!(z.hess, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn constants_mix_with_variables() {
        let x = Dual1::variable(1.5, 0, 3);
        let c = Dual1::constant(4.0);
        let z = c.mul(&x).add(&c);
        assert_eq!(z.value, 10.0);
        assert_eq!(z.grad, vec![4.0, 0.0, 0.0]);

        let x2 = Dual2::variable(1.5, 1, 2);
        let w = Dual2::constant(2.0).sub(&x2.mul(&x2));
        assert_eq!(w.grad, vec![0.0, -3.0]);
        assert_eq!(w.dd(1, 1), -2.0);
        assert_eq!(w.dd(0, 0), 0.0);
    }
}
