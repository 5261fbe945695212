//! Second-order Taylor jets: value, gradient, and Hessian of a scalar
//! expression with respect to `N` independent variables.
//!
//! Every closed-form scalar in the crate (hyperbolic functions, warped
//! radii, Carleman weights, catalog test functions, manufactured
//! solutions) is evaluated through jets so first and second derivatives
//! come out of the same expression that produces the value.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug)]
pub struct Jet<const N: usize> {
    pub val: f64,
    pub grad: [f64; N],
    pub hess: [[f64; N]; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(val: f64) -> Self {
        Jet { val, grad: [0.0; N], hess: [[0.0; N]; N] }
    }

    /// The `i`-th independent variable with value `val`.
    pub fn var(val: f64, i: usize) -> Self {
        let mut j = Self::constant(val);
        j.grad[i] = 1.0;
        j
    }

    fn lift(val: f64, d1: f64, d2: f64, x: &Self) -> Self {
        // chain rule for a scalar map applied to x
        let mut out = Jet { val, grad: [0.0; N], hess: [[0.0; N]; N] };
        for i in 0..N {
            out.grad[i] = d1 * x.grad[i];
        }
        for i in 0..N {
            for k in 0..N {
                out.hess[i][k] = d1 * x.hess[i][k] + d2 * x.grad[i] * x.grad[k];
            }
        }
        out
    }

    pub fn exp(&self) -> Self {
        let e = self.val.exp();
        Self::lift(e, e, e, self)
    }

    pub fn ln(&self) -> Self {
        let v = self.val;
        Self::lift(v.ln(), 1.0 / v, -1.0 / (v * v), self)
    }

    pub fn sqrt(&self) -> Self {
        let s = self.val.sqrt();
        Self::lift(s, 0.5 / s, -0.25 / (s * s * s), self)
    }

    pub fn sin(&self) -> Self {
        Self::lift(self.val.sin(), self.val.cos(), -self.val.sin(), self)
    }

    pub fn cos(&self) -> Self {
        Self::lift(self.val.cos(), -self.val.sin(), -self.val.cos(), self)
    }

    pub fn powf(&self, p: f64) -> Self {
        let v = self.val;
        Self::lift(v.powf(p), p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0), self)
    }

    pub fn powi(&self, p: i32) -> Self {
        self.powf(p as f64)
    }

    pub fn recip(&self) -> Self {
        let v = self.val;
        Self::lift(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v), self)
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        out.val += rhs.val;
        for i in 0..N {
            out.grad[i] += rhs.grad[i];
            for k in 0..N {
                out.hess[i][k] += rhs.hess[i][k];
            }
        }
        out
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut out = self;
        out.val = -out.val;
        for i in 0..N {
            out.grad[i] = -out.grad[i];
            for k in 0..N {
                out.hess[i][k] = -out.hess[i][k];
            }
        }
        out
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Jet { val: self.val * rhs.val, grad: [0.0; N], hess: [[0.0; N]; N] };
        for i in 0..N {
            out.grad[i] = self.grad[i] * rhs.val + self.val * rhs.grad[i];
        }
        for i in 0..N {
            for k in 0..N {
                out.hess[i][k] = self.hess[i][k] * rhs.val
                    + self.grad[i] * rhs.grad[k]
                    + self.grad[k] * rhs.grad[i]
                    + self.val * rhs.hess[i][k];
            }
        }
        out
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    fn add(self, rhs: f64) -> Self {
        let mut out = self;
        out.val += rhs;
        out
    }
}

impl<const N: usize> Sub<f64> for Jet<N> {
    type Output = Self;
    fn sub(self, rhs: f64) -> Self {
        self + (-rhs)
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self * Self::constant(rhs)
    }
}

impl<const N: usize> Div<f64> for Jet<N> {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self * Self::constant(1.0 / rhs)
    }
}

impl<const N: usize> Add<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn add(self, rhs: Jet<N>) -> Jet<N> {
        rhs + self
    }
}

impl<const N: usize> Sub<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn sub(self, rhs: Jet<N>) -> Jet<N> {
        -rhs + self
    }
}

impl<const N: usize> Mul<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn mul(self, rhs: Jet<N>) -> Jet<N> {
        rhs * self
    }
}

/// Jet in the two solver variables (t, x).
pub type Jet2 = Jet<2>;
/// Jet in the null-frame variables (u, v, theta).
pub type Jet3 = Jet<3>;
