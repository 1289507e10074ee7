//! Scalar abstraction shared by plain `f64` evaluation and forward-mode duals.
//!
//! Material kernels are written once against [`Real`] and instantiated with
//! either `f64` (residuals) or [`crate::autodiff::Dual`] (tangents).

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::tensor::Mat3;

pub trait Real:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn ln(self) -> Self;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;
    fn cbrt(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn asinh(self) -> Self;

    fn abs(self) -> Self {
        if self.value() < 0.0 {
            -self
        } else {
            self
        }
    }

    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }

    /// Applies a scalar function to the eigenvalues of a symmetric matrix.
    ///
    /// `f` and `df` are the function and its derivative; `df` is only used
    /// by types that carry derivative information.
    fn sym_apply(a: &Mat3<Self>, f: fn(f64) -> f64, df: fn(f64) -> f64) -> Mat3<Self>;

    /// Rebuilds a root `x*` of `r(x, p) = 0` as a function of the parameters
    /// `p` carried by `residual = r(x*, p)` (evaluated with `x*` held constant).
    fn implicit_root(root: f64, residual: Self, dr_droot: f64) -> Self;
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn cbrt(self) -> Self {
        f64::cbrt(self)
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    #[inline]
    fn asinh(self) -> Self {
        f64::asinh(self)
    }

    fn sym_apply(a: &Mat3<f64>, f: fn(f64) -> f64, _df: fn(f64) -> f64) -> Mat3<f64> {
        let (vals, vecs) = crate::tensor::sym_eigen(a);
        let mut out = Mat3::zero();
        for k in 0..3 {
            let fk = f(vals[k]);
            for i in 0..3 {
                for j in 0..3 {
                    out.0[i][j] += fk * vecs[i][k] * vecs[j][k];
                }
            }
        }
        out
    }

    fn implicit_root(root: f64, _residual: f64, _dr_droot: f64) -> f64 {
        root
    }
}
