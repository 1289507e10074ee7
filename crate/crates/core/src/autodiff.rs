//! Tapeless forward-mode dual numbers with a fixed derivative width.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use nalgebra::{Matrix6, SMatrix};

use crate::constitutive::{
    first_piola, project, trial_state, ConstitutiveError, Inelastic, Material, PlasticState,
    StrainMeasure,
};
use crate::scalar::Real;
use crate::tensor::{sym_basis, sym_eigen, Mat3, Tensor4};

/// Relative eigenvalue gap below which divided differences fall back to
/// the averaged derivative.
const EIGEN_GAP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const N: usize> {
    pub v: f64,
    pub d: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn constant(v: f64) -> Self {
        Dual { v, d: [0.0; N] }
    }

    /// Independent variable number `i`.
    pub fn variable(v: f64, i: usize) -> Self {
        let mut d = [0.0; N];
        d[i] = 1.0;
        Dual { v, d }
    }

    pub fn deriv(&self, i: usize) -> f64 {
        self.d[i]
    }

    #[inline]
    fn chain(self, v: f64, dv: f64) -> Self {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x *= dv;
        }
        Dual { v, d }
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let mut d = self.d;
        for i in 0..N {
            d[i] += rhs.d[i];
        }
        Dual { v: self.v + rhs.v, d }
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let mut d = self.d;
        for i in 0..N {
            d[i] -= rhs.d[i];
        }
        Dual { v: self.v - rhs.v, d }
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut d = [0.0; N];
        for i in 0..N {
            d[i] = self.d[i] * rhs.v + self.v * rhs.d[i];
        }
        Dual { v: self.v * rhs.v, d }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.v;
        let v = self.v * inv;
        let mut d = [0.0; N];
        for i in 0..N {
            d[i] = (self.d[i] - v * rhs.d[i]) * inv;
        }
        Dual { v, d }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.chain(-self.v, -1.0)
    }
}

impl<const N: usize> Add<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: f64) -> Self {
        self.v += rhs;
        self
    }
}

impl<const N: usize> Sub<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: f64) -> Self {
        self.v -= rhs;
        self
    }
}

impl<const N: usize> Mul<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        self.chain(self.v * rhs, rhs)
    }
}

impl<const N: usize> Div<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: f64) -> Self {
        self.chain(self.v / rhs, 1.0 / rhs)
    }
}

impl<const N: usize> Mul<Dual<N>> for f64 {
    type Output = Dual<N>;
    #[inline]
    fn mul(self, rhs: Dual<N>) -> Dual<N> {
        rhs * self
    }
}

impl<const N: usize> Add<Dual<N>> for f64 {
    type Output = Dual<N>;
    #[inline]
    fn add(self, rhs: Dual<N>) -> Dual<N> {
        rhs + self
    }
}

impl<const N: usize> Sub<Dual<N>> for f64 {
    type Output = Dual<N>;
    #[inline]
    fn sub(self, rhs: Dual<N>) -> Dual<N> {
        -rhs + self
    }
}

impl<const N: usize> AddAssign for Dual<N> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<const N: usize> SubAssign for Dual<N> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<const N: usize> MulAssign for Dual<N> {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<const N: usize> Real for Dual<N> {
    fn cst(v: f64) -> Self {
        Dual::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn cbrt(self) -> Self {
        let s = self.v.cbrt();
        self.chain(s, s / (3.0 * self.v))
    }
    fn powf(self, p: f64) -> Self {
        if self.v == 0.0 {
            let dv = if p == 1.0 { 1.0 } else if p > 1.0 { 0.0 } else { f64::INFINITY };
            return self.chain(0.0_f64.powf(p), dv);
        }
        let v = self.v.powf(p);
        self.chain(v, p * self.v.powf(p - 1.0))
    }
    fn asinh(self) -> Self {
        self.chain(self.v.asinh(), 1.0 / (1.0 + self.v * self.v).sqrt())
    }

    fn sym_apply(a: &Mat3<Self>, f: fn(f64) -> f64, df: fn(f64) -> f64) -> Mat3<Self> {
        let a0 = a.values();
        let (lam, q) = sym_eigen(&a0);
        let fl = [f(lam[0]), f(lam[1]), f(lam[2])];
        // Daleckii-Krein first divided differences.
        let mut phi = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let gap = lam[i] - lam[j];
                let scale = lam[i].abs().max(lam[j].abs()).max(1.0);
                phi[i][j] = if gap.abs() > EIGEN_GAP * scale {
                    (fl[i] - fl[j]) / gap
                } else {
                    0.5 * (df(lam[i]) + df(lam[j]))
                };
            }
        }
        let mut out = Mat3([[Dual::<N>::constant(0.0); 3]; 3]);
        for i in 0..3 {
            for j in 0..3 {
                let mut v = 0.0;
                for k in 0..3 {
                    v += fl[k] * q[i][k] * q[j][k];
                }
                out.0[i][j].v = v;
            }
        }
        for n in 0..N {
            let mut dn = Mat3::<f64>::zero();
            let mut any = false;
            for i in 0..3 {
                for j in 0..3 {
                    let x = 0.5 * (a.0[i][j].d[n] + a.0[j][i].d[n]);
                    any |= x != 0.0;
                    dn.0[i][j] = x;
                }
            }
            if !any {
                continue;
            }
            // Rotate into the eigenbasis, weight, rotate back.
            let mut t = [[0.0; 3]; 3];
            for k in 0..3 {
                for l in 0..3 {
                    let mut s = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            s += q[i][k] * dn.0[i][j] * q[j][l];
                        }
                    }
                    t[k][l] = s * phi[k][l];
                }
            }
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = 0.0;
                    for k in 0..3 {
                        for l in 0..3 {
                            s += q[i][k] * t[k][l] * q[j][l];
                        }
                    }
                    out.0[i][j].d[n] = s;
                }
            }
        }
        out
    }

    fn implicit_root(root: f64, residual: Self, dr_droot: f64) -> Self {
        let mut d = residual.d;
        for x in d.iter_mut() {
            *x = -*x / dr_droot;
        }
        Dual { v: root, d }
    }
}

/// Tangents recovered by seeding a symmetric displacement-gradient
/// perturbation with dual numbers.
#[derive(Debug, Clone, Copy)]
pub struct AdTangent {
    /// `dM / dE_tri` on symmetric tensors.
    pub block: Tensor4,
    /// Directional derivatives of the first Piola stress along [`sym_basis`].
    pub d_piola: [Mat3<f64>; 6],
}

type D6 = Dual<6>;

pub fn tangent_via_ad(
    f: &Mat3<f64>,
    c: f64,
    old: &PlasticState,
    tau: f64,
    model: Inelastic,
    measure: StrainMeasure,
    mat: &Material,
) -> Result<AdTangent, ConstitutiveError> {
    let basis = sym_basis();
    let mut fd = Mat3::<D6>::from_f64(f);
    for (k, b) in basis.iter().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                fd.0[i][j].d[k] += b.0[i][j];
            }
        }
    }
    let cd = D6::constant(c);
    let (kin, m_tri) = trial_state(&fd, cd, old, mat, measure)?;
    let proj = project(model, &m_tri, cd, old, tau, mat)?;
    let piola = first_piola(&kin, &proj.mandel)?;

    let jac = |x: &Mat3<D6>| {
        let mut out = Matrix6::<f64>::zeros();
        for k in 0..6 {
            let dir = x.map(|v| D6::constant(v.d[k])).values();
            for a in 0..6 {
                out[(a, k)] = basis[a].ddot(&dir);
            }
        }
        out
    };
    let de = jac(&kin.e_el);
    let dm = jac(&proj.mandel);
    let de_inv = de.try_inverse().ok_or_else(|| {
        ConstitutiveError::KinematicDegeneracy("strain map not invertible".into())
    })?;
    let t: SMatrix<f64, 6, 6> = dm * de_inv;
    let mut t6 = [[0.0; 6]; 6];
    for a in 0..6 {
        for b in 0..6 {
            t6[a][b] = t[(a, b)];
        }
    }
    let mut d_piola = [Mat3::zero(); 6];
    for (k, out) in d_piola.iter_mut().enumerate() {
        *out = piola.map(|v| D6::constant(v.d[k])).values();
    }
    Ok(AdTangent { block: Tensor4::from_sym6(&t6), d_piola })
}
