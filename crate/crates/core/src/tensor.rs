//! Small dense 3x3 tensors and fourth-order maps on them.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{Matrix3, SymmetricEigen};

use crate::scalar::Real;

/// Row-major 3x3 matrix over a generic scalar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<S>(pub [[S; 3]; 3]);

impl<S: Real> Mat3<S> {
    pub fn zero() -> Self {
        Mat3([[S::cst(0.0); 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diag(S::cst(1.0), S::cst(1.0), S::cst(1.0))
    }

    pub fn diag(a: S, b: S, c: S) -> Self {
        let z = S::cst(0.0);
        Mat3([[a, z, z], [z, b, z], [z, z, c]])
    }

    pub fn from_f64(m: &Mat3<f64>) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = S::cst(m.0[i][j]);
            }
        }
        out
    }

    pub fn values(&self) -> Mat3<f64> {
        let mut out = Mat3::<f64>::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[i][j].value();
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for x in row.iter_mut() {
                *x = f(*x);
            }
        }
        out
    }

    pub fn scale(&self, s: S) -> Self {
        self.map(|x| x * s)
    }

    pub fn transpose(&self) -> Self {
        let a = &self.0;
        Mat3([
            [a[0][0], a[1][0], a[2][0]],
            [a[0][1], a[1][1], a[2][1]],
            [a[0][2], a[1][2], a[2][2]],
        ])
    }

    pub fn trace(&self) -> S {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> S {
        let a = &self.0;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    /// Inverse by cofactors; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.value() == 0.0 || !d.value().is_finite() {
            return None;
        }
        let a = &self.0;
        let inv = S::cst(1.0) / d;
        let cof = Mat3([
            [
                a[1][1] * a[2][2] - a[1][2] * a[2][1],
                a[0][2] * a[2][1] - a[0][1] * a[2][2],
                a[0][1] * a[1][2] - a[0][2] * a[1][1],
            ],
            [
                a[1][2] * a[2][0] - a[1][0] * a[2][2],
                a[0][0] * a[2][2] - a[0][2] * a[2][0],
                a[0][2] * a[1][0] - a[0][0] * a[1][2],
            ],
            [
                a[1][0] * a[2][1] - a[1][1] * a[2][0],
                a[0][1] * a[2][0] - a[0][0] * a[2][1],
                a[0][0] * a[1][1] - a[0][1] * a[1][0],
            ],
        ]);
        Some(cof.scale(inv))
    }

    pub fn dev(&self) -> Self {
        let p = self.trace() / 3.0;
        let mut out = *self;
        for i in 0..3 {
            out.0[i][i] -= p;
        }
        out
    }

    /// Double contraction `A : B`.
    pub fn ddot(&self, other: &Self) -> S {
        let mut s = S::cst(0.0);
        for i in 0..3 {
            for j in 0..3 {
                s += self.0[i][j] * other.0[i][j];
            }
        }
        s
    }

    /// Frobenius norm.
    pub fn norm(&self) -> S {
        self.ddot(self).sqrt()
    }

    pub fn sym(&self) -> Self {
        (*self + self.transpose()).scale(S::cst(0.5))
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0, |m, x| f64::max(m, x.value().abs()))
    }
}

impl<S: Real> Add for Mat3<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl<S: Real> Sub for Mat3<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] -= rhs.0[i][j];
            }
        }
        out
    }
}

impl<S: Real> Neg for Mat3<S> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|x| -x)
    }
}

impl<S: Real> Mul for Mat3<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = S::cst(0.0);
                for k in 0..3 {
                    s += self.0[i][k] * rhs.0[k][j];
                }
                out.0[i][j] = s;
            }
        }
        out
    }
}

impl<S> Index<(usize, usize)> for Mat3<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.0[i][j]
    }
}

impl<S> IndexMut<(usize, usize)> for Mat3<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.0[i][j]
    }
}

/// Eigenvalues and column eigenvectors (`vecs[i][k]` is component `i` of
/// vector `k`) of the symmetric part of `a`, sorted ascending.
pub fn sym_eigen(a: &Mat3<f64>) -> ([f64; 3], [[f64; 3]; 3]) {
    let s = a.sym();
    let off = s.0[0][1].abs() + s.0[0][2].abs() + s.0[1][2].abs();
    if off == 0.0 {
        // Diagonal input: skip the iterative solver so results are exact.
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| s.0[i][i].total_cmp(&s.0[j][j]));
        let mut vecs = [[0.0; 3]; 3];
        let mut vals = [0.0; 3];
        for (k, &i) in idx.iter().enumerate() {
            vals[k] = s.0[i][i];
            vecs[i][k] = 1.0;
        }
        return (vals, vecs);
    }
    let m = Matrix3::from_fn(|i, j| s.0[i][j]);
    let eig = SymmetricEigen::new(m);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut vals = [0.0; 3];
    let mut vecs = [[0.0; 3]; 3];
    for (k, &col) in idx.iter().enumerate() {
        vals[k] = eig.eigenvalues[col];
        for i in 0..3 {
            vecs[i][k] = eig.eigenvectors[(i, col)];
        }
    }
    (vals, vecs)
}

/// Matrix exponential of a symmetric matrix.
pub fn sym_exp(a: &Mat3<f64>) -> Mat3<f64> {
    f64::sym_apply(a, f64::exp, f64::exp)
}

/// Fourth-order tensor stored as a 9x9 map on row-major flattened 3x3 tensors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor4(pub [[f64; 9]; 9]);

/// Orthonormal basis of symmetric 3x3 tensors.
pub fn sym_basis() -> [Mat3<f64>; 6] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut b = [Mat3::<f64>::zero(); 6];
    b[0].0[0][0] = 1.0;
    b[1].0[1][1] = 1.0;
    b[2].0[2][2] = 1.0;
    b[3].0[1][2] = h;
    b[3].0[2][1] = h;
    b[4].0[0][2] = h;
    b[4].0[2][0] = h;
    b[5].0[0][1] = h;
    b[5].0[1][0] = h;
    b
}

impl Tensor4 {
    pub fn zero() -> Self {
        Tensor4([[0.0; 9]; 9])
    }

    /// Symmetrized identity on 3x3 tensors.
    pub fn sym_identity() -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                t.0[3 * i + j][3 * i + j] += 0.5;
                t.0[3 * i + j][3 * j + i] += 0.5;
            }
        }
        t
    }

    /// `A ⊗ B`, mapping `X` to `A (B : X)`.
    pub fn outer(a: &Mat3<f64>, b: &Mat3<f64>) -> Self {
        let mut t = Self::zero();
        for i in 0..9 {
            for j in 0..9 {
                t.0[i][j] = a.0[i / 3][i % 3] * b.0[j / 3][j % 3];
            }
        }
        t
    }

    /// Deviatoric elastic part `2G (I_sym - Id⊗Id/3)`.
    pub fn deviatoric(shear: f64) -> Self {
        let id = Mat3::<f64>::identity();
        Self::sym_identity()
            .add(&Self::outer(&id, &id).scaled(-1.0 / 3.0))
            .scaled(2.0 * shear)
    }

    /// Volumetric elastic part `K Id⊗Id`.
    pub fn volumetric(bulk: f64) -> Self {
        let id = Mat3::<f64>::identity();
        Self::outer(&id, &id).scaled(bulk)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut t = *self;
        t.0.iter_mut().flatten().for_each(|x| *x *= s);
        t
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut t = *self;
        for i in 0..9 {
            for j in 0..9 {
                t.0[i][j] += other.0[i][j];
            }
        }
        t
    }

    pub fn apply(&self, x: &Mat3<f64>) -> Mat3<f64> {
        let mut out = Mat3::<f64>::zero();
        for i in 0..9 {
            let mut s = 0.0;
            for j in 0..9 {
                s += self.0[i][j] * x.0[j / 3][j % 3];
            }
            out.0[i / 3][i % 3] = s;
        }
        out
    }

    /// Representation in the orthonormal symmetric basis: `T6[a][b] = B_a : T[B_b]`.
    pub fn to_sym6(&self) -> [[f64; 6]; 6] {
        let basis = sym_basis();
        let mut out = [[0.0; 6]; 6];
        for b in 0..6 {
            let img = self.apply(&basis[b]);
            for a in 0..6 {
                out[a][b] = basis[a].ddot(&img);
            }
        }
        out
    }

    /// Inverse of [`Tensor4::to_sym6`] for maps acting on symmetric tensors.
    pub fn from_sym6(t6: &[[f64; 6]; 6]) -> Self {
        let basis = sym_basis();
        let mut t = Self::zero();
        for a in 0..6 {
            for b in 0..6 {
                let coef = t6[a][b];
                if coef == 0.0 {
                    continue;
                }
                t = t.add(&Self::outer(&basis[a], &basis[b]).scaled(coef));
            }
        }
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, x| f64::max(m, x.abs()))
    }
}

impl Mul<&Mat3<f64>> for &Tensor4 {
    type Output = Mat3<f64>;
    fn mul(self, rhs: &Mat3<f64>) -> Mat3<f64> {
        self.apply(rhs)
    }
}
