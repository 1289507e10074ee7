//! Banded storage and LU factorization with partial pivoting.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BandedError {
    #[error("zero pivot in column {0}")]
    Singular(usize),
}

/// Square matrix with `kl` sub- and `ku` super-diagonals. Rows keep `kl`
/// extra super-diagonals for pivoting fill-in.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize + self.kl as isize;
        (off >= 0 && (off as usize) < self.width).then(|| i * self.width + off as usize)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds to an entry inside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let lo = i.saturating_sub(self.kl);
        debug_assert!(j >= lo && j <= i + self.ku, "({i},{j}) outside band");
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] += v;
    }

    pub fn clear_row(&mut self, i: usize) {
        let start = i * self.width;
        self.data[start..start + self.width].fill(0.0);
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.kl + self.ku).min(self.n - 1);
            for j in lo..=hi {
                *yi += self.get(i, j) * x[j];
            }
        }
        y
    }

    /// `self + alpha * other`, for matrices of identical shape.
    pub fn add_scaled(&mut self, alpha: f64, other: &BandMatrix) {
        assert_eq!((self.n, self.kl, self.ku), (other.n, other.kl, other.ku), "band shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    /// Dense copy, for tests and diagnostics.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    /// In-place LU factorization.
    pub fn factor(mut self) -> Result<BandLu, BandedError> {
        let n = self.n;
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(BandedError::Singular(k));
            }
            piv[k] = p;
            let jmax = (k + self.kl + self.ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.slot(k, j).unwrap();
                    let b = self.slot(p, j).unwrap();
                    self.data.swap(a, b);
                }
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last {
                let si = self.slot(i, k).unwrap();
                let l = self.data[si] / pivot;
                self.data[si] = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..=jmax {
                    let a = self.slot(k, j).unwrap();
                    let b = self.slot(i, j).unwrap();
                    self.data[b] -= l * self.data[a];
                }
            }
        }
        Ok(BandLu { lu: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    lu: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let a = &self.lu;
        let n = a.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let last = (k + a.kl).min(n - 1);
            let xk = x[k];
            for i in k + 1..=last {
                x[i] -= a.get(i, k) * xk;
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + a.kl + a.ku).min(n - 1);
            let mut s = x[k];
            for j in k + 1..=jmax {
                s -= a.get(k, j) * x[j];
            }
            x[k] = s / a.get(k, k);
        }
        x
    }
}
