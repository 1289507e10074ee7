//! Hierarchical radial mesh, Lagrange basis and Gauss quadrature.

use std::f64::consts::PI;

pub const DEFAULT_ORDER: usize = 4;
pub const DEFAULT_MIN_LEVEL: u32 = 5;
pub const DEFAULT_MAX_LEVEL: u32 = 7;
/// Gauss points per element.
pub const NQ: usize = 6;

/// Six-point Gauss-Legendre rule on `[-1, 1]`.
const GAUSS_X: [f64; NQ] = [
    -0.932_469_514_203_152,
    -0.661_209_386_466_264_5,
    -0.238_619_186_083_196_9,
    0.238_619_186_083_196_9,
    0.661_209_386_466_264_5,
    0.932_469_514_203_152,
];
const GAUSS_W: [f64; NQ] = [
    0.171_324_492_379_170_3,
    0.360_761_573_048_138_6,
    0.467_913_934_572_691,
    0.467_913_934_572_691,
    0.360_761_573_048_138_6,
    0.171_324_492_379_170_3,
];

/// Gauss points and weights mapped to `[0, 1]`.
pub fn unit_gauss() -> [(f64, f64); NQ] {
    let mut out = [(0.0, 0.0); NQ];
    for q in 0..NQ {
        out[q] = (0.5 * (GAUSS_X[q] + 1.0), 0.5 * GAUSS_W[q]);
    }
    out
}

/// Equispaced Lagrange basis of order `p` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis {
    pub order: usize,
    nodes: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(order: usize) -> Self {
        assert!((1..=4).contains(&order), "basis order {order} outside 1..=4");
        let nodes = (0..=order).map(|k| k as f64 / order as f64).collect();
        LagrangeBasis { order, nodes }
    }

    pub fn n_local(&self) -> usize {
        self.order + 1
    }

    /// Values and reference derivatives of all shape functions at `xi`.
    pub fn eval(&self, xi: f64, phi: &mut [f64], dphi: &mut [f64]) {
        let n = self.nodes.len();
        for a in 0..n {
            let mut v = 1.0;
            let mut d = 0.0;
            for b in 0..n {
                if b == a {
                    continue;
                }
                let den = self.nodes[a] - self.nodes[b];
                let mut term = 1.0 / den;
                for m in 0..n {
                    if m != a && m != b {
                        term *= (xi - self.nodes[m]) / (self.nodes[a] - self.nodes[m]);
                    }
                }
                d += term;
                v *= (xi - self.nodes[b]) / den;
            }
            phi[a] = v;
            dphi[a] = d;
        }
    }
}

/// Dyadic element `[index, index + 1] / 2^level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub level: u32,
    pub index: u64,
}

impl Cell {
    pub fn left(&self) -> f64 {
        self.index as f64 / (1u64 << self.level) as f64
    }

    pub fn right(&self) -> f64 {
        (self.index + 1) as f64 / (1u64 << self.level) as f64
    }

    pub fn width(&self) -> f64 {
        1.0 / (1u64 << self.level) as f64
    }

    pub fn parent(&self) -> Option<Cell> {
        (self.level > 0).then(|| Cell { level: self.level - 1, index: self.index / 2 })
    }

    pub fn children(&self) -> [Cell; 2] {
        [
            Cell { level: self.level + 1, index: 2 * self.index },
            Cell { level: self.level + 1, index: 2 * self.index + 1 },
        ]
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.left() && r <= self.right()
    }
}

/// Ordered partition of `(0, 1)` into dyadic cells with a shared
/// continuous Lagrange basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    pub cells: Vec<Cell>,
    pub basis: LagrangeBasis,
    pub min_level: u32,
    pub max_level: u32,
}

impl Mesh1D {
    pub fn order(&self) -> usize {
        self.basis.order
    }

    pub fn n_elements(&self) -> usize {
        self.cells.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.cells.len() * self.order() + 1
    }

    /// Global scalar node of local node `k` in element `e`.
    pub fn node(&self, e: usize, k: usize) -> usize {
        e * self.order() + k
    }

    pub fn node_coords(&self) -> Vec<f64> {
        let p = self.order();
        let mut out = Vec::with_capacity(self.n_nodes());
        for cell in &self.cells {
            for k in 0..p {
                out.push(cell.left() + cell.width() * k as f64 / p as f64);
            }
        }
        out.push(1.0);
        out
    }

    /// Element containing `r`, preferring the left element at shared nodes.
    pub fn locate(&self, r: f64) -> usize {
        let r = r.clamp(0.0, 1.0);
        match self.cells.binary_search_by(|c| {
            if c.right() < r {
                std::cmp::Ordering::Less
            } else if c.left() > r {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        }) {
            Ok(e) => {
                let mut e = e;
                while e > 0 && self.cells[e - 1].contains(r) {
                    e -= 1;
                }
                e
            }
            Err(e) => e.min(self.cells.len() - 1),
        }
    }

    /// Evaluates a nodal field and its radial derivative at `r`.
    pub fn eval_field(&self, values: &[f64], r: f64) -> (f64, f64) {
        let e = self.locate(r);
        let cell = self.cells[e];
        let xi = ((r - cell.left()) / cell.width()).clamp(0.0, 1.0);
        let n = self.basis.n_local();
        let mut phi = [0.0; 5];
        let mut dphi = [0.0; 5];
        self.basis.eval(xi, &mut phi[..n], &mut dphi[..n]);
        let mut v = 0.0;
        let mut d = 0.0;
        for k in 0..n {
            let x = values[self.node(e, k)];
            v += phi[k] * x;
            d += dphi[k] * x / cell.width();
        }
        (v, d)
    }

    /// Sum of the radial weight `4 pi r^2` over all quadrature points.
    pub fn volume(&self) -> f64 {
        let gauss = unit_gauss();
        let mut v = 0.0;
        for cell in &self.cells {
            for &(xi, w) in &gauss {
                let r = cell.left() + xi * cell.width();
                v += 4.0 * PI * r * r * w * cell.width();
            }
        }
        v
    }

    /// Largest level difference between adjacent cells.
    pub fn max_level_jump(&self) -> u32 {
        self.cells
            .windows(2)
            .map(|w| w[0].level.abs_diff(w[1].level))
            .max()
            .unwrap_or(0)
    }

    /// Checks the partition, level and 1-irregularity invariants.
    pub fn is_valid(&self) -> bool {
        let mut x = 0.0;
        for c in &self.cells {
            if (c.left() - x).abs() > 1e-15 || c.level < self.min_level || c.level > self.max_level {
                return false;
            }
            x = c.right();
        }
        (x - 1.0).abs() < 1e-15 && self.max_level_jump() <= 1
    }
}

/// Uniform mesh of `2^min_level` elements of order `p`.
pub fn build_mesh(min_level: u32, p: usize) -> Mesh1D {
    build_mesh_with_max(min_level, DEFAULT_MAX_LEVEL.max(min_level), p)
}

pub fn build_mesh_with_max(min_level: u32, max_level: u32, p: usize) -> Mesh1D {
    let cells = (0..1u64 << min_level).map(|index| Cell { level: min_level, index }).collect();
    Mesh1D { cells, basis: LagrangeBasis::new(p), min_level, max_level }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_counts() {
        let m = build_mesh(5, 4);
        assert_eq!(m.n_elements(), 32);
        assert_eq!(m.n_nodes(), 129);
        assert_eq!(build_mesh(0, 4).n_elements(), 1);
        assert_eq!(build_mesh(3, 1).n_nodes(), 9);
    }

    #[test]
    fn radial_weight_integrates_sphere_volume() {
        for level in [0, 3, 5] {
            let v = build_mesh(level, 4).volume();
            assert!((v - 4.0 * PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_partition_of_unity_and_nodality() {
        for p in 1..=4 {
            let b = LagrangeBasis::new(p);
            let mut phi = vec![0.0; p + 1];
            let mut dphi = vec![0.0; p + 1];
            for k in 0..=p {
                b.eval(k as f64 / p as f64, &mut phi, &mut dphi);
                for (a, v) in phi.iter().enumerate() {
                    assert!((v - if a == k { 1.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
            b.eval(0.37, &mut phi, &mut dphi);
            assert!((phi.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(dphi.iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn basis_derivative_matches_finite_differences() {
        let b = LagrangeBasis::new(4);
        let (mut p0, mut p1, mut d) = ([0.0; 5], [0.0; 5], [0.0; 5]);
        let mut scratch = [0.0; 5];
        let h = 1e-6;
        b.eval(0.3 + h, &mut p1, &mut scratch);
        b.eval(0.3 - h, &mut p0, &mut scratch);
        b.eval(0.3, &mut scratch, &mut d);
        for a in 0..5 {
            assert!(((p1[a] - p0[a]) / (2.0 * h) - d[a]).abs() < 1e-7);
        }
    }

    #[test]
    fn gauss_rule_is_exact_to_degree_eleven() {
        let g = unit_gauss();
        let s: f64 = g.iter().map(|&(x, w)| w * x.powi(11)).sum();
        assert!((s - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn field_evaluation_reproduces_polynomials() {
        let m = build_mesh(2, 4);
        let vals: Vec<f64> = m.node_coords().iter().map(|r| r * r * r - 0.5 * r).collect();
        let (v, d) = m.eval_field(&vals, 0.61);
        assert!((v - (0.61f64.powi(3) - 0.305)).abs() < 1e-14);
        assert!((d - (3.0 * 0.61 * 0.61 - 0.5)).abs() < 1e-12);
        assert_eq!(m.locate(0.25), 0);
        assert_eq!(m.locate(1.0), 3);
    }
}
