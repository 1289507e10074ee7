//! Maximum-strategy marking, 1-irregular refinement/coarsening and
//! transfer of nodal fields and quadrature history.

use std::f64::consts::PI;

use super::banded::{BandLu, BandMatrix};
use super::mesh::{unit_gauss, Cell, Mesh1D, NQ};
use super::{QuadratureField, N_FIELDS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptOptions {
    pub theta_refine: f64,
    pub theta_coarsen: f64,
    /// Indicators at or below this value never trigger refinement.
    pub tolerance: f64,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        AdaptOptions { theta_refine: 0.5, theta_coarsen: 0.05, tolerance: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marking {
    pub refine: Vec<bool>,
    pub coarsen: Vec<bool>,
}

pub fn mark(indicators: &[f64], mesh: &Mesh1D, opts: &AdaptOptions) -> Marking {
    let max = indicators.iter().copied().fold(0.0, f64::max);
    let coarse_below = opts.theta_coarsen * max.max(opts.tolerance);
    let mut refine = Vec::with_capacity(indicators.len());
    let mut coarsen = Vec::with_capacity(indicators.len());
    for (eta, cell) in indicators.iter().zip(&mesh.cells) {
        let split =
            *eta >= opts.theta_refine * max && *eta > opts.tolerance && cell.level < mesh.max_level;
        refine.push(split);
        coarsen.push(!split && *eta < coarse_below && cell.level > mesh.min_level);
    }
    Marking { refine, coarsen }
}

fn refined_cells(mesh: &Mesh1D, marks: &Marking) -> (Vec<Cell>, Vec<bool>) {
    let mut cells = Vec::with_capacity(mesh.cells.len() * 2);
    let mut coarsenable = Vec::with_capacity(mesh.cells.len() * 2);
    for (i, cell) in mesh.cells.iter().enumerate() {
        if marks.refine[i] {
            cells.extend_from_slice(&cell.children());
            coarsenable.extend_from_slice(&[false, false]);
        } else {
            cells.push(*cell);
            coarsenable.push(marks.coarsen[i]);
        }
    }
    // Close under the one-level jump rule.
    loop {
        let jump = cells.windows(2).position(|w| w[0].level.abs_diff(w[1].level) > 1);
        let Some(i) = jump else { break };
        let k = if cells[i].level < cells[i + 1].level { i } else { i + 1 };
        let children = cells[k].children();
        cells.splice(k..=k, children);
        coarsenable.splice(k..=k, [false, false]);
    }
    (cells, coarsenable)
}

fn coarsened_cells(cells: &[Cell], coarsenable: &[bool], min_level: u32) -> Vec<Cell> {
    let mut out: Vec<Cell> = Vec::with_capacity(cells.len());
    let mut i = 0;
    while i < cells.len() {
        let c = cells[i];
        let siblings = i + 1 < cells.len()
            && c.level > min_level
            && c.index % 2 == 0
            && cells[i + 1].level == c.level
            && cells[i + 1].index == c.index + 1
            && coarsenable[i]
            && coarsenable[i + 1];
        let left_ok = out.last().map_or(true, |l| l.level <= c.level);
        let right_ok = cells.get(i + 2).map_or(true, |r| r.level <= c.level);
        if siblings && left_ok && right_ok {
            out.push(c.parent().expect("level above minimum"));
            i += 2;
        } else {
            out.push(c);
            i += 1;
        }
    }
    out
}

/// Linear map from fields on the old mesh to the new one. Concentration is
/// projected in the volume-weighted L2 sense, which conserves its integral;
/// potential and displacement are interpolated.
#[derive(Debug, Clone)]
pub struct Transfer {
    pub old: Mesh1D,
    pub new: Mesh1D,
    mass: BandLu,
}

impl Transfer {
    pub fn new(old: &Mesh1D, new: &Mesh1D) -> Self {
        let p = new.order();
        let n = new.n_nodes();
        let mut m = BandMatrix::zeros(n, p, p);
        let nl = new.basis.n_local();
        let (mut phi, mut dphi) = ([0.0; 5], [0.0; 5]);
        for (e, cell) in new.cells.iter().enumerate() {
            for (xi, wq) in unit_gauss() {
                new.basis.eval(xi, &mut phi[..nl], &mut dphi[..nl]);
                let r = cell.left() + xi * cell.width();
                let w = 4.0 * PI * r * r * wq * cell.width();
                for a in 0..nl {
                    for b in 0..nl {
                        m.add(new.node(e, a), new.node(e, b), phi[a] * phi[b] * w);
                    }
                }
            }
        }
        let mass = m.factor().expect("mass matrix is positive definite");
        Transfer { old: old.clone(), new: new.clone(), mass }
    }

    fn project_concentration(&self, y_old: &[f64]) -> Vec<f64> {
        let (old, new) = (&self.old, &self.new);
        let nl = new.basis.n_local();
        let mut rhs = vec![0.0; new.n_nodes()];
        let (mut phi_o, mut phi_n, mut scratch) = ([0.0; 5], [0.0; 5], [0.0; 5]);
        let (mut i, mut j) = (0, 0);
        while i < old.cells.len() && j < new.cells.len() {
            let (co, cn) = (old.cells[i], new.cells[j]);
            let lo = co.left().max(cn.left());
            let hi = co.right().min(cn.right());
            if hi > lo {
                for (xi, wq) in unit_gauss() {
                    let r = lo + xi * (hi - lo);
                    let w = 4.0 * PI * r * r * wq * (hi - lo);
                    old.basis.eval((r - co.left()) / co.width(), &mut phi_o[..nl], &mut scratch[..nl]);
                    new.basis.eval((r - cn.left()) / cn.width(), &mut phi_n[..nl], &mut scratch[..nl]);
                    let c: f64 = (0..nl).map(|a| phi_o[a] * y_old[N_FIELDS * old.node(i, a)]).sum();
                    for a in 0..nl {
                        rhs[new.node(j, a)] += c * phi_n[a] * w;
                    }
                }
            }
            if co.right() <= cn.right() {
                i += 1;
            } else {
                j += 1;
            }
        }
        self.mass.solve(&rhs)
    }

    pub fn apply(&self, y_old: &[f64]) -> Vec<f64> {
        let c = self.project_concentration(y_old);
        let coords = self.new.node_coords();
        let mut y = vec![0.0; N_FIELDS * coords.len()];
        for f in 1..N_FIELDS {
            let old_field: Vec<f64> = y_old.iter().skip(f).step_by(N_FIELDS).copied().collect();
            for (k, &r) in coords.iter().enumerate() {
                y[N_FIELDS * k + f] = self.old.eval_field(&old_field, r).0;
            }
        }
        for (k, v) in c.into_iter().enumerate() {
            y[N_FIELDS * k] = v;
        }
        y
    }

    /// Copies each new quadrature point's history from the nearest old
    /// quadrature point of the covering old element.
    pub fn history(&self, old_history: &QuadratureField) -> QuadratureField {
        let gauss = unit_gauss();
        let points = self
            .new
            .cells
            .iter()
            .map(|cell| {
                std::array::from_fn(|q| {
                    let r = cell.left() + gauss[q].0 * cell.width();
                    let e = self.old.locate(r);
                    let oc = self.old.cells[e];
                    let nearest = (0..NQ)
                        .min_by(|&a, &b| {
                            let ra = (oc.left() + gauss[a].0 * oc.width() - r).abs();
                            let rb = (oc.left() + gauss[b].0 * oc.width() - r).abs();
                            ra.total_cmp(&rb)
                        })
                        .expect("nonempty rule");
                    old_history.points[e][nearest]
                })
            })
            .collect();
        QuadratureField { points }
    }
}

/// Marks, refines and coarsens. Returns `None` when the mesh is unchanged.
pub fn adapt_mesh(mesh: &Mesh1D, indicators: &[f64], opts: &AdaptOptions) -> Option<Transfer> {
    let marks = mark(indicators, mesh, opts);
    let (cells, coarsenable) = refined_cells(mesh, &marks);
    let cells = coarsened_cells(&cells, &coarsenable, mesh.min_level);
    if cells == mesh.cells {
        return None;
    }
    let new = Mesh1D { cells, ..mesh.clone() };
    Some(Transfer::new(mesh, &new))
}
