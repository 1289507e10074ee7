//! Residual, mass matrix and Jacobian of the semi-discrete system
//! `M y' = f(t, y)`.

use std::f64::consts::PI;

use super::banded::BandMatrix;
use super::kernel::{point_eval, point_jacobian_ad, point_jacobian_analytic, Physics};
use super::mesh::{unit_gauss, Mesh1D, NQ};
use super::{FemError, QuadratureField, N_FIELDS};
use crate::constitutive::ProjectedStress;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TangentMode {
    #[default]
    Analytic,
    Ad,
    /// Column-wise finite differences of the residual.
    Fd,
}

/// Projected stresses at every quadrature point for a trial state.
pub type TrialStresses = Vec<[ProjectedStress<f64>; NQ]>;

pub fn bandwidth(mesh: &Mesh1D) -> usize {
    N_FIELDS * (mesh.order() + 1) - 1
}

struct ElementGeometry {
    r: [f64; NQ],
    w: [f64; NQ],
    phi: [[f64; 5]; NQ],
    dphi: [[f64; 5]; NQ],
}

fn geometry(mesh: &Mesh1D, e: usize) -> ElementGeometry {
    let cell = mesh.cells[e];
    let h = cell.width();
    let n = mesh.basis.n_local();
    let mut g = ElementGeometry {
        r: [0.0; NQ],
        w: [0.0; NQ],
        phi: [[0.0; 5]; NQ],
        dphi: [[0.0; 5]; NQ],
    };
    for (q, &(xi, wq)) in unit_gauss().iter().enumerate() {
        let r = cell.left() + xi * h;
        g.r[q] = r;
        g.w[q] = 4.0 * PI * r * r * wq * h;
        mesh.basis.eval(xi, &mut g.phi[q][..n], &mut g.dphi[q][..n]);
        for a in 0..n {
            g.dphi[q][a] /= h;
        }
    }
    g
}

fn local_input(y: &[f64], mesh: &Mesh1D, e: usize, g: &ElementGeometry, q: usize) -> [f64; 6] {
    let mut x = [0.0; 6];
    for a in 0..mesh.basis.n_local() {
        let node = mesh.node(e, a);
        for f in 0..N_FIELDS {
            let v = y[N_FIELDS * node + f];
            x[2 * f] += g.phi[q][a] * v;
            x[2 * f + 1] += g.dphi[q][a] * v;
        }
    }
    x
}

/// Concentration mass matrix `int phi_i phi_j 4 pi r^2 dr`; zero on the
/// algebraic rows.
pub fn mass_matrix(mesh: &Mesh1D) -> BandMatrix {
    let n = N_FIELDS * mesh.n_nodes();
    let bw = bandwidth(mesh);
    let mut m = BandMatrix::zeros(n, bw, bw);
    for e in 0..mesh.n_elements() {
        let g = geometry(mesh, e);
        for q in 0..NQ {
            for a in 0..mesh.basis.n_local() {
                for b in 0..mesh.basis.n_local() {
                    let i = N_FIELDS * mesh.node(e, a);
                    let j = N_FIELDS * mesh.node(e, b);
                    m.add(i, j, g.phi[q][a] * g.phi[q][b] * g.w[q]);
                }
            }
        }
    }
    m
}

fn scatter_residual(
    res: &mut [f64],
    mesh: &Mesh1D,
    e: usize,
    g: &ElementGeometry,
    q: usize,
    out: &[f64; 4],
) {
    let r = g.r[q];
    let w = g.w[q];
    for a in 0..mesh.basis.n_local() {
        let base = N_FIELDS * mesh.node(e, a);
        let (phi, dphi) = (g.phi[q][a], g.dphi[q][a]);
        res[base] -= out[0] * dphi * w;
        res[base + 1] += out[1] * phi * w;
        res[base + 2] += (out[2] * dphi + 2.0 * out[3] * phi / r) * w;
    }
}

fn finish_residual(res: &mut [f64], y: &[f64], mesh: &Mesh1D, ext_flux: f64) {
    let last = N_FIELDS * (mesh.n_nodes() - 1);
    res[last] += 4.0 * PI * ext_flux;
    // Displacement pinned at the centre.
    res[2] = -y[2];
}

/// Right-hand side `f(y)` together with the trial stresses it implies.
pub fn assemble_residual(
    y: &[f64],
    mesh: &Mesh1D,
    history: &QuadratureField,
    tau: f64,
    ext_flux: f64,
    phys: &Physics,
) -> Result<(Vec<f64>, TrialStresses), FemError> {
    let mut res = vec![0.0; y.len()];
    let mut trial = Vec::with_capacity(mesh.n_elements());
    for e in 0..mesh.n_elements() {
        let g = geometry(mesh, e);
        let mut stresses = [None; NQ];
        for q in 0..NQ {
            let x = local_input(y, mesh, e, &g, q);
            let (out, proj) = point_eval(&x, g.r[q], &history.points[e][q].plastic, tau, phys)
                .map_err(|source| FemError::Constitutive { element: e, source })?;
            scatter_residual(&mut res, mesh, e, &g, q, &out);
            stresses[q] = Some(proj);
        }
        trial.push(stresses.map(|s| s.expect("every point evaluated")));
    }
    finish_residual(&mut res, y, mesh, ext_flux);
    Ok((res, trial))
}

/// Residual and Jacobian `df/dy` in one pass.
pub fn assemble_jacobian(
    y: &[f64],
    mesh: &Mesh1D,
    history: &QuadratureField,
    tau: f64,
    ext_flux: f64,
    phys: &Physics,
    mode: TangentMode,
) -> Result<(Vec<f64>, BandMatrix, TrialStresses), FemError> {
    if mode == TangentMode::Fd {
        return fd_jacobian(y, mesh, history, tau, ext_flux, phys);
    }
    let n = y.len();
    let bw = bandwidth(mesh);
    let mut jac = BandMatrix::zeros(n, bw, bw);
    let mut res = vec![0.0; n];
    let mut trial = Vec::with_capacity(mesh.n_elements());
    let nl = mesh.basis.n_local();
    for e in 0..mesh.n_elements() {
        let g = geometry(mesh, e);
        let mut stresses = [None; NQ];
        for q in 0..NQ {
            let x = local_input(y, mesh, e, &g, q);
            let old = &history.points[e][q].plastic;
            let (out, d, proj) = match mode {
                TangentMode::Ad => point_jacobian_ad(&x, g.r[q], old, tau, phys),
                _ => point_jacobian_analytic(&x, g.r[q], old, tau, phys),
            }
            .map_err(|source| FemError::Constitutive { element: e, source })?;
            scatter_residual(&mut res, mesh, e, &g, q, &out);
            stresses[q] = Some(proj);
            let (r, w) = (g.r[q], g.w[q]);
            for b in 0..nl {
                let col = N_FIELDS * mesh.node(e, b);
                let (pb, db) = (g.phi[q][b], g.dphi[q][b]);
                // d x / d y for the three fields of node b.
                let mut dout = [[0.0; N_FIELDS]; 4];
                for k in 0..4 {
                    for f in 0..N_FIELDS {
                        dout[k][f] = d[k][2 * f] * pb + d[k][2 * f + 1] * db;
                    }
                }
                for a in 0..nl {
                    let row = N_FIELDS * mesh.node(e, a);
                    let (pa, da) = (g.phi[q][a], g.dphi[q][a]);
                    for f in 0..N_FIELDS {
                        jac.add(row, col + f, -dout[0][f] * da * w);
                        jac.add(row + 1, col + f, dout[1][f] * pa * w);
                        jac.add(row + 2, col + f, (dout[2][f] * da + 2.0 * dout[3][f] * pa / r) * w);
                    }
                }
            }
        }
        trial.push(stresses.map(|s| s.expect("every point evaluated")));
    }
    finish_residual(&mut res, y, mesh, ext_flux);
    jac.clear_row(2);
    jac.add(2, 2, -1.0);
    Ok((res, jac, trial))
}

fn fd_jacobian(
    y: &[f64],
    mesh: &Mesh1D,
    history: &QuadratureField,
    tau: f64,
    ext_flux: f64,
    phys: &Physics,
) -> Result<(Vec<f64>, BandMatrix, TrialStresses), FemError> {
    let (res, trial) = assemble_residual(y, mesh, history, tau, ext_flux, phys)?;
    let n = y.len();
    let bw = bandwidth(mesh);
    let mut jac = BandMatrix::zeros(n, bw, bw);
    let mut yp = y.to_vec();
    for j in 0..n {
        let h = 1e-7 * (1.0 + y[j].abs());
        yp[j] = y[j] + h;
        let (rp, _) = assemble_residual(&yp, mesh, history, tau, ext_flux, phys)?;
        yp[j] = y[j] - h;
        let (rm, _) = assemble_residual(&yp, mesh, history, tau, ext_flux, phys)?;
        yp[j] = y[j];
        for i in j.saturating_sub(bw)..=(j + bw).min(n - 1) {
            let v = (rp[i] - rm[i]) / (2.0 * h);
            if v != 0.0 {
                jac.add(i, j, v);
            }
        }
    }
    Ok((res, jac, trial))
}
