//! Radially symmetric finite elements for the particle: mesh, assembly,
//! error estimation, adaptation and post-processing.

mod adapt;
mod assembly;
pub mod banded;
mod estimate;
mod kernel;
mod mesh;

pub use adapt::{adapt_mesh, mark, AdaptOptions, Marking, Transfer};
pub use assembly::{
    assemble_jacobian, assemble_residual, bandwidth, mass_matrix, TangentMode, TrialStresses,
};
pub use estimate::estimate_spatial_error;
pub use kernel::{
    point_eval, point_jacobian_ad, point_jacobian_analytic, Physics, PointInput, PointOutput,
};
pub use mesh::{
    build_mesh, build_mesh_with_max, unit_gauss, Cell, LagrangeBasis, Mesh1D, DEFAULT_MAX_LEVEL,
    DEFAULT_MIN_LEVEL, DEFAULT_ORDER, NQ,
};

use std::f64::consts::PI;

use thiserror::Error;

use crate::chemistry::chemical_part;
use crate::constitutive::{
    chemical_stretch, stiffness_apply, trial_state, update_plastic_flow, ConstitutiveError,
    PlasticState,
};
use crate::tensor::Mat3;

/// Unknowns per scalar node, interleaved as `(c, mu, u)`.
pub const N_FIELDS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("element {element}: {source}")]
    Constitutive {
        element: usize,
        #[source]
        source: ConstitutiveError,
    },
    #[error("field vector has length {got}, mesh needs {expected}")]
    Shape { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Concentration = 0,
    Potential = 1,
    Displacement = 2,
}

/// Nodal values of one field.
pub fn component(y: &[f64], field: Field) -> Vec<f64> {
    y.iter().skip(field as usize).step_by(N_FIELDS).copied().collect()
}

/// Committed history at one quadrature point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointHistory {
    pub plastic: PlasticState,
    /// Whether the last accepted step flowed plastically here.
    pub active: bool,
    /// Plastic strain increment of the last accepted step.
    pub increment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureField {
    pub points: Vec<[PointHistory; NQ]>,
}

impl QuadratureField {
    pub fn pristine(n_elements: usize) -> Self {
        QuadratureField { points: vec![[PointHistory::default(); NQ]; n_elements] }
    }

    /// History after accepting a step with the given trial stresses.
    pub fn committed(&self, trial: &TrialStresses) -> QuadratureField {
        let points = self
            .points
            .iter()
            .zip(trial)
            .map(|(old, proj)| {
                std::array::from_fn(|q| {
                    let plastic = update_plastic_flow(&old[q].plastic, &proj[q]);
                    PointHistory {
                        plastic,
                        active: proj[q].active,
                        increment: plastic.eps - old[q].plastic.eps,
                    }
                })
            })
            .collect();
        QuadratureField { points }
    }

    pub fn max_eps(&self) -> f64 {
        self.points.iter().flatten().map(|p| p.plastic.eps).fold(0.0, f64::max)
    }

    pub fn max_increment(&self) -> f64 {
        self.points.iter().flatten().map(|p| p.increment).fold(0.0, f64::max)
    }

    pub fn any_active(&self) -> bool {
        self.points.iter().flatten().any(|p| p.active && p.increment > 0.0)
    }
}

/// Uniform lithiation with the swelling-compatible, stress-free
/// displacement `u = r (lambda(c0) - 1)`.
pub fn initial_state(mesh: &Mesh1D, phys: &Physics) -> (Vec<f64>, QuadratureField) {
    let c0 = phys.params.c0;
    let stretch = chemical_stretch(c0, phys.params.molar_volume);
    let mu0 = chemical_part(c0, &phys.params);
    let mut y = Vec::with_capacity(N_FIELDS * mesh.n_nodes());
    for r in mesh.node_coords() {
        y.extend_from_slice(&[c0, mu0, r * (stretch - 1.0)]);
    }
    (y, QuadratureField::pristine(mesh.n_elements()))
}

/// Volume average of the nodal concentration over the unit sphere.
pub fn soc_of_field(c: &[f64], mesh: &Mesh1D) -> Result<f64, FemError> {
    if c.len() != mesh.n_nodes() {
        return Err(FemError::Shape { expected: mesh.n_nodes(), got: c.len() });
    }
    let n = mesh.basis.n_local();
    let (mut phi, mut dphi) = ([0.0; 5], [0.0; 5]);
    let mut total = 0.0;
    for (e, cell) in mesh.cells.iter().enumerate() {
        for (xi, wq) in unit_gauss() {
            mesh.basis.eval(xi, &mut phi[..n], &mut dphi[..n]);
            let r = cell.left() + xi * cell.width();
            let v: f64 = (0..n).map(|a| phi[a] * c[mesh.node(e, a)]).sum();
            total += v * 4.0 * PI * r * r * wq * cell.width();
        }
    }
    Ok(total / (4.0 * PI / 3.0))
}

/// Mechanical state at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointState {
    pub r: f64,
    pub c: f64,
    pub mu: f64,
    pub u: f64,
    pub sigma_r: f64,
    pub sigma_phi: f64,
    pub eps_pl: f64,
    pub f_pl_rr: f64,
    pub f_el_rr: f64,
    pub f_ch_rr: f64,
}

impl PointState {
    pub fn hydrostatic(&self) -> f64 {
        (self.sigma_r + 2.0 * self.sigma_phi) / 3.0
    }
}

/// Evaluates fields and Cauchy stresses at `r` with a committed plastic
/// state, using the elastic response of that state.
pub fn point_state(
    y: &[f64],
    mesh: &Mesh1D,
    plastic: &PlasticState,
    r: f64,
    phys: &Physics,
) -> Result<PointState, FemError> {
    let c_field = component(y, Field::Concentration);
    let (c, _) = mesh.eval_field(&c_field, r);
    let (mu, _) = mesh.eval_field(&component(y, Field::Potential), r);
    let (u, gu) = mesh.eval_field(&component(y, Field::Displacement), r);
    let hoop = kernel::hoop(u, gu, r);
    let f = Mat3::diag(1.0 + gu, 1.0 + hoop, 1.0 + hoop);
    let element = mesh.locate(r);
    let (kin, _) = trial_state(&f, c, plastic, &phys.mat, phys.measure)
        .map_err(|source| FemError::Constitutive { element, source })?;
    let mandel = stiffness_apply(&kin.e_el, &phys.mat);
    let piola = crate::constitutive::first_piola(&kin, &mandel)
        .map_err(|source| FemError::Constitutive { element, source })?;
    let sigma = crate::constitutive::cauchy_stress(&piola, &f);
    Ok(PointState {
        r,
        c,
        mu,
        u,
        sigma_r: sigma.0[0][0],
        sigma_phi: sigma.0[1][1],
        eps_pl: plastic.eps,
        f_pl_rr: plastic.f_pl.0[0][0],
        f_el_rr: kin.f_el.0[0][0],
        f_ch_rr: kin.chem_stretch,
    })
}

/// State at the particle surface, with the history of the outermost
/// quadrature point.
pub fn surface_trace(
    y: &[f64],
    mesh: &Mesh1D,
    history: &QuadratureField,
    phys: &Physics,
) -> Result<PointState, FemError> {
    let last = history.points.last().expect("mesh has elements");
    point_state(y, mesh, &last[NQ - 1].plastic, 1.0, phys)
}

/// Profile at every quadrature point plus the surface.
pub fn field_profile(
    y: &[f64],
    mesh: &Mesh1D,
    history: &QuadratureField,
    phys: &Physics,
) -> Result<Vec<PointState>, FemError> {
    let mut out = Vec::with_capacity(mesh.n_elements() * NQ + 1);
    for (e, cell) in mesh.cells.iter().enumerate() {
        for (q, (xi, _)) in unit_gauss().iter().enumerate() {
            let r = cell.left() + xi * cell.width();
            out.push(point_state(y, mesh, &history.points[e][q].plastic, r, phys)?);
        }
    }
    out.push(surface_trace(y, mesh, history, phys)?);
    Ok(out)
}

#[cfg(test)]
mod tests;
