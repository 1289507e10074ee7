//! Quadrature-point material kernel for the chemo-elasto-plastic particle.
//!
//! Kernels are generic over [`Real`] so the same code produces residuals
//! (`f64`) and forward-mode tangents (`Dual`).

mod kinematics;
mod projection;
mod stress;
mod tangent;

pub use kinematics::{
    chemical_stretch, gsv_strain, hencky_strain, stiffness_apply, trial_state, KinematicState,
    StrainMeasure,
};
pub use projection::{
    overstress_residual, project, project_rate_independent, project_viscoplastic,
    update_plastic_flow, yield_stress, yield_stress_scaled, ProjectedStress,
};
pub use stress::{cauchy_stress, d_mech_potential_dc, d_psi_el_dc, first_piola};
pub use tangent::{
    d_mandel_d_yield, overstress_sensitivities, tangent_rate_independent, tangent_viscoplastic,
    tangent_viscoplastic_consistent,
};

use thiserror::Error;

use crate::params::DimensionlessParams;
use crate::tensor::Mat3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstitutiveError {
    #[error("kinematic degeneracy: {0}")]
    KinematicDegeneracy(String),
    #[error("overstress solve did not converge; bracket [{lo:e}, {hi:e}]")]
    NonConvergence { lo: f64, hi: f64 },
    #[error("projection produced an invalid plastic strain ({old} -> {new})")]
    Inconsistent { old: f64, new: f64 },
}

/// Which inelastic theory is active at a quadrature point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Inelastic {
    Elastic,
    /// Rate-independent plasticity with the hardening stored in [`Material`].
    RateIndependent,
    Viscoplastic,
}

/// Material constants needed by the kernel, in dimensionless units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub shear: f64,
    pub lame: f64,
    pub bulk: f64,
    pub molar_volume: f64,
    pub yield_max: f64,
    pub yield_min: f64,
    pub overstress_ref: f64,
    pub hardening: f64,
    pub ref_strain_rate: f64,
    pub rate_exponent: f64,
}

impl Material {
    pub fn from_params(p: &DimensionlessParams) -> Self {
        Material {
            shear: p.shear,
            lame: p.lame,
            bulk: p.bulk,
            molar_volume: p.molar_volume,
            yield_max: p.yield_max,
            yield_min: p.yield_min,
            overstress_ref: p.overstress_ref,
            hardening: p.hardening,
            ref_strain_rate: p.ref_strain_rate,
            rate_exponent: p.rate_exponent,
        }
    }

    pub fn with_hardening(mut self, hardening: f64) -> Self {
        self.hardening = hardening;
        self
    }
}

/// History carried by a quadrature point between accepted steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlasticState {
    pub f_pl: Mat3<f64>,
    /// Accumulated equivalent plastic strain.
    pub eps: f64,
}

impl Default for PlasticState {
    fn default() -> Self {
        PlasticState {
            f_pl: Mat3::identity(),
            eps: 0.0,
        }
    }
}
