//! Open-circuit voltage, chemical potential, mobility and cell voltage.

use thiserror::Error;

use crate::params::DimensionlessParams;
use crate::scalar::Real;

/// Mobility floor guarding against a vanishing `d mu / d c`.
pub const MOBILITY_FLOOR: f64 = 1e-8;

/// Concentration window used when the OCV is evaluated on Newton iterates.
pub const OCV_CLAMP: (f64, f64) = (1e-6, 1.0 - 1e-6);

const OCV_NUM: [f64; 4] = [0.006457, 0.2477, -0.005270, -0.2453];
const OCV_DEN_SHIFT: f64 = 0.002493;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChemistryError {
    #[error("concentration {0} outside the open interval (0, 1)")]
    Domain(f64),
}

fn check_open_unit(c: f64) -> Result<(), ChemistryError> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(ChemistryError::Domain(c))
    }
}

fn ocv_num<S: Real>(c: S) -> S {
    ((c * OCV_NUM[3] + OCV_NUM[2]) * c + OCV_NUM[1]) * c + OCV_NUM[0]
}

fn ocv_num_slope<S: Real>(c: S) -> S {
    (c * (3.0 * OCV_NUM[3]) + 2.0 * OCV_NUM[2]) * c + OCV_NUM[1]
}

/// OCV in volts without domain checks.
pub fn ocv_raw<S: Real>(c: S) -> S {
    ocv_num(c) / (c + OCV_DEN_SHIFT)
}

/// d OCV / d c in volts.
pub fn ocv_slope_raw<S: Real>(c: S) -> S {
    (ocv_num_slope(c) - ocv_raw(c)) / (c + OCV_DEN_SHIFT)
}

/// d^2 OCV / d c^2 in volts.
pub fn ocv_curvature_raw(c: f64) -> f64 {
    let num_curv = 6.0 * OCV_NUM[3] * c + 2.0 * OCV_NUM[2];
    (num_curv - 2.0 * ocv_slope_raw(c)) / (c + OCV_DEN_SHIFT)
}

/// Open-circuit voltage of amorphous silicon against lithium.
pub fn ocv(c: f64) -> Result<f64, ChemistryError> {
    check_open_unit(c)?;
    Ok(ocv_raw(c))
}

/// Clamps a concentration iterate into the OCV window. The clamped value
/// is a constant, so derivatives vanish outside the window.
pub fn clamp_for_ocv<S: Real>(c: S) -> S {
    if c.value() < OCV_CLAMP.0 {
        S::cst(OCV_CLAMP.0)
    } else if c.value() > OCV_CLAMP.1 {
        S::cst(OCV_CLAMP.1)
    } else {
        c
    }
}

/// Chemical part of the potential, `-Fa U_OCV / (R T)`.
pub fn d_psi_ch_dc(c: f64, p: &DimensionlessParams) -> Result<f64, ChemistryError> {
    Ok(-p.faraday_over_rt * ocv(c)?)
}

/// Clamped chemical potential used inside Newton iterations.
pub fn chemical_part<S: Real>(c: S, p: &DimensionlessParams) -> S {
    ocv_raw(clamp_for_ocv(c)) * (-p.faraday_over_rt)
}

/// Clamped `d/dc` of [`chemical_part`].
pub fn chemical_part_slope<S: Real>(c: S, p: &DimensionlessParams) -> S {
    ocv_slope_raw(clamp_for_ocv(c)) * (-p.faraday_over_rt)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChemPotentialInput {
    pub c: f64,
    /// Trace of the Mandel stress.
    pub stress_trace: f64,
    pub chem_stretch: f64,
}

/// Full chemical potential including the mechanical coupling term.
pub fn chemical_potential(
    inp: &ChemPotentialInput,
    p: &DimensionlessParams,
) -> Result<f64, ChemistryError> {
    let mech = -(p.molar_volume / 3.0) * inp.stress_trace / inp.chem_stretch.powi(3);
    Ok(d_psi_ch_dc(inp.c, p)? + mech)
}

/// Mobility `Fo / d mu / d c`, floored to stay positive.
pub fn mobility<S: Real>(dmu_dc: S, p: &DimensionlessParams) -> S {
    if dmu_dc.value() < MOBILITY_FLOOR {
        S::cst(p.fourier / MOBILITY_FLOOR)
    } else {
        S::cst(p.fourier) / dmu_dc
    }
}

/// Cell voltage in volts from surface state and dimensionless influx.
///
/// `mu_surf` is dimensionless, `ext_flux` is the dimensionless influx
/// (positive during lithiation).
pub fn butler_volmer_voltage(
    c_surf: f64,
    mu_surf: f64,
    ext_flux: f64,
    p: &DimensionlessParams,
) -> Result<f64, ChemistryError> {
    let fill = c_surf * (1.0 - c_surf);
    if fill <= 0.0 || !fill.is_finite() {
        return Err(ChemistryError::Domain(c_surf));
    }
    let thermal = 1.0 / p.faraday_over_rt;
    let j0 = p.exchange_rate * fill.sqrt();
    Ok(2.0 * thermal * p.reference_potential
        - thermal * mu_surf
        - 2.0 * thermal * (ext_flux / (2.0 * j0)).asinh())
}
