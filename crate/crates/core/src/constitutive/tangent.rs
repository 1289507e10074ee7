use super::projection::yield_stress_scaled;
use super::{Material, PlasticState};
use crate::tensor::{Mat3, Tensor4};

fn elastic(mat: &Material) -> Tensor4 {
    Tensor4::deviatoric(mat.shear).add(&Tensor4::volumetric(mat.bulk))
}

/// `C_G - 2G n⊗n`, the deviatoric part orthogonal to the flow direction.
fn transverse(mat: &Material, n: &Mat3<f64>) -> Tensor4 {
    Tensor4::deviatoric(mat.shear).add(&Tensor4::outer(n, n).scaled(-2.0 * mat.shear))
}

/// Consistent tangent `dM / dE_tri` of the rate-independent projector.
pub fn tangent_rate_independent(
    m_tri: &Mat3<f64>,
    c: f64,
    old: &PlasticState,
    mat: &Material,
) -> Tensor4 {
    let s = m_tri.dev();
    let ns = s.norm();
    let sy = yield_stress_scaled(c, mat);
    if ns <= sy + mat.hardening * old.eps {
        return elastic(mat);
    }
    let g2 = 2.0 * mat.shear;
    let a = mat.hardening / (g2 + mat.hardening);
    let kappa = 1.0 - g2 * old.eps / sy;
    let b = 1.0 - a * kappa;
    let n = s.scale(1.0 / ns);
    Tensor4::deviatoric(mat.shear)
        .scaled(a)
        .add(&Tensor4::volumetric(mat.bulk))
        .add(&transverse(mat, &n).scaled(b * sy / ns))
}

/// Viscoplastic tangent with the plastic increment held fixed.
pub fn tangent_viscoplastic(m_tri: &Mat3<f64>, delta_eps: f64, mat: &Material) -> Tensor4 {
    let s = m_tri.dev();
    let ns = s.norm();
    if delta_eps == 0.0 || ns == 0.0 {
        return elastic(mat);
    }
    let n = s.scale(1.0 / ns);
    elastic(mat).add(&transverse(mat, &n).scaled(-2.0 * mat.shear * delta_eps / ns))
}

/// Sensitivities `(d dEps / d|dev M_tri|, d dEps / d sigma_Y)` of the
/// converged overstress increment.
pub fn overstress_sensitivities(
    trial_norm: f64,
    yield_radius: f64,
    delta_eps: f64,
    tau: f64,
    mat: &Material,
) -> (f64, f64) {
    let g2 = 2.0 * mat.shear;
    let arg = ((trial_norm - g2 * delta_eps - yield_radius) / mat.overstress_ref).max(0.0);
    let k = mat.ref_strain_rate * mat.rate_exponent * arg.powf(mat.rate_exponent - 1.0)
        / mat.overstress_ref;
    let r_x = -g2 * k - 1.0 / tau;
    (-k / r_x, k / r_x)
}

/// Viscoplastic tangent including the sensitivity of the increment.
pub fn tangent_viscoplastic_consistent(
    m_tri: &Mat3<f64>,
    c: f64,
    delta_eps: f64,
    tau: f64,
    mat: &Material,
) -> Tensor4 {
    let frozen = tangent_viscoplastic(m_tri, delta_eps, mat);
    if delta_eps == 0.0 {
        return frozen;
    }
    let s = m_tri.dev();
    let ns = s.norm();
    let n = s.scale(1.0 / ns);
    let (d_norm, _) =
        overstress_sensitivities(ns, yield_stress_scaled(c, mat), delta_eps, tau, mat);
    let g2 = 2.0 * mat.shear;
    frozen.add(&Tensor4::outer(&n, &n).scaled(-g2 * g2 * d_norm))
}

/// Partial derivative of the projected Mandel stress with respect to the
/// initial yield radius, at fixed trial stress.
pub fn d_mandel_d_yield(
    m_tri: &Mat3<f64>,
    c: f64,
    old: &PlasticState,
    delta_eps: f64,
    tau: f64,
    viscous: bool,
    mat: &Material,
) -> Mat3<f64> {
    let s = m_tri.dev();
    let ns = s.norm();
    if ns == 0.0 {
        return Mat3::zero();
    }
    let n = s.scale(1.0 / ns);
    let sy = yield_stress_scaled(c, mat);
    if viscous {
        if delta_eps == 0.0 {
            return Mat3::zero();
        }
        let (_, d_yield) = overstress_sensitivities(ns, sy, delta_eps, tau, mat);
        n.scale(-2.0 * mat.shear * d_yield)
    } else {
        if ns <= sy + mat.hardening * old.eps {
            return Mat3::zero();
        }
        let a = mat.hardening / (2.0 * mat.shear + mat.hardening);
        n.scale(1.0 - a)
    }
}
