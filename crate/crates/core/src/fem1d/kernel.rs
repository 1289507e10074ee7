//! Quadrature-point evaluation of the coupled fluxes and stresses.

use crate::autodiff::Dual;
use crate::chemistry::{
    chemical_part, chemical_part_slope, mobility, ocv_curvature_raw, MOBILITY_FLOOR, OCV_CLAMP,
};
use crate::constitutive::{
    d_mandel_d_yield, d_mech_potential_dc, d_psi_el_dc, first_piola, project,
    tangent_rate_independent, tangent_viscoplastic_consistent, trial_state, ConstitutiveError,
    Inelastic, Material, PlasticState, ProjectedStress, StrainMeasure,
};
use crate::params::DimensionlessParams;
use crate::scalar::Real;
use crate::tensor::{Mat3, Tensor4};

/// Radius below which the hoop strain uses its limit `u/r -> du/dr`.
const ORIGIN_TOL: f64 = 1e-12;

/// Everything the kernel needs besides the local state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physics {
    pub params: DimensionlessParams,
    pub mat: Material,
    pub model: Inelastic,
    pub measure: StrainMeasure,
}

impl Physics {
    pub fn new(params: DimensionlessParams, model: Inelastic, measure: StrainMeasure) -> Self {
        Physics { params, mat: Material::from_params(&params), model, measure }
    }
}

/// Local inputs in the order `c, c', mu, mu', u, u'`.
pub type PointInput<S> = [S; 6];

/// Local outputs: diffusive flux `m mu'`, potential residual, `P_rr`, `P_phiphi`.
pub type PointOutput<S> = [S; 4];

pub(crate) fn hoop<S: Real>(u: S, gu: S, r: f64) -> S {
    if r > ORIGIN_TOL {
        u / r
    } else {
        gu
    }
}

fn deformation<S: Real>(x: &PointInput<S>, r: f64) -> Mat3<S> {
    let one = S::cst(1.0);
    let h = hoop(x[4], x[5], r) + 1.0;
    Mat3::diag(x[5] + one, h, h)
}

/// Generic evaluation, used with `f64` for residuals and duals for tangents.
pub fn point_eval<S: Real>(
    x: &PointInput<S>,
    r: f64,
    old: &PlasticState,
    tau: f64,
    phys: &Physics,
) -> Result<(PointOutput<S>, ProjectedStress<f64>), ConstitutiveError> {
    let f = deformation(x, r);
    let c = x[0];
    let (kin, m_tri) = trial_state(&f, c, old, &phys.mat, phys.measure)?;
    let proj = project(phys.model, &m_tri, c, old, tau, &phys.mat)?;
    let piola = first_piola(&kin, &proj.mandel)?;
    let tr = proj.mandel.trace();
    let potential = chemical_part(c, &phys.params) + d_psi_el_dc(kin.chem_stretch, tr, &phys.mat);
    let slope = chemical_part_slope(c, &phys.params) + d_mech_potential_dc(c, &kin, tr, &phys.mat);
    let m = mobility(slope, &phys.params);
    Ok((
        [m * x[3], potential - x[2], piola.0[0][0], piola.0[1][1]],
        proj.values(),
    ))
}

/// Outputs and their derivatives with respect to the six local inputs via
/// forward-mode duals.
pub fn point_jacobian_ad(
    x: &PointInput<f64>,
    r: f64,
    old: &PlasticState,
    tau: f64,
    phys: &Physics,
) -> Result<(PointOutput<f64>, [[f64; 6]; 4], ProjectedStress<f64>), ConstitutiveError> {
    let xd: PointInput<Dual<6>> = std::array::from_fn(|i| Dual::variable(x[i], i));
    let (q, proj) = point_eval(&xd, r, old, tau, phys)?;
    Ok((q.map(|v| v.v), q.map(|v| v.d), proj))
}

fn diagonal_block(t: &Tensor4) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| t.0[4 * i][4 * j]))
}

/// Outputs and derivatives from the closed-form diagonal linearization.
pub fn point_jacobian_analytic(
    x: &PointInput<f64>,
    r: f64,
    old: &PlasticState,
    tau: f64,
    phys: &Physics,
) -> Result<(PointOutput<f64>, [[f64; 6]; 4], ProjectedStress<f64>), ConstitutiveError> {
    let (q, proj) = point_eval(x, r, old, tau, phys)?;
    let mat = &phys.mat;
    let p = &phys.params;
    let v = mat.molar_volume;
    let c = x[0];
    let fdef = deformation(x, r);
    let fd = [fdef.0[0][0], fdef.0[1][1], fdef.0[2][2]];
    let (kin, m_tri) = trial_state(&fdef, c, old, mat, phys.measure)?;
    let rho = 1.0 / (1.0 + v * c);
    let fe: [f64; 3] = std::array::from_fn(|i| kin.f_el.0[i][i]);
    let gsv = phys.measure == StrainMeasure::GreenStVenant;
    let de_df: [f64; 3] =
        std::array::from_fn(|i| if gsv { fe[i] * fe[i] / fd[i] } else { 1.0 / fd[i] });
    let de_dc: [f64; 3] =
        std::array::from_fn(|i| -(if gsv { fe[i] * fe[i] } else { 1.0 }) * v * rho / 3.0);

    let (tangent, d_yield) = match phys.model {
        Inelastic::Elastic => (
            Tensor4::deviatoric(mat.shear).add(&Tensor4::volumetric(mat.bulk)),
            Mat3::zero(),
        ),
        Inelastic::RateIndependent => (
            tangent_rate_independent(&m_tri, c, old, mat),
            d_mandel_d_yield(&m_tri, c, old, 0.0, tau, false, mat),
        ),
        Inelastic::Viscoplastic => (
            tangent_viscoplastic_consistent(&m_tri, c, proj.increment, tau, mat),
            d_mandel_d_yield(&m_tri, c, old, proj.increment, tau, true, mat),
        ),
    };
    let t = diagonal_block(&tangent);
    let yield_slope = mat.yield_min - mat.yield_max;

    // dM_i / dF_rr, dM_i / dF_hoop (both hoop entries move together), dM_i / dc.
    let mut dm_df1 = [0.0; 3];
    let mut dm_df2 = [0.0; 3];
    let mut dm_dc = [0.0; 3];
    for i in 0..3 {
        dm_df1[i] = t[i][0] * de_df[0];
        dm_df2[i] = t[i][1] * de_df[1] + t[i][2] * de_df[2];
        dm_dc[i] = (0..3).map(|j| t[i][j] * de_dc[j]).sum::<f64>() + d_yield.0[i][i] * yield_slope;
    }
    let m = proj.mandel;
    let (m1, m2) = (m.0[0][0], m.0[1][1]);
    let dq3 = [dm_df1[0] / fd[0] - m1 / (fd[0] * fd[0]), dm_df2[0] / fd[0], dm_dc[0] / fd[0]];
    let dq4 = [dm_df1[1] / fd[1], dm_df2[1] / fd[1] - m2 / (fd[1] * fd[1]), dm_dc[1] / fd[1]];
    let dtr = [
        dm_df1.iter().sum::<f64>(),
        dm_df2.iter().sum::<f64>(),
        dm_dc.iter().sum::<f64>(),
    ];
    let tr = m.trace();

    let clamped = c < OCV_CLAMP.0 || c > OCV_CLAMP.1;
    let chi1 = chemical_part_slope(c, p);
    let chi2 = if clamped { 0.0 } else { -p.faraday_over_rt * ocv_curvature_raw(c) };
    let dq2 = [
        -(v / 3.0) * rho * dtr[0],
        -(v / 3.0) * rho * dtr[1],
        chi1 + v * v / 3.0 * rho * rho * tr - (v / 3.0) * rho * dtr[2],
    ];

    let (stretch_tr, dst) = if gsv {
        let s: f64 = fe.iter().map(|e| e * e).sum();
        (
            s,
            [
                2.0 * fe[0] * fe[0] / fd[0],
                2.0 * (fe[1] * fe[1] / fd[1] + fe[2] * fe[2] / fd[2]),
                -2.0 * s * v * rho / 3.0,
            ],
        )
    } else {
        (3.0, [0.0; 3])
    };
    let k = mat.bulk;
    let pre = v * v * rho * rho / 3.0;
    let slope = chi1 + pre * (tr + k * stretch_tr);
    let dslope = [
        pre * (dtr[0] + k * dst[0]),
        pre * (dtr[1] + k * dst[1]),
        chi2 - 2.0 * v * rho * pre * (tr + k * stretch_tr) + pre * (dtr[2] + k * dst[2]),
    ];
    let gmu = x[3];
    let (dq1_dvars, dq1_dgmu) = if slope < MOBILITY_FLOOR {
        ([0.0; 3], p.fourier / MOBILITY_FLOOR)
    } else {
        let s = -p.fourier / (slope * slope) * gmu;
        ([s * dslope[0], s * dslope[1], s * dslope[2]], p.fourier / slope)
    };

    // Chain (F_rr, F_hoop, c) to the local inputs.
    let (dh_du, dh_dgu) = if r > ORIGIN_TOL { (1.0 / r, 0.0) } else { (0.0, 1.0) };
    let expand = |d: [f64; 3]| -> [f64; 6] {
        [d[2], 0.0, 0.0, 0.0, d[1] * dh_du, d[0] + d[1] * dh_dgu]
    };
    let mut j = [expand(dq1_dvars), expand(dq2), expand(dq3), expand(dq4)];
    j[0][3] = dq1_dgmu;
    j[1][2] = -1.0;
    Ok((q, j, proj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::chemical_stretch;

    fn phys(model: Inelastic, measure: StrainMeasure) -> Physics {
        Physics::new(DimensionlessParams::reference(), model, measure)
    }

    fn state(c: f64, r: f64, strain: f64) -> PointInput<f64> {
        let lam = chemical_stretch(c, 3.41);
        let u = r * (lam - 1.0) + strain * r;
        [c, 0.3, -7.0, 0.8, u, lam - 1.0 - 2.0 * strain]
    }

    fn rel_diff(a: &[[f64; 6]; 4], b: &[[f64; 6]; 4]) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..4 {
            let scale = a[k].iter().chain(b[k].iter()).fold(1e-12f64, |m, v| m.max(v.abs()));
            for i in 0..6 {
                worst = worst.max((a[k][i] - b[k][i]).abs() / scale);
            }
        }
        worst
    }

    #[test]
    fn swelling_compatible_state_is_stress_free() {
        let ph = phys(Inelastic::Elastic, StrainMeasure::Hencky);
        let x = state(0.3, 0.6, 0.0);
        let (q, _) = point_eval(&x, 0.6, &PlasticState::default(), 1e-3, &ph).unwrap();
        assert!(q[2].abs() < 1e-13 && q[3].abs() < 1e-13);
        let expected = chemical_part(0.3, &ph.params) - x[2];
        assert!((q[1] - expected).abs() < 1e-12);
    }

    #[test]
    fn analytic_matches_dual_numbers() {
        let old = PlasticState {
            f_pl: Mat3::diag(1.01, 1.0 / 1.01f64.sqrt(), 1.0 / 1.01f64.sqrt()),
            eps: 0.004,
        };
        for model in [Inelastic::Elastic, Inelastic::RateIndependent, Inelastic::Viscoplastic] {
            for measure in [StrainMeasure::Hencky, StrainMeasure::GreenStVenant] {
                let ph = phys(model, measure);
                for (c, r, strain) in [(0.1, 0.9, 0.012), (0.5, 0.3, -0.01), (0.05, 0.99, 0.02)] {
                    let x = state(c, r, strain);
                    let (qa, ja, pa) = point_jacobian_analytic(&x, r, &old, 2e-3, &ph).unwrap();
                    let (qd, jd, _) = point_jacobian_ad(&x, r, &old, 2e-3, &ph).unwrap();
                    for k in 0..4 {
                        assert!((qa[k] - qd[k]).abs() < 1e-13 * (1.0 + qa[k].abs()));
                    }
                    let d = rel_diff(&ja, &jd);
                    assert!(d < 1e-8, "{model:?} {measure:?} c={c}: {d} active={}", pa.active);
                }
            }
        }
    }

    #[test]
    fn plastic_flow_is_reached_by_test_states() {
        let ph = phys(Inelastic::RateIndependent, StrainMeasure::Hencky);
        let x = state(0.05, 0.99, 0.02);
        let (_, proj) = point_eval(&x, 0.99, &PlasticState::default(), 1e-3, &ph).unwrap();
        assert!(proj.active);
    }
}
