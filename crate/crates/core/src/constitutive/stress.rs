use super::{ConstitutiveError, KinematicState, Material, StrainMeasure};
use crate::scalar::Real;
use crate::tensor::Mat3;

/// First Piola-Kirchhoff stress `F^-T F_pl^T M F_pl^-T` from the projected
/// Mandel stress.
pub fn first_piola<S: Real>(
    kin: &KinematicState<S>,
    mandel: &Mat3<S>,
) -> Result<Mat3<S>, ConstitutiveError> {
    let f_inv = kin
        .f
        .inverse()
        .ok_or_else(|| ConstitutiveError::KinematicDegeneracy("singular F".into()))?;
    let fp_inv = kin.f_pl.inverse().ok_or_else(|| {
        ConstitutiveError::KinematicDegeneracy("singular plastic deformation gradient".into())
    })?;
    let fp_t = Mat3::from_f64(&kin.f_pl.transpose());
    let fp_inv_t = Mat3::from_f64(&fp_inv.transpose());
    Ok(f_inv.transpose() * fp_t * *mandel * fp_inv_t)
}

pub fn cauchy_stress<S: Real>(piola: &Mat3<S>, f: &Mat3<S>) -> Mat3<S> {
    (*piola * f.transpose()).scale(f.det().recip())
}

/// Mechanical contribution `-(v/3) lambda^-3 tr M` to the chemical potential.
pub fn d_psi_el_dc<S: Real>(chem_stretch: S, mandel_trace: S, mat: &Material) -> S {
    -(mandel_trace * (mat.molar_volume / 3.0)) / (chem_stretch * chem_stretch * chem_stretch)
}

/// Derivative of [`d_psi_el_dc`] with respect to `c` at fixed deformation.
pub fn d_mech_potential_dc<S: Real>(
    c: S,
    kin: &KinematicState<S>,
    mandel_trace: S,
    mat: &Material,
) -> S {
    let v = mat.molar_volume;
    let rho = (c * v + 1.0).recip();
    let stretch_trace = match kin.measure {
        StrainMeasure::Hencky => S::cst(3.0),
        StrainMeasure::GreenStVenant => kin.c_el.trace(),
    };
    rho * rho * (v * v / 3.0) * (mandel_trace + stretch_trace * mat.bulk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{chemical_stretch, stiffness_apply, trial_state, PlasticState};
    use crate::params::DimensionlessParams;
    use crate::tensor::sym_exp;

    fn mat() -> Material {
        Material::from_params(&DimensionlessParams::reference())
    }

    fn energy(f: &Mat3<f64>, c: f64, old: &PlasticState, m: &Material) -> f64 {
        let (kin, mt) = trial_state(f, c, old, m, StrainMeasure::Hencky).unwrap();
        0.5 * kin.e_el.ddot(&mt)
    }

    #[test]
    fn swelling_is_stress_free() {
        let m = mat();
        let lam = chemical_stretch(0.4, m.molar_volume);
        let (kin, mt) = trial_state(
            &Mat3::identity().scale(lam),
            0.4,
            &PlasticState::default(),
            &m,
            StrainMeasure::Hencky,
        )
        .unwrap();
        let p = first_piola(&kin, &Mat3::zero()).unwrap();
        assert_eq!(p, Mat3::zero());
        assert!(first_piola(&kin, &mt).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn diagonal_closed_form() {
        let m = mat();
        let f = Mat3::diag(1.3, 1.2, 1.2);
        let (kin, mt) =
            trial_state(&f, 0.2, &PlasticState::default(), &m, StrainMeasure::Hencky).unwrap();
        let p = first_piola(&kin, &mt).unwrap();
        let lam = chemical_stretch(0.2, m.molar_volume);
        let e = Mat3::diag((1.3 / lam).ln(), (1.2 / lam).ln(), (1.2 / lam).ln());
        let mm = stiffness_apply(&e, &m);
        let expected = Mat3::diag(mm.0[0][0] / 1.3, mm.0[1][1] / 1.2, mm.0[2][2] / 1.2);
        assert!((p - expected).max_abs() < 1e-13);
    }

    #[test]
    fn piola_is_work_conjugate() {
        let m = mat();
        let f = Mat3([[1.12, 0.03, -0.02], [0.01, 1.05, 0.04], [-0.03, 0.02, 1.08]]);
        let fp = sym_exp(&Mat3([[0.01, 0.004, 0.0], [0.004, -0.006, 0.002], [0.0, 0.002, -0.004]]));
        let old = PlasticState { f_pl: fp, eps: 0.0 };
        let c = 0.05;
        let (kin, mt) = trial_state(&f, c, &old, &m, StrainMeasure::Hencky).unwrap();
        let p = first_piola(&kin, &mt).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            for j in 0..3 {
                let mut up = f;
                let mut dn = f;
                up.0[i][j] += h;
                dn.0[i][j] -= h;
                let fd = (energy(&up, c, &old, &m) - energy(&dn, c, &old, &m)) / (2.0 * h);
                assert!((fd - p.0[i][j]).abs() < 1e-8, "({i},{j}) {fd} vs {}", p.0[i][j]);
            }
        }
    }

    #[test]
    fn cauchy_examples() {
        let p = Mat3([[0.3, 0.1, 0.0], [0.2, -0.1, 0.0], [0.0, 0.0, 0.5]]);
        assert_eq!(cauchy_stress(&Mat3::zero(), &Mat3::diag(1.1, 1.0, 1.0)), Mat3::zero());
        assert!((cauchy_stress(&p, &Mat3::identity()) - p).max_abs() < 1e-15);
    }

    #[test]
    fn cauchy_matches_mandel_on_diagonal_states() {
        let m = mat();
        for (a, b, c) in [(1.1, 1.3, 0.2), (0.95, 1.02, 0.0), (1.6, 1.5, 0.9)] {
            let f = Mat3::diag(a, b, b);
            let fp = Mat3::diag(1.01, 1.0 / 1.01f64.sqrt(), 1.0 / 1.01f64.sqrt());
            let old = PlasticState { f_pl: fp, eps: 0.0 };
            let (kin, mt) = trial_state(&f, c, &old, &m, StrainMeasure::Hencky).unwrap();
            let sigma = cauchy_stress(&first_piola(&kin, &mt).unwrap(), &f);
            let fe = kin.f_el;
            let j = (fe.scale(kin.chem_stretch)).det();
            let expected = (fe * mt * fe.inverse().unwrap()).scale(1.0 / j);
            assert!((sigma - expected).max_abs() < 1e-12);
            assert!((sigma - sigma.transpose()).max_abs() < 1e-12);
        }
    }

    #[test]
    fn mechanical_potential_examples() {
        let m = mat();
        let lam = chemical_stretch(0.5, m.molar_volume);
        assert_eq!(d_psi_el_dc(lam, 0.0, &m), 0.0);
        assert!(d_psi_el_dc(lam, 0.7, &m) < 0.0);
        // -(3.41/3) / 2.705
        assert!((d_psi_el_dc(lam, 1.0, &m) + 0.420_209_488_601_355).abs() < 1e-12);
    }

    #[test]
    fn mechanical_potential_slope_matches_finite_differences() {
        let m = mat();
        let f = Mat3::diag(1.2, 1.25, 1.25);
        let old = PlasticState::default();
        for measure in [StrainMeasure::Hencky, StrainMeasure::GreenStVenant] {
            let mu = |c: f64| {
                let (kin, mt) = trial_state(&f, c, &old, &m, measure).unwrap();
                d_psi_el_dc(kin.chem_stretch, mt.trace(), &m)
            };
            let c = 0.15;
            let h = 1e-6;
            let fd = (mu(c + h) - mu(c - h)) / (2.0 * h);
            let (kin, mt) = trial_state(&f, c, &old, &m, measure).unwrap();
            let an = d_mech_potential_dc(c, &kin, mt.trace(), &m);
            assert!((fd - an).abs() < 1e-6 * an.abs(), "{measure:?}: {fd} vs {an}");
        }
    }
}
