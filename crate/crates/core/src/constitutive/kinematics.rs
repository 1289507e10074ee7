use super::{ConstitutiveError, Material, PlasticState};
use crate::scalar::Real;
use crate::tensor::{sym_eigen, Mat3};

/// Eigenvalue floor applied before taking logarithms.
const EIGEN_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum StrainMeasure {
    #[default]
    Hencky,
    GreenStVenant,
}

#[derive(Debug, Clone, Copy)]
pub struct KinematicState<S> {
    pub f: Mat3<S>,
    pub chem_stretch: S,
    pub f_pl: Mat3<f64>,
    pub f_el: Mat3<S>,
    pub c_el: Mat3<S>,
    pub e_el: Mat3<S>,
    pub measure: StrainMeasure,
}

/// Isotropic swelling stretch `(1 + v c)^(1/3)`.
pub fn chemical_stretch<S: Real>(c: S, molar_volume: f64) -> S {
    (c * molar_volume + 1.0).cbrt()
}

pub fn hencky_strain<S: Real>(c_el: &Mat3<S>) -> Result<Mat3<S>, ConstitutiveError> {
    let (vals, _) = sym_eigen(&c_el.values());
    if !(vals[0] > 0.0) || !vals[2].is_finite() {
        return Err(ConstitutiveError::KinematicDegeneracy(format!(
            "right Cauchy-Green eigenvalues {vals:?}"
        )));
    }
    Ok(S::sym_apply(
        c_el,
        |x| 0.5 * x.max(EIGEN_FLOOR).ln(),
        |x| 0.5 / x.max(EIGEN_FLOOR),
    ))
}

pub fn gsv_strain<S: Real>(c_el: &Mat3<S>) -> Mat3<S> {
    (*c_el - Mat3::identity()).scale(S::cst(0.5))
}

/// Isotropic elasticity `lame tr(E) Id + 2 G E`.
pub fn stiffness_apply<S: Real>(e: &Mat3<S>, mat: &Material) -> Mat3<S> {
    let tr = e.trace() * mat.lame;
    let mut out = e.scale(S::cst(2.0 * mat.shear));
    for i in 0..3 {
        out.0[i][i] += tr;
    }
    out
}

/// Elastic predictor with the plastic history frozen.
pub fn trial_state<S: Real>(
    f: &Mat3<S>,
    c: S,
    old: &PlasticState,
    mat: &Material,
    measure: StrainMeasure,
) -> Result<(KinematicState<S>, Mat3<S>), ConstitutiveError> {
    let j = f.det().value();
    if !(j > 0.0) {
        return Err(ConstitutiveError::KinematicDegeneracy(format!("det F = {j}")));
    }
    let fp_inv = old.f_pl.inverse().ok_or_else(|| {
        ConstitutiveError::KinematicDegeneracy("singular plastic deformation gradient".into())
    })?;
    let chem_stretch = chemical_stretch(c, mat.molar_volume);
    let f_el = (*f * Mat3::from_f64(&fp_inv)).scale(chem_stretch.recip());
    let c_el = f_el.transpose() * f_el;
    let e_el = match measure {
        StrainMeasure::Hencky => hencky_strain(&c_el)?,
        StrainMeasure::GreenStVenant => gsv_strain(&c_el),
    };
    let m_tri = stiffness_apply(&e_el, mat);
    Ok((
        KinematicState {
            f: *f,
            chem_stretch,
            f_pl: old.f_pl,
            f_el,
            c_el,
            e_el,
            measure,
        },
        m_tri,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::DimensionlessParams;
    use crate::tensor::sym_exp;

    fn mat() -> Material {
        Material::from_params(&DimensionlessParams::reference())
    }

    #[test]
    fn stretch_values() {
        assert_eq!(chemical_stretch(0.0, 3.41), 1.0);
        assert!((chemical_stretch(1.0, 3.41) - 1.639_882_997_800_068).abs() < 1e-14);
        assert!((chemical_stretch(0.02, 3.41) - 1.022_235_262_033_477).abs() < 1e-14);
    }

    #[test]
    fn hencky_special_cases() {
        let z = hencky_strain(&Mat3::<f64>::identity()).unwrap();
        assert!(z.max_abs() < 1e-16);
        let e2 = std::f64::consts::E.powi(2);
        let h = hencky_strain(&Mat3::diag(e2, e2, e2)).unwrap();
        assert!((h - Mat3::identity()).max_abs() < 1e-15);
        assert!(hencky_strain(&Mat3::diag(1.0, -1.0, 1.0)).is_err());
    }

    #[test]
    fn hencky_exponential_round_trip() {
        let a = Mat3([[1.4, 0.3, -0.2], [0.3, 0.8, 0.1], [-0.2, 0.1, 1.2]]);
        let h = hencky_strain(&a).unwrap();
        let back = sym_exp(&h.scale(2.0));
        assert!((back - a).max_abs() < 1e-12);
    }

    #[test]
    fn gsv_examples() {
        let g = gsv_strain(&Mat3::diag(1.21, 1.0, 1.0));
        assert!((g - Mat3::diag(0.105, 0.0, 0.0)).max_abs() < 1e-15);
        let s = Mat3([[0.2, 0.1, 0.0], [0.1, -0.3, 0.4], [0.0, 0.4, 0.5]]);
        let c = Mat3::identity() + s.scale(1e-4);
        let diff = (gsv_strain(&c) - hencky_strain(&c).unwrap()).max_abs();
        assert!(diff < 1e-8 && diff > 1e-11);
    }

    #[test]
    fn stiffness_examples() {
        let m = mat();
        let iso = stiffness_apply(&Mat3::<f64>::identity(), &m);
        assert!((iso - Mat3::identity().scale(3.0 * m.lame + 2.0 * m.shear)).max_abs() < 1e-12);
        let dev = Mat3::diag(0.1, -0.05, -0.05);
        assert!((stiffness_apply(&dev, &m) - dev.scale(2.0 * m.shear)).max_abs() < 1e-14);
    }

    #[test]
    fn trial_state_examples() {
        let m = mat();
        let old = PlasticState::default();
        let lam = chemical_stretch(0.3, m.molar_volume);
        let (_, mt) =
            trial_state(&Mat3::identity().scale(lam), 0.3, &old, &m, StrainMeasure::Hencky)
                .unwrap();
        assert!(mt.max_abs() < 1e-13);
        let (_, mt) =
            trial_state(&Mat3::diag(1.1, 1.0, 1.0), 0.0, &old, &m, StrainMeasure::Hencky).unwrap();
        let expected = stiffness_apply(&Mat3::diag(1.1f64.ln(), 0.0, 0.0), &m);
        assert!((mt - expected).max_abs() < 1e-13);
        assert!(trial_state(&Mat3::diag(-1.0, 1.0, 1.0), 0.0, &old, &m, StrainMeasure::Hencky)
            .is_err());
    }
}
