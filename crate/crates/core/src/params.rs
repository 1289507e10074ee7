//! Physical constants, their dimensionless counterparts and derived elastic moduli.

use thiserror::Error;

/// Tensile-test consistency factor between the uniaxial yield stress and
/// the radius of the deviatoric yield cylinder.
pub const SQRT_2_3: f64 = 0.816_496_580_927_726;

const SECONDS_PER_HOUR: f64 = 3600.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("parameter `{field}` must be finite, got {value}")]
    NotFinite { field: &'static str, value: f64 },
    #[error("parameter `{field}` must be strictly positive, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("parameter `{field}` = {value} outside the admissible range {range}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        range: &'static str,
    },
}

/// SI-valued model constants. Defaults reproduce the amorphous-silicon set.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    /// J/(mol K)
    pub gas_constant: f64,
    /// C/mol
    pub faraday: f64,
    /// K
    pub temperature: f64,
    /// Particle radius, m.
    pub radius: f64,
    /// m^2/s
    pub diffusivity: f64,
    /// Pa
    pub youngs_modulus: f64,
    /// Yield stress of the unlithiated material, Pa.
    pub yield_max: f64,
    /// Yield stress of the fully lithiated material, Pa.
    pub yield_min: f64,
    /// Overstress normalization of the viscoplastic law, Pa.
    pub overstress_ref: f64,
    /// Isotropic hardening modulus, Pa.
    pub hardening: f64,
    /// Reference plastic strain rate, 1/s.
    pub ref_strain_rate: f64,
    /// Partial molar volume, m^3/mol.
    pub molar_volume: f64,
    /// mol/m^3
    pub c_max: f64,
    /// Initial fill fraction.
    pub c0_frac: f64,
    pub poisson: f64,
    /// Rate-sensitivity exponent of the viscoplastic law.
    pub rate_exponent: f64,
    /// Butler-Volmer rate constant, A/m^2.
    pub exchange_rate: f64,
    /// 1/h
    pub c_rate: f64,
    /// Butler-Volmer reference potential, V.
    pub reference_potential: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            gas_constant: 8.314,
            faraday: 96485.0,
            temperature: 298.15,
            radius: 50e-9,
            diffusivity: 1e-17,
            youngs_modulus: 90.13e9,
            yield_max: 8e8,
            yield_min: 2e8,
            overstress_ref: 2e8,
            hardening: 1e9,
            ref_strain_rate: 2.3e-3,
            molar_volume: 10.96e-6,
            c_max: 311.47e3,
            c0_frac: 0.02,
            poisson: 0.22,
            rate_exponent: 2.94,
            exchange_rate: 0.4207,
            c_rate: 1.0,
            reference_potential: 0.0,
        }
    }
}

impl PhysicalParams {
    /// Cycle time in hours.
    pub fn cycle_hours(&self) -> f64 {
        1.0 / self.c_rate
    }

    /// Stress scale `R T c_max`.
    pub fn stress_scale(&self) -> f64 {
        self.gas_constant * self.temperature * self.c_max
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let positive = [
            ("gas_constant", self.gas_constant),
            ("faraday", self.faraday),
            ("temperature", self.temperature),
            ("radius", self.radius),
            ("diffusivity", self.diffusivity),
            ("youngs_modulus", self.youngs_modulus),
            ("yield_max", self.yield_max),
            ("yield_min", self.yield_min),
            ("overstress_ref", self.overstress_ref),
            ("ref_strain_rate", self.ref_strain_rate),
            ("molar_volume", self.molar_volume),
            ("c_max", self.c_max),
            ("rate_exponent", self.rate_exponent),
            ("exchange_rate", self.exchange_rate),
            ("c_rate", self.c_rate),
        ];
        for (field, value) in positive {
            check_finite(field, value)?;
            if value <= 0.0 {
                return Err(ParamError::NotPositive { field, value });
            }
        }
        check_finite("hardening", self.hardening)?;
        if self.hardening < 0.0 {
            return Err(ParamError::OutOfRange {
                field: "hardening",
                value: self.hardening,
                range: "[0, inf)",
            });
        }
        check_finite("reference_potential", self.reference_potential)?;
        check_finite("poisson", self.poisson)?;
        if !(self.poisson > 0.0 && self.poisson < 0.5) {
            return Err(ParamError::OutOfRange {
                field: "poisson",
                value: self.poisson,
                range: "(0, 0.5)",
            });
        }
        check_finite("c0_frac", self.c0_frac)?;
        if !(self.c0_frac > 0.0 && self.c0_frac < 1.0) {
            return Err(ParamError::OutOfRange {
                field: "c0_frac",
                value: self.c0_frac,
                range: "(0, 1)",
            });
        }
        if self.yield_min > self.yield_max {
            return Err(ParamError::OutOfRange {
                field: "yield_min",
                value: self.yield_min,
                range: "(0, yield_max]",
            });
        }
        Ok(())
    }
}

fn check_finite(field: &'static str, value: f64) -> Result<(), ParamError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ParamError::NotFinite { field, value })
    }
}

/// Dimensionless model constants used by every solver component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessParams {
    pub youngs: f64,
    pub fourier: f64,
    pub molar_volume: f64,
    pub yield_max: f64,
    pub yield_min: f64,
    pub overstress_ref: f64,
    pub hardening: f64,
    pub ref_strain_rate: f64,
    pub exchange_rate: f64,
    /// Boundary influx magnitude of one C-rate unit on the unit sphere.
    pub ext_flux: f64,
    pub lame: f64,
    pub shear: f64,
    pub bulk: f64,
    pub poisson: f64,
    pub rate_exponent: f64,
    pub c0: f64,
    /// Cycle time, h.
    pub t_cycle: f64,
    /// `Fa / (R T)`, 1/V.
    pub faraday_over_rt: f64,
    /// Dimensionless Butler-Volmer reference potential.
    pub reference_potential: f64,
}

impl DimensionlessParams {
    /// The published dimensionless parameter column for the 50 nm, 1C set.
    pub fn reference() -> Self {
        let mut p = Self::with_elastic(116.74, 0.22);
        p.fourier = 14.4;
        p.molar_volume = 3.41;
        p.yield_max = 0.85;
        p.yield_min = 0.21;
        p.overstress_ref = 0.21;
        p.hardening = 0.77;
        p.ref_strain_rate = 8.28;
        p.exchange_rate = 1.0079;
        p.faraday_over_rt = 96485.0 / (8.314 * 298.15);
        p
    }

    fn with_elastic(youngs: f64, poisson: f64) -> Self {
        let shear = youngs / (2.0 * (1.0 + poisson));
        let lame = 2.0 * shear * poisson / (1.0 - 2.0 * poisson);
        DimensionlessParams {
            youngs,
            fourier: 0.0,
            molar_volume: 0.0,
            yield_max: 0.0,
            yield_min: 0.0,
            overstress_ref: 0.0,
            hardening: 0.0,
            ref_strain_rate: 0.0,
            exchange_rate: 0.0,
            ext_flux: 1.0 / 3.0,
            lame,
            shear,
            bulk: lame + 2.0 * shear / 3.0,
            poisson,
            rate_exponent: 2.94,
            c0: 0.02,
            t_cycle: 1.0,
            faraday_over_rt: 0.0,
            reference_potential: 0.0,
        }
    }

    /// Recovers SI values, taking the reference scales (gas constant,
    /// Faraday constant, temperature, radius, c_max, c-rate) from `scales`.
    pub fn redimensionalize(&self, scales: &PhysicalParams) -> PhysicalParams {
        let t_s = self.t_cycle * SECONDS_PER_HOUR;
        let sigma = scales.stress_scale();
        let rt = scales.gas_constant * scales.temperature;
        PhysicalParams {
            diffusivity: self.fourier * scales.radius * scales.radius / t_s,
            youngs_modulus: self.youngs * sigma,
            yield_max: self.yield_max * sigma / SQRT_2_3,
            yield_min: self.yield_min * sigma / SQRT_2_3,
            overstress_ref: self.overstress_ref * sigma / SQRT_2_3,
            hardening: self.hardening * sigma / SQRT_2_3,
            ref_strain_rate: self.ref_strain_rate / t_s,
            molar_volume: self.molar_volume / scales.c_max,
            c0_frac: self.c0,
            poisson: self.poisson,
            rate_exponent: self.rate_exponent,
            exchange_rate: self.exchange_rate * scales.faraday * scales.radius * scales.c_max
                / t_s,
            c_rate: 1.0 / self.t_cycle,
            reference_potential: self.reference_potential * rt / scales.faraday,
            ..scales.clone()
        }
    }
}

/// Converts SI parameters into the dimensionless set.
///
/// Stresses are scaled by `R T c_max`. Yield-type stresses additionally carry
/// the `sqrt(2/3)` tensile-test factor, which is how the published
/// dimensionless yield values are tabulated.
pub fn nondimensionalize(p: &PhysicalParams) -> Result<DimensionlessParams, ParamError> {
    p.validate()?;
    let t_h = p.cycle_hours();
    let t_s = t_h * SECONDS_PER_HOUR;
    let sigma = p.stress_scale();
    let rt = p.gas_constant * p.temperature;
    let mut d = DimensionlessParams::with_elastic(p.youngs_modulus / sigma, p.poisson);
    d.fourier = p.diffusivity * t_s / (p.radius * p.radius);
    d.molar_volume = p.molar_volume * p.c_max;
    d.yield_max = SQRT_2_3 * p.yield_max / sigma;
    d.yield_min = SQRT_2_3 * p.yield_min / sigma;
    d.overstress_ref = SQRT_2_3 * p.overstress_ref / sigma;
    d.hardening = SQRT_2_3 * p.hardening / sigma;
    d.ref_strain_rate = p.ref_strain_rate * t_s;
    d.exchange_rate = p.exchange_rate * t_s / (p.faraday * p.radius * p.c_max);
    d.rate_exponent = p.rate_exponent;
    d.c0 = p.c0_frac;
    d.t_cycle = t_h;
    d.faraday_over_rt = p.faraday / rt;
    d.reference_potential = p.reference_potential * p.faraday / rt;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lame_constants_follow_youngs_and_poisson() {
        let d = DimensionlessParams::reference();
        // Hand-evaluated from E = 116.74, nu = 0.22.
        assert!((d.shear - 47.844_262_295_081_97).abs() < 1e-12);
        assert!((d.lame - 37.591_920_374_707_26).abs() < 1e-12);
        assert!((d.bulk - 69.488_095_238_095_24).abs() < 1e-12);
    }

    #[test]
    fn defaults_give_expected_scales() {
        let d = nondimensionalize(&PhysicalParams::default()).unwrap();
        assert!((d.youngs / 116.74 - 1.0).abs() < 5e-3);
        assert!((d.fourier - 14.4).abs() < 1e-12);
        assert!((d.ref_strain_rate - 8.28).abs() < 1e-12);
        assert!((d.exchange_rate / 1.0079 - 1.0).abs() < 5e-3);
        assert!((d.faraday_over_rt - 38.92).abs() < 0.01);
    }

    #[test]
    fn fourier_scales_with_cycle_time_and_radius() {
        let mut p = PhysicalParams::default();
        p.c_rate = 0.5;
        assert!((nondimensionalize(&p).unwrap().fourier - 28.8).abs() < 1e-12);
        p.c_rate = 1.0;
        p.radius = 200e-9;
        assert!((nondimensionalize(&p).unwrap().fourier - 0.9).abs() < 1e-12);
    }

    #[test]
    fn validation_names_the_field() {
        let mut p = PhysicalParams::default();
        p.poisson = 0.7;
        match nondimensionalize(&p) {
            Err(ParamError::OutOfRange { field, .. }) => assert_eq!(field, "poisson"),
            other => panic!("unexpected {other:?}"),
        }
        let mut p = PhysicalParams::default();
        p.diffusivity = f64::NAN;
        assert!(matches!(
            nondimensionalize(&p),
            Err(ParamError::NotFinite { field: "diffusivity", .. })
        ));
        let mut p = PhysicalParams::default();
        p.c_rate = 0.0;
        assert!(matches!(
            nondimensionalize(&p),
            Err(ParamError::NotPositive { field: "c_rate", .. })
        ));
    }

    #[test]
    fn round_trip_recovers_inputs() {
        let p = PhysicalParams {
            c_rate: 0.7,
            reference_potential: 0.1,
            ..PhysicalParams::default()
        };
        let back = nondimensionalize(&p).unwrap().redimensionalize(&p);
        let pairs = [
            (p.diffusivity, back.diffusivity),
            (p.youngs_modulus, back.youngs_modulus),
            (p.yield_max, back.yield_max),
            (p.yield_min, back.yield_min),
            (p.overstress_ref, back.overstress_ref),
            (p.hardening, back.hardening),
            (p.ref_strain_rate, back.ref_strain_rate),
            (p.molar_volume, back.molar_volume),
            (p.exchange_rate, back.exchange_rate),
            (p.c_rate, back.c_rate),
            (p.reference_potential, back.reference_potential),
        ];
        for (a, b) in pairs {
            assert!(((a - b) / a).abs() < 1e-12, "{a} vs {b}");
        }
    }
}
