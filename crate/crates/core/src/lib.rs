//! Chemo-elasto-plastic diffusion and deformation of a spherical
//! amorphous-silicon particle under galvanostatic cycling.

pub mod autodiff;
pub mod checks;
pub mod chemistry;
pub mod constitutive;
pub mod fem1d;
pub mod params;
pub mod scalar;
pub mod scenario;
pub mod simulation;
pub mod tensor;
pub mod timestepper;
