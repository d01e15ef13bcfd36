//! Double expansion of the ground-state energy in the field `B` and the
//! center-of-mass momentum `P`.

pub mod coefficients;
pub mod phase;
pub mod riccati;

pub use coefficients::{
    energy_coefficients, energy_series_eval, format_coefficient, PtTable, SeriesValue,
};
pub use phase::{phase_eval, phase_gradient, Angular, Monomial, PhaseTerm};
pub use riccati::{riccati_residual, sample_points, EffectivePerturbation, MagneticSign, OrderResidual};
