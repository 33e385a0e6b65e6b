//! Second variation of the energy about saddle fields.

pub mod eta;
pub mod form;
pub mod probe;
pub mod spectrum;

pub use eta::{asymptotic_functional, hardy_margin, Dilated, Eta, EtaFamily, PiecewiseLinearEta};
pub use form::{
    instability_sweep, quadratic_form_yz, separable_form, sweep_limit, wedge_constant, Background, FormOptions,
    InstabilitySweep, Perturbation, QuadraticFormReport, Separable, SweepPoint,
};
pub use probe::{cone_vanishing_stability_probe, nodal_l2_squared, nodal_quadratic_form, ProbeReport};
pub use spectrum::{linearized_spectrum, Spectrum, SpectrumOptions, SpectrumReport, SymmetryClass};
