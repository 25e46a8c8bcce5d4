//! Numerical laboratory for viscous shock profiles and rarefaction waves of
//! one-dimensional convex scalar conservation laws `u_t + f(u)_x = ν u_xx`
//! under periodic perturbations.

pub mod ansatz;
pub mod cauchy;
pub mod error;
pub mod flux;
pub mod hopf;
pub mod numerics;
pub mod periodic;
pub mod profile;
pub mod rarefaction;
pub mod scheme;

pub use error::{LabError, Result};
pub use flux::{build_gap_flux, shock_speed, FluxKind, FluxModel, Order, StatePair};
pub use profile::{compute_profile, g_ratio_bounds, profile_at, ProfileOptions, ProfileTable};
pub use periodic::{
    antiderivative_period_average, evolve_periodic, excess_flux_time_integral, fit_decay,
    DecayFit, ExcessIntegral, ExcessOptions, Norm, PerturbationSpec, PeriodicField,
    PeriodicSettings, PeriodicTrajectory, Shape,
};
pub use scheme::TimeScheme;
pub use cauchy::{
    make_initial, make_riemann_initial, measure_shift, LineGrid, LineRun, LineSettings, LineSetup,
};
pub use hopf::{coincidence_check, hopf_eval, periodic_component_eval, HopfData, HopfInitial, Side};
pub use ansatz::{
    ansatz_eval, inviscid_shift, shift_formula, shift_rhs, solve_shift_ode, source_eval,
    viscosity_rate_study, AnsatzContext, InitialShape, RateStudy, ShiftOptions, ShiftReport,
    ShiftTrajectory, Traces,
};
pub use rarefaction::{rarefaction_eval, rarefaction_gap, GapSeries, RarefactionWave};
