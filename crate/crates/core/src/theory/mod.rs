//! Exact verification of the convergence bounds on finite state spaces.
//!
//! Distances are computed by evolving distributions through explicit
//! transition matrices, so every bound is checked as an inequality between
//! exactly computed numbers. Rates use the unhalved normalization
//! ρ = max_x ‖T(x, ·) − π‖₁, under which ‖pT − π‖₁ ≤ ρ‖p − π‖₁ for all p.

mod chain;
mod checks;
mod instances;
mod posterior;
mod suite;

pub use chain::{dobrushin, l1_distance, minorization, uniform_rho, v_norm, FiniteChain};
pub use checks::{
    check_dobrushin_dominance, check_drift, check_minorization_tightness, check_universal, drift_bound,
    smcmc_bound_check, spectral_acf_check, stationary_acf, v_norm_check, v_rate, DriftCertificate, Outcome,
    SmcmcInstance, SmcmcOutcome, SpectralOutcome, VCertificate, ORTHOGONAL_SHARE, SPECTRAL_TOL, TOL,
};
pub use instances::{
    dirichlet, drifting_sequence, random_chain, random_distribution, random_function,
    random_reversible_chain, search_drift_certificate, search_v_certificate,
};
pub use posterior::{
    discrete_posterior_drift, hellinger_normal, l1_normal, mixture_grid_drift, normal_mean_drift,
    power_law_slope,
};
pub use suite::{run_suite, CheckReport, BOUND_SUITES, SUITES};
