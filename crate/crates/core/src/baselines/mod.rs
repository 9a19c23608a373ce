//! Comparison samplers: independent full-data MCMC chains and a
//! resample–move sequential Monte Carlo sampler for the mixture.

mod mcmc;
mod smc;

pub use mcmc::parallel_mcmc;
pub use smc::{
    ess, multinomial_resample, run_smc, smc_step, ParticleSet, SmcConfig, SmcReport, SmcStepRecord,
};
