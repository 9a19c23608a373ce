use crate::engine::{advance_step, init_ensemble, EngineOptions, Ensemble, Model, ScheduleConfig, StopRule};
use crate::error::{Result, SmcmcError};
use crate::par::ExecPolicy;

/// `chains` independent chains that see the whole data set at once: the
/// jump fills in every data-dependent block from its conditional, then each
/// chain runs `iterations` transition sweeps.
pub fn parallel_mcmc<M: Model>(
    model: &mut M,
    data: &[M::Obs],
    iterations: usize,
    chains: usize,
    seed: u64,
    policy: ExecPolicy,
) -> Result<Ensemble<M::State>> {
    if iterations < 1 {
        return Err(SmcmcError::Config("MCMC needs at least one iteration".into()));
    }
    if data.is_empty() {
        return Err(SmcmcError::Config("MCMC needs a nonempty data set".into()));
    }
    for obs in data {
        model
            .check_observation(obs)
            .map_err(|message| SmcmcError::Observation { step: 1, message })?;
    }
    let mut ens = init_ensemble(|rng| model.sample_prior(rng), chains, seed)?;
    model.extend(data)?;
    let opts = EngineOptions {
        policy,
        stop: StopRule::Fixed(iterations + 1),
        check_jump_locality: false,
    };
    advance_step(&mut ens, model, &ScheduleConfig::default(), &opts)?;
    Ok(ens)
}
