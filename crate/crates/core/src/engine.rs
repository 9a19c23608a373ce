//! The sequential sampler: L chains that each take one jump when new data
//! arrive and then repeated transition sweeps until the cross-chain lag
//! correlation of the monitored components falls to `1 - epsilon`.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{cross_chain_acf, AcfSnapshot};
use crate::error::{Result, SmcmcError};
use crate::par::{self, ExecPolicy};
use crate::params::ChainState;
use crate::rng::{split_streams, ChainRng};

/// Adaptive schedule for the number of sweeps per data step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Stop once the lag correlation is at most `1 - epsilon`.
    pub epsilon: f64,
    /// Upper bound on m_t (states per step, counting the post-jump state).
    pub m_cap: usize,
    /// Lower bound on m_t.
    pub m_min: usize,
    /// Evaluate the correlation every `diag_stride` sweeps.
    pub diag_stride: usize,
    /// Observations per data step; the last entry repeats until the data
    /// run out, and the final batch may be short.
    pub batch_sizes: Vec<usize>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            m_cap: 2000,
            m_min: 2,
            diag_stride: 1,
            batch_sizes: vec![1],
        }
    }
}

impl ScheduleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(SmcmcError::Config(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.m_min < 1 {
            return Err(SmcmcError::Config("m_min must be at least 1".into()));
        }
        if self.m_min > self.m_cap {
            return Err(SmcmcError::Config(format!(
                "m_min ({}) exceeds m_cap ({})",
                self.m_min, self.m_cap
            )));
        }
        if self.diag_stride < 1 {
            return Err(SmcmcError::Config("diag_stride must be at least 1".into()));
        }
        if self.batch_sizes.is_empty() {
            return Err(SmcmcError::Config("batch_sizes must not be empty".into()));
        }
        if self.batch_sizes.contains(&0) {
            return Err(SmcmcError::Config(
                "batch_sizes entries must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Split `n` observations into step sizes.
    pub fn partition(&self, n: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut left = n;
        let mut i = 0;
        while left > 0 {
            let b = self.batch_sizes[i.min(self.batch_sizes.len() - 1)].min(left);
            out.push(b);
            left -= b;
            i += 1;
        }
        out
    }
}

/// When to stop sweeping within a data step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum StopRule {
    /// Cross-chain lag correlation against the post-jump states.
    #[default]
    Adaptive,
    /// Exactly this many states per step (so `m - 1` sweeps), no diagnostics.
    Fixed(usize),
}

/// A monitored scalar: component `index` of block `block`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagComponent {
    pub block: String,
    pub index: usize,
}

impl DiagComponent {
    pub fn new(block: impl Into<String>, index: usize) -> Self {
        Self {
            block: block.into(),
            index,
        }
    }
}

/// The pair of kernels for the current data step.
///
/// `jump` must leave every pre-existing block untouched and only append the
/// new ones; `transit` must leave the current posterior invariant and keep
/// the dimension fixed.
pub trait KernelSuite: Sync {
    type State: ChainState;

    /// Number of observations the kernels condition on.
    fn data_horizon(&self) -> usize;

    fn jump(&self, state: &mut Self::State, rng: &mut ChainRng);

    fn transit(&self, state: &mut Self::State, rng: &mut ChainRng);

    fn diag_components(&self) -> Vec<DiagComponent>;
}

/// A model plug-in: prior, data ingestion and summaries on top of the kernels.
pub trait Model: KernelSuite {
    type Obs: Clone;
    type Summary: Clone + Serialize;

    fn sample_prior(&self, rng: &mut ChainRng) -> Self::State;

    /// Reject malformed observations before they reach the kernels.
    fn check_observation(&self, obs: &Self::Obs) -> std::result::Result<(), String>;

    /// Condition on one more batch; the horizon grows by `batch.len()`.
    fn extend(&mut self, batch: &[Self::Obs]) -> Result<()>;

    /// Summary of the ensemble after step `t` (`t = 0` is the initial draw).
    fn summarize(&self, t: usize, states: &[Self::State]) -> Option<Self::Summary>;
}

/// L chain states at a common step, plus their random streams.
#[derive(Debug, Clone)]
pub struct Ensemble<S> {
    states: Vec<S>,
    rngs: Vec<ChainRng>,
    t: usize,
    s: usize,
    horizon: usize,
    history: Vec<usize>,
}

impl<S: ChainState> Ensemble<S> {
    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn states_mut(&mut self) -> &mut [S] {
        &mut self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Data steps completed.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Index of the last state within the current step (m_t once complete).
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// m_1, ..., m_t.
    pub fn history(&self) -> &[usize] {
        &self.history
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |s| s.dim())
    }

    /// Apply `f` to every chain with its own stream.
    pub fn for_each_chain<F>(&mut self, policy: ExecPolicy, f: F)
    where
        F: Fn(&mut S, &mut ChainRng) + Sync + Send,
    {
        par::for_each_zip(policy, &mut self.states, &mut self.rngs, f);
    }

    fn snapshot(&self, comps: &[DiagComponent]) -> Result<AcfSnapshot> {
        let mut values = Vec::with_capacity(self.states.len() * comps.len());
        for state in &self.states {
            for c in comps {
                let v = state.component(&c.block, c.index).ok_or_else(|| {
                    SmcmcError::Contract(format!(
                        "diagnostic component {}[{}] missing from chain state",
                        c.block, c.index
                    ))
                })?;
                values.push(v);
            }
        }
        AcfSnapshot::new(self.states.len(), comps.len(), values)
    }
}

/// Draw `chains` states from the prior with streams split from `master_seed`.
pub fn init_ensemble<S, F>(prior: F, chains: usize, master_seed: u64) -> Result<Ensemble<S>>
where
    S: ChainState,
    F: Fn(&mut ChainRng) -> S,
{
    if chains < 2 {
        return Err(SmcmcError::Config(format!(
            "at least 2 chains are required, got {chains}"
        )));
    }
    let mut rngs = split_streams(master_seed, chains);
    let states = rngs.iter_mut().map(&prior).collect();
    Ok(Ensemble {
        states,
        rngs,
        t: 0,
        s: 1,
        horizon: 0,
        history: Vec::new(),
    })
}

/// One point of the lag-correlation curve within a step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FhatPoint {
    /// Sweeps since the jump.
    pub lag: usize,
    /// `None` when every monitored component had zero cross-chain variance.
    pub value: Option<f64>,
}

/// What happened during one data step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub horizon: usize,
    pub dim: usize,
    pub m_t: usize,
    pub cap_hit: bool,
    /// Number of diagnostic evaluations that came out undefined.
    pub undefined: usize,
    pub fhat: Vec<FhatPoint>,
    #[serde(skip)]
    pub elapsed: std::time::Duration,
}

/// Knobs that do not change the sampled values.
#[derive(Debug, Clone, Copy, Default)]
pub struct EngineOptions {
    pub policy: ExecPolicy,
    pub stop: StopRule,
    /// Compare pre- and post-jump states block by block (costly).
    pub check_jump_locality: bool,
}

/// Advance every chain through one data step.
pub fn advance_step<K>(
    ens: &mut Ensemble<K::State>,
    suite: &K,
    sched: &ScheduleConfig,
    opts: &EngineOptions,
) -> Result<StepRecord>
where
    K: KernelSuite,
{
    let started = std::time::Instant::now();
    let horizon = suite.data_horizon();
    if horizon <= ens.horizon && ens.t > 0 {
        return Err(SmcmcError::Contract(format!(
            "data horizon must grow: {} after {}",
            horizon, ens.horizon
        )));
    }
    let prev_dim = ens.dim();

    let before = opts
        .check_jump_locality
        .then(|| ens.states.iter().map(|s| s.to_params()).collect::<Vec<_>>());
    ens.for_each_chain(opts.policy, |state, rng| suite.jump(state, rng));
    if let Some(before) = before {
        for (l, (old, new)) in before.iter().zip(&ens.states).enumerate() {
            if !new.to_params().extends(old) {
                return Err(SmcmcError::Contract(format!(
                    "jump modified pre-existing blocks of chain {l}"
                )));
            }
        }
    }
    let dim = ens.dim();
    if dim < prev_dim || ens.states.iter().any(|s| s.dim() != dim) {
        return Err(SmcmcError::Contract(
            "chain dimensions diverged or shrank after the jump".into(),
        ));
    }

    let (m_t, cap_hit, undefined, fhat) = match opts.stop {
        StopRule::Fixed(m) => {
            let m = m.max(1);
            if m > 1 {
                ens.for_each_chain(opts.policy, |state, rng| {
                    for _ in 1..m {
                        suite.transit(state, rng);
                    }
                });
            }
            (m, false, 0, Vec::new())
        }
        StopRule::Adaptive => sweep_until_decorrelated(ens, suite, sched, opts.policy)?,
    };

    ens.t += 1;
    ens.s = m_t;
    ens.horizon = horizon;
    ens.history.push(m_t);
    if cap_hit {
        log::warn!(
            "step {}: sweep cap m_cap = {} reached before decorrelation",
            ens.t,
            sched.m_cap
        );
    }
    Ok(StepRecord {
        t: ens.t,
        horizon,
        dim,
        m_t,
        cap_hit,
        undefined,
        fhat,
        elapsed: started.elapsed(),
    })
}

fn sweep_until_decorrelated<K: KernelSuite>(
    ens: &mut Ensemble<K::State>,
    suite: &K,
    sched: &ScheduleConfig,
    policy: ExecPolicy,
) -> Result<(usize, bool, usize, Vec<FhatPoint>)> {
    let comps = suite.diag_components();
    if comps.is_empty() {
        return Err(SmcmcError::Contract("kernel suite monitors no components".into()));
    }
    let base = ens.snapshot(&comps)?;
    let threshold = 1.0 - sched.epsilon;
    let mut m_t = 1;
    let mut reached = false;
    let mut undefined = 0;
    let mut fhat = Vec::new();

    while m_t < sched.m_cap && !(reached && m_t >= sched.m_min) {
        let chunk = if reached {
            sched.m_min - m_t
        } else {
            sched.diag_stride.min(sched.m_cap - m_t)
        };
        ens.for_each_chain(policy, |state, rng| {
            for _ in 0..chunk {
                suite.transit(state, rng);
            }
        });
        m_t += chunk;
        if reached {
            continue;
        }
        let current = ens.snapshot(&comps)?;
        let value = cross_chain_acf(&base, &current)?;
        if value.is_none() {
            undefined += 1;
        }
        fhat.push(FhatPoint { lag: m_t - 1, value });
        // undefined correlation counts as fully correlated
        if value.unwrap_or(1.0) <= threshold {
            reached = true;
        }
    }
    Ok((m_t, !reached, undefined, fhat))
}

/// Result of streaming a data set through the sampler.
#[derive(Debug, Clone)]
pub struct RunReport<S, M> {
    pub steps: Vec<StepRecord>,
    /// `(t, summary)` pairs, including `t = 0` when the model reports it.
    pub summaries: Vec<(usize, M)>,
    pub ensemble: Ensemble<S>,
}

impl<S, M> RunReport<S, M> {
    /// Σ m_t over all steps.
    pub fn total_iterations(&self) -> usize {
        self.steps.iter().map(|s| s.m_t).sum()
    }
}

/// Feed `data` through `model` batch by batch, advancing the ensemble once
/// per batch.
pub fn run_stream<M, I>(
    data: I,
    model: &mut M,
    sched: &ScheduleConfig,
    chains: usize,
    seed: u64,
    opts: &EngineOptions,
) -> Result<RunReport<M::State, M::Summary>>
where
    M: Model,
    I: IntoIterator<Item = M::Obs>,
{
    sched.validate()?;
    let data: Vec<M::Obs> = data.into_iter().collect();
    if data.is_empty() {
        return Err(SmcmcError::Config("data source yielded no batches".into()));
    }
    let mut ens = init_ensemble(|rng| model.sample_prior(rng), chains, seed)?;
    let mut summaries = Vec::new();
    if let Some(s) = model.summarize(0, ens.states()) {
        summaries.push((0, s));
    }
    let mut steps = Vec::new();
    let mut offset = 0;
    for (i, size) in sched.partition(data.len()).into_iter().enumerate() {
        let step = i + 1;
        let batch = &data[offset..offset + size];
        offset += size;
        for obs in batch {
            model
                .check_observation(obs)
                .map_err(|message| SmcmcError::Observation { step, message })?;
        }
        model.extend(batch)?;
        let record = advance_step(&mut ens, model, sched, opts)?;
        if let Some(s) = model.summarize(step, ens.states()) {
            summaries.push((step, s));
        }
        steps.push(record);
    }
    Ok(RunReport {
        steps,
        summaries,
        ensemble: ens,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_validation() {
        let ok = ScheduleConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            ScheduleConfig {
                epsilon: 1.5,
                ..ok.clone()
            },
            ScheduleConfig {
                epsilon: 0.0,
                ..ok.clone()
            },
            ScheduleConfig {
                m_min: 0,
                ..ok.clone()
            },
            ScheduleConfig {
                m_min: 10,
                m_cap: 5,
                ..ok.clone()
            },
            ScheduleConfig {
                diag_stride: 0,
                ..ok.clone()
            },
            ScheduleConfig {
                batch_sizes: vec![],
                ..ok.clone()
            },
            ScheduleConfig {
                batch_sizes: vec![2, 0],
                ..ok.clone()
            },
        ] {
            assert!(matches!(bad.validate(), Err(SmcmcError::Config(_))), "{bad:?}");
        }
    }

    #[test]
    fn partition_repeats_last_and_truncates() {
        let s = ScheduleConfig {
            batch_sizes: vec![6],
            ..Default::default()
        };
        let p = s.partition(100);
        assert_eq!(p.len(), 17);
        assert_eq!(p.iter().sum::<usize>(), 100);
        assert_eq!(*p.last().unwrap(), 4);
        let s = ScheduleConfig {
            batch_sizes: vec![1, 2, 5],
            ..Default::default()
        };
        assert_eq!(s.partition(14), vec![1, 2, 5, 5, 1]);
    }
}
