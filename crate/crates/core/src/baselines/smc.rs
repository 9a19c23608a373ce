use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::engine::ScheduleConfig;
use crate::error::{Result, SmcmcError};
use crate::mixture::{
    log_likelihood, log_posterior, sample_initial, sorted_mean_summary_weighted, MixtureHyper, MixtureInit,
    MixtureParams,
};
use crate::par::{self, ExecPolicy};
use crate::rng::{aux_stream, split_streams, ChainRng};
use crate::stats::mean_sd;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmcConfig {
    /// Resample when ESS falls below this fraction of N.
    pub ess_threshold: f64,
    /// Metropolis sweeps after each resampling.
    pub move_count: usize,
    /// Random-walk step as a multiple of the particle cloud's spread in
    /// each transformed block.
    pub step_scale: f64,
}

impl Default for SmcConfig {
    fn default() -> Self {
        Self {
            ess_threshold: 0.5,
            move_count: 5,
            step_scale: 1.0,
        }
    }
}

impl SmcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ess_threshold > 0.0 && self.ess_threshold <= 1.0) {
            return Err(SmcmcError::Config(format!(
                "ess_threshold must lie in (0, 1], got {}",
                self.ess_threshold
            )));
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(SmcmcError::Config("step_scale must be positive".into()));
        }
        Ok(())
    }
}

/// Weighted particles over (μ, λ, w).
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    pub particles: Vec<MixtureParams>,
    pub weights: Vec<f64>,
    rngs: Vec<ChainRng>,
}

impl ParticleSet {
    /// `n` particles from the initial distribution with equal weights.
    pub fn initial(hyper: &MixtureHyper, init: &MixtureInit, n: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(SmcmcError::Config(format!(
                "at least 2 particles are required, got {n}"
            )));
        }
        let mut rngs = split_streams(seed, n);
        let particles = rngs
            .iter_mut()
            .map(|rng| sample_initial(hyper, init, rng).params())
            .collect();
        Ok(Self {
            particles,
            weights: vec![1.0 / n as f64; n],
            rngs,
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }
}

/// Effective sample size 1 / Σ w².
pub fn ess(weights: &[f64]) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}

/// `n` indices drawn independently with probabilities `weights`.
pub fn multinomial_resample<R: Rng + ?Sized>(weights: &[f64], n: usize, rng: &mut R) -> Vec<usize> {
    let mut cum = Vec::with_capacity(weights.len());
    let mut total = 0.0;
    for w in weights {
        total += w;
        cum.push(total);
    }
    (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            cum.partition_point(|&c| c <= u).min(weights.len() - 1)
        })
        .collect()
}

/// What one SMC step did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmcStepRecord {
    pub t: usize,
    pub horizon: usize,
    pub ess: f64,
    pub resampled: bool,
    /// Acceptance rate of the μ, log λ and weight-logit moves.
    pub acceptance: [f64; 3],
}

// Unconstrained coordinates: μ, log λ, and log(w_j / w_k) for j < k.
fn to_unconstrained(p: &MixtureParams) -> [Vec<f64>; 3] {
    let k = p.w.len();
    let last = p.w[k - 1].ln();
    [
        p.mu.clone(),
        p.lambda.iter().map(|l| l.ln()).collect(),
        p.w[..k - 1].iter().map(|w| w.ln() - last).collect(),
    ]
}

fn from_unconstrained(u: &[Vec<f64>; 3]) -> MixtureParams {
    let max = u[2].iter().copied().fold(0.0, f64::max);
    let mut w: Vec<f64> = u[2].iter().map(|a| (a - max).exp()).collect();
    w.push((-max).exp());
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    MixtureParams {
        mu: u[0].clone(),
        lambda: u[1].iter().map(|v| v.exp()).collect(),
        w,
    }
}

// Posterior density in the unconstrained coordinates: the log-λ map
// contributes Π λ_j and the additive log-ratio map Π w_j.
fn log_target(p: &MixtureParams, y: &[f64], hyper: &MixtureHyper) -> f64 {
    let lp = log_posterior(p, y, hyper);
    if !lp.is_finite() {
        return f64::NEG_INFINITY;
    }
    lp + p.lambda.iter().map(|l| l.ln()).sum::<f64>() + p.w.iter().map(|w| w.ln()).sum::<f64>()
}

fn cloud_scales(particles: &[MixtureParams], step_scale: f64) -> [f64; 3] {
    let coords: Vec<[Vec<f64>; 3]> = particles.iter().map(to_unconstrained).collect();
    let mut out = [0.0; 3];
    for (b, o) in out.iter_mut().enumerate() {
        let len = coords[0][b].len();
        if len == 0 {
            continue;
        }
        let sd = (0..len)
            .map(|j| mean_sd(&coords.iter().map(|c| c[b][j]).collect::<Vec<_>>()).1)
            .sum::<f64>()
            / len as f64;
        *o = step_scale * sd.max(1e-2) * 2.38 / (len as f64).sqrt();
    }
    out
}

fn mh_sweep<R: Rng + ?Sized>(
    p: &mut MixtureParams,
    y: &[f64],
    hyper: &MixtureHyper,
    scales: &[f64; 3],
    accepted: &mut [usize; 3],
    rng: &mut R,
) {
    let mut u = to_unconstrained(p);
    let mut current = log_target(p, y, hyper);
    for b in 0..3 {
        if u[b].is_empty() {
            continue;
        }
        let mut prop = u.clone();
        for v in prop[b].iter_mut() {
            let e: f64 = StandardNormal.sample(rng);
            *v += scales[b] * e;
        }
        let cand = from_unconstrained(&prop);
        let lt = log_target(&cand, y, hyper);
        let log_u = rng.random::<f64>().ln();
        if lt.is_finite() && log_u < lt - current {
            u = prop;
            current = lt;
            *p = cand;
            accepted[b] += 1;
        }
    }
}

/// Reweight by the new batch, and when the effective sample size drops
/// below `ess_threshold · N` resample and move every particle with
/// `move_count` Metropolis sweeps targeting the posterior given `y_all`
/// (which already includes the batch).
#[allow(clippy::too_many_arguments)]
pub fn smc_step(
    ps: &mut ParticleSet,
    batch: &[f64],
    y_all: &[f64],
    hyper: &MixtureHyper,
    config: &SmcConfig,
    step: usize,
    resample_rng: &mut ChainRng,
    policy: ExecPolicy,
) -> Result<SmcStepRecord> {
    let incr = par::map(policy, &ps.particles, |p| log_likelihood(p, batch));
    let logw: Vec<f64> = ps.weights.iter().zip(&incr).map(|(w, l)| w.ln() + l).collect();
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(SmcmcError::DegenerateWeights { step });
    }
    let raw: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(SmcmcError::DegenerateWeights { step });
    }
    ps.weights = raw.into_iter().map(|w| w / total).collect();
    let n = ps.len();
    let e = ess(&ps.weights);
    let mut record = SmcStepRecord {
        t: step,
        horizon: y_all.len(),
        ess: e,
        resampled: false,
        acceptance: [0.0; 3],
    };
    if e < config.ess_threshold * n as f64 {
        let idx = multinomial_resample(&ps.weights, n, resample_rng);
        ps.particles = idx.iter().map(|&i| ps.particles[i].clone()).collect();
        ps.weights = vec![1.0 / n as f64; n];
        let scales = cloud_scales(&ps.particles, config.step_scale);
        let mut counts = vec![[0usize; 3]; n];
        let moves = config.move_count;
        let mut work: Vec<(MixtureParams, [usize; 3])> =
            ps.particles.drain(..).zip(counts.drain(..)).collect();
        par::for_each_zip(policy, &mut work, &mut ps.rngs, |(p, acc), rng| {
            for _ in 0..moves {
                mh_sweep(p, y_all, hyper, &scales, acc, rng);
            }
        });
        let mut acc = [0usize; 3];
        for (p, a) in work {
            ps.particles.push(p);
            for b in 0..3 {
                acc[b] += a[b];
            }
        }
        let denom = (n * moves).max(1) as f64;
        record.resampled = true;
        record.acceptance = [
            acc[0] as f64 / denom,
            acc[1] as f64 / denom,
            acc[2] as f64 / denom,
        ];
    }
    Ok(record)
}

/// Result of streaming data through the SMC sampler.
#[derive(Debug, Clone)]
pub struct SmcReport {
    pub steps: Vec<SmcStepRecord>,
    /// Weighted sorted means and their sd after each step.
    pub summaries: Vec<(usize, Vec<f64>, f64)>,
    pub particles: ParticleSet,
}

/// Run the SMC sampler over `data`, batched as in `sched`.
#[allow(clippy::too_many_arguments)]
pub fn run_smc(
    data: &[f64],
    hyper: &MixtureHyper,
    init: &MixtureInit,
    config: &SmcConfig,
    sched: &ScheduleConfig,
    particles: usize,
    seed: u64,
    policy: ExecPolicy,
) -> Result<SmcReport> {
    hyper.validate()?;
    config.validate()?;
    sched.validate()?;
    if data.is_empty() {
        return Err(SmcmcError::Config("data source yielded no batches".into()));
    }
    let mut ps = ParticleSet::initial(hyper, init, particles, seed)?;
    let mut resample_rng = aux_stream(seed, 1);
    let mut steps = Vec::new();
    let mut summaries = Vec::new();
    let mut offset = 0;
    for (i, size) in sched.partition(data.len()).into_iter().enumerate() {
        let batch = &data[offset..offset + size];
        offset += size;
        if let Some(bad) = batch.iter().find(|y| !y.is_finite()) {
            return Err(SmcmcError::Observation {
                step: i + 1,
                message: format!("non-finite observation {bad}"),
            });
        }
        let rec = smc_step(
            &mut ps,
            batch,
            &data[..offset],
            hyper,
            config,
            i + 1,
            &mut resample_rng,
            policy,
        )?;
        let (means, sd) = sorted_mean_summary_weighted(&ps.particles, &ps.weights);
        summaries.push((i + 1, means, sd));
        steps.push(rec);
    }
    Ok(SmcReport {
        steps,
        summaries,
        particles: ps,
    })
}
