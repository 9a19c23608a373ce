//! Probit regression with a Gaussian-process prior on the latent function.
//!
//! y_i = I(z_i > 0), z_i = f(x_i) + N(0, 1), f ~ GP(0, σ² exp(−a²‖x − x′‖²))
//! with `a` on a discrete grid. Chains carry f and z at the observed sites
//! and the grid index of `a`; the shared [`CholeskyCache`] holds one factor
//! per grid value, grown by a row append as each site arrives.

mod cholesky;
mod grid;
mod sampler;

pub use cholesky::{lower_mul, lower_t_mul, sq_dist, sq_exp, CacheMode, CholeskyCache, Factor, PIVOT_FLOOR};
pub use grid::{build_grid, gamma_quantile, grid_probabilities, GridSpec};
pub use sampler::{gibbs_sweep_gp, h_log_weights, jump_new_site, predict, predict_many, site_conditional};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::engine::{DiagComponent, KernelSuite, Model};
use crate::error::{Result, SmcmcError};
use crate::params::{ChainState, ParameterVector};
use crate::rng::ChainRng;

/// One chain of the probit GP.
#[derive(Debug, Clone, PartialEq)]
pub struct GpState {
    /// f at the observed sites.
    pub f: Vec<f64>,
    /// Probit latents; positive exactly where the label is 1.
    pub z: Vec<f64>,
    /// Zero-based grid index of the inverse bandwidth.
    pub h: usize,
}

impl ChainState for GpState {
    fn dim(&self) -> usize {
        2 * self.f.len() + 1
    }

    fn component(&self, block: &str, index: usize) -> Option<f64> {
        match block {
            "f" => self.f.get(index).copied(),
            "z" => self.z.get(index).copied(),
            "h" if index == 0 => Some((self.h + 1) as f64),
            _ => None,
        }
    }

    /// Blocks `h` (one-based), then `f` and `z`.
    fn to_params(&self) -> ParameterVector {
        ParameterVector::from_blocks([
            ("h", vec![(self.h + 1) as f64]),
            ("f", self.f.clone()),
            ("z", self.z.clone()),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GpConfig {
    pub grid: GridSpec,
    /// Fixed kernel scale σ².
    pub sigma2: f64,
    /// Added to the correlation diagonal before factorization.
    pub jitter: f64,
    /// Alternations of z and f when a new site is appended.
    pub rounds: usize,
    /// f at the first `diag_sites` sites feed the stopping rule.
    pub diag_sites: usize,
    pub cache_mode: CacheMode,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            sigma2: 1.0,
            jitter: 1e-8,
            rounds: 1,
            diag_sites: 10,
            cache_mode: CacheMode::Incremental,
        }
    }
}

impl GpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds < 1 {
            return Err(SmcmcError::Config("rounds must be at least 1".into()));
        }
        if self.diag_sites < 1 {
            return Err(SmcmcError::Config("diag_sites must be at least 1".into()));
        }
        Ok(())
    }
}

/// One labelled covariate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpObs {
    pub x: Vec<f64>,
    pub y: bool,
}

/// Per-step GP summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpSummary {
    /// Chains per grid index.
    pub h_counts: Vec<usize>,
    /// Predictions at the configured points, when requested for this step.
    pub predictions: Option<Vec<f64>>,
}

/// The probit GP as an engine plug-in.
#[derive(Debug, Clone)]
pub struct GpModel {
    config: GpConfig,
    cache: CholeskyCache,
    labels: Vec<bool>,
    predict_steps: Vec<usize>,
    predict_points: Vec<Vec<f64>>,
}

impl GpModel {
    pub fn new(config: GpConfig) -> Result<Self> {
        config.validate()?;
        let grid = build_grid(&config.grid)?;
        let cache = CholeskyCache::new(grid, config.sigma2, config.jitter, config.cache_mode)?;
        Ok(Self {
            config,
            cache,
            labels: Vec::new(),
            predict_steps: Vec::new(),
            predict_points: Vec::new(),
        })
    }

    /// Report predictions at `points` after each step listed in `steps`.
    pub fn with_predictions(mut self, steps: Vec<usize>, points: Vec<Vec<f64>>) -> Self {
        self.predict_steps = steps;
        self.predict_points = points;
        self
    }

    pub fn config(&self) -> &GpConfig {
        &self.config
    }

    pub fn cache(&self) -> &CholeskyCache {
        &self.cache
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }
}

impl KernelSuite for GpModel {
    type State = GpState;

    fn data_horizon(&self) -> usize {
        self.labels.len()
    }

    fn jump(&self, state: &mut GpState, rng: &mut ChainRng) {
        for i in state.f.len()..self.labels.len() {
            jump_new_site(state, self.labels[i], &self.cache, self.config.rounds, rng);
        }
    }

    fn transit(&self, state: &mut GpState, rng: &mut ChainRng) {
        sampler::sweep_unchecked(state, &self.labels, &self.cache, rng);
    }

    fn diag_components(&self) -> Vec<DiagComponent> {
        let n = self.labels.len().min(self.config.diag_sites);
        (0..n).map(|i| DiagComponent::new("f", i)).collect()
    }
}

impl Model for GpModel {
    type Obs = GpObs;
    type Summary = GpSummary;

    fn sample_prior(&self, rng: &mut ChainRng) -> GpState {
        GpState {
            f: Vec::new(),
            z: Vec::new(),
            h: rng.random_range(0..self.cache.grid().len()),
        }
    }

    fn check_observation(&self, obs: &GpObs) -> std::result::Result<(), String> {
        if obs.x.is_empty() || obs.x.iter().any(|v| !v.is_finite()) {
            return Err("covariates must be nonempty and finite".into());
        }
        if let Some(p) = self.cache.points().first() {
            if p.len() != obs.x.len() {
                return Err(format!(
                    "covariate dimension {} differs from {}",
                    obs.x.len(),
                    p.len()
                ));
            }
        }
        Ok(())
    }

    fn extend(&mut self, batch: &[GpObs]) -> Result<()> {
        for obs in batch {
            self.cache.append(obs.x.clone())?;
            self.labels.push(obs.y);
        }
        Ok(())
    }

    fn summarize(&self, t: usize, states: &[GpState]) -> Option<GpSummary> {
        let mut h_counts = vec![0; self.cache.grid().len()];
        for s in states {
            h_counts[s.h] += 1;
        }
        let predictions = (self.predict_steps.contains(&t) && !self.predict_points.is_empty())
            .then(|| predict_many(states, &self.cache, &self.predict_points));
        Some(GpSummary {
            h_counts,
            predictions,
        })
    }
}

/// Shift and scale each covariate column to mean 0 and unit variance.
///
/// Returns the column means and standard deviations; constant columns are
/// only centred.
pub fn standardize(xs: &mut [Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = xs.first().map_or(0, Vec::len);
    let n = xs.len() as f64;
    let mut means = vec![0.0; d];
    let mut sds = vec![1.0; d];
    for j in 0..d {
        let m = xs.iter().map(|x| x[j]).sum::<f64>() / n;
        let var = xs.iter().map(|x| (x[j] - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        means[j] = m;
        if var > 0.0 {
            sds[j] = var.sqrt();
        }
        for x in xs.iter_mut() {
            x[j] = (x[j] - m) / sds[j];
        }
    }
    (means, sds)
}

/// Latent function of the synthetic probit benchmark on two covariates.
pub fn synthetic_latent(x: &[f64]) -> f64 {
    2.0 * (1.5 * x[0]).sin() + x[1] - 0.5 * x[0] * x[1]
}

/// `n` labelled points with covariates drawn N(0, I₂) and
/// y = I(synthetic_latent(x) + N(0, 1) > 0).
pub fn simulate_probit(n: usize, seed: u64) -> Vec<GpObs> {
    let mut rng = crate::rng::aux_stream(seed, 2);
    (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..2).map(|_| StandardNormal.sample(&mut rng)).collect();
            let e: f64 = StandardNormal.sample(&mut rng);
            let y = synthetic_latent(&x) + e > 0.0;
            GpObs { x, y }
        })
        .collect()
}
