//! Finite Gaussian mixture with exchangeable conjugate priors.
//!
//! y_i ~ Σ_j w_j N(μ_j, λ_j^{-1}), with μ_j ~ N(ζ, κ^{-1}), λ_j ~ Ga(α, β)
//! (shape, rate) and w ~ Dir(δ, ..., δ). The transition kernel is the
//! data-augmented Gibbs sweep z → w → λ → μ; the jump draws indicators for
//! new observations from their exact full conditional.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::engine::{DiagComponent, KernelSuite, Model};
use crate::error::{Result, SmcmcError};
use crate::params::{ChainState, ParameterVector};
use crate::rng::{aux_stream, ChainRng};
use crate::stats::{mean_sd, sample_log_categorical};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureHyper {
    pub k: usize,
    pub zeta: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

impl Default for MixtureHyper {
    fn default() -> Self {
        Self {
            k: 4,
            zeta: 0.0,
            kappa: 0.01,
            alpha: 1.0,
            beta: 2.0,
            delta: 1.0,
        }
    }
}

impl MixtureHyper {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(SmcmcError::Config("k must be at least 1".into()));
        }
        for (name, v) in [
            ("kappa", self.kappa),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("delta", self.delta),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SmcmcError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.zeta.is_finite() {
            return Err(SmcmcError::Config("zeta must be finite".into()));
        }
        Ok(())
    }
}

/// Mixture parameters without the latent indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureParams {
    pub mu: Vec<f64>,
    pub lambda: Vec<f64>,
    pub w: Vec<f64>,
}

impl MixtureParams {
    /// The four-component simulation truth: means (−3, 0, 3, 6), common
    /// standard deviation 0.55, equal weights.
    pub fn benchmark_truth() -> Self {
        Self {
            mu: vec![-3.0, 0.0, 3.0, 6.0],
            lambda: vec![0.55f64.powi(-2); 4],
            w: vec![0.25; 4],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.mu.len();
        if k == 0 || self.lambda.len() != k || self.w.len() != k {
            return Err(SmcmcError::Config(
                "mu, lambda and w must have the same nonzero length".into(),
            ));
        }
        if self.lambda.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(SmcmcError::Config("lambda entries must be positive".into()));
        }
        if self.w.iter().any(|&w| !(w >= 0.0)) || (self.w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(SmcmcError::Config("w must lie on the simplex".into()));
        }
        Ok(())
    }
}

/// One chain: parameters plus one indicator per observation seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureState {
    pub mu: Vec<f64>,
    pub lambda: Vec<f64>,
    pub w: Vec<f64>,
    /// Zero-based component labels.
    pub z: Vec<usize>,
}

impl MixtureState {
    pub fn params(&self) -> MixtureParams {
        MixtureParams {
            mu: self.mu.clone(),
            lambda: self.lambda.clone(),
            w: self.w.clone(),
        }
    }
}

impl ChainState for MixtureState {
    fn dim(&self) -> usize {
        3 * self.mu.len() + self.z.len()
    }

    fn component(&self, block: &str, index: usize) -> Option<f64> {
        match block {
            "mu" => self.mu.get(index).copied(),
            "lambda" => self.lambda.get(index).copied(),
            "w" => self.w.get(index).copied(),
            "z" => self.z.get(index).map(|&z| (z + 1) as f64),
            _ => None,
        }
    }

    /// Blocks `mu`, `lambda`, `w`, then `z` with one-based labels.
    fn to_params(&self) -> ParameterVector {
        let z = self.z.iter().map(|&z| (z + 1) as f64).collect();
        ParameterVector::from_blocks([
            ("mu", self.mu.clone()),
            ("lambda", self.lambda.clone()),
            ("w", self.w.clone()),
            ("z", z),
        ])
    }
}

/// `n` draws from the mixture with parameters `truth`.
pub fn simulate_data(truth: &MixtureParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    truth.validate()?;
    let mut rng = aux_stream(seed, 0);
    let logw: Vec<f64> = truth.w.iter().map(|w| w.ln()).collect();
    let mut scratch = Vec::new();
    Ok((0..n)
        .map(|_| {
            let j = sample_log_categorical(&logw, &mut scratch, &mut rng);
            let normal = Normal::new(truth.mu[j], truth.lambda[j].sqrt().recip()).expect("validated scale");
            normal.sample(&mut rng)
        })
        .collect())
}

fn log_responsibilities(mu: &[f64], lambda: &[f64], w: &[f64], y: f64, out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate() {
        let d = y - mu[j];
        *o = w[j].ln() + 0.5 * lambda[j].ln() - 0.5 * lambda[j] * d * d;
    }
}

/// P(z = j | μ, λ, w, y) for one observation.
pub fn responsibilities(state: &MixtureState, y: f64) -> Vec<f64> {
    let mut logp = vec![0.0; state.mu.len()];
    log_responsibilities(&state.mu, &state.lambda, &state.w, y, &mut logp);
    crate::stats::softmax(&logp)
}

/// Append one indicator per observation in `y_new`, drawn from its exact
/// full conditional. Existing indicators are untouched.
pub fn jump_new_indicators<R: Rng + ?Sized>(state: &mut MixtureState, y_new: &[f64], rng: &mut R) {
    let mut logp = vec![0.0; state.mu.len()];
    let mut scratch = Vec::with_capacity(state.mu.len());
    for &y in y_new {
        log_responsibilities(&state.mu, &state.lambda, &state.w, y, &mut logp);
        state.z.push(sample_log_categorical(&logp, &mut scratch, rng));
    }
}

/// One systematic Gibbs sweep over (z, w, λ, μ) given the data prefix `y`.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    state: &mut MixtureState,
    y: &[f64],
    hyper: &MixtureHyper,
    rng: &mut R,
) -> Result<()> {
    if y.is_empty() {
        return Err(SmcmcError::Contract(
            "Gibbs sweep needs at least one observation".into(),
        ));
    }
    if state.z.len() != y.len() {
        return Err(SmcmcError::Contract(format!(
            "state carries {} indicators for {} observations",
            state.z.len(),
            y.len()
        )));
    }
    sweep_unchecked(state, y, hyper, rng);
    Ok(())
}

fn sweep_unchecked<R: Rng + ?Sized>(state: &mut MixtureState, y: &[f64], hyper: &MixtureHyper, rng: &mut R) {
    let k = state.mu.len();
    let mut logp = vec![0.0; k];
    let mut scratch = Vec::with_capacity(k);
    for (zi, &yi) in state.z.iter_mut().zip(y) {
        log_responsibilities(&state.mu, &state.lambda, &state.w, yi, &mut logp);
        *zi = sample_log_categorical(&logp, &mut scratch, rng);
    }

    let mut count = vec![0usize; k];
    let mut sum = vec![0.0; k];
    let mut sq = vec![0.0; k];
    for (&zi, &yi) in state.z.iter().zip(y) {
        count[zi] += 1;
        sum[zi] += yi;
        let d = yi - state.mu[zi];
        sq[zi] += d * d;
    }

    let mut total = 0.0;
    for (wj, &c) in state.w.iter_mut().zip(&count) {
        let g = Gamma::new(hyper.delta + c as f64, 1.0).expect("positive shape");
        *wj = g.sample(rng);
        total += *wj;
    }
    for wj in state.w.iter_mut() {
        *wj /= total;
    }

    for j in 0..k {
        let shape = hyper.alpha + 0.5 * count[j] as f64;
        let rate = hyper.beta + 0.5 * sq[j];
        state.lambda[j] = Gamma::new(shape, rate.recip()).expect("positive").sample(rng);
    }

    for j in 0..k {
        let prec = hyper.kappa + count[j] as f64 * state.lambda[j];
        let mean = (hyper.kappa * hyper.zeta + state.lambda[j] * sum[j]) / prec;
        state.mu[j] = Normal::new(mean, prec.sqrt().recip())
            .expect("finite")
            .sample(rng);
    }
}

/// Unnormalized log posterior of (μ, λ, w) with the indicators summed out.
///
/// Returns negative infinity outside the support.
pub fn log_posterior(params: &MixtureParams, y: &[f64], hyper: &MixtureHyper) -> f64 {
    let k = params.mu.len();
    if params.lambda.iter().any(|&l| !(l > 0.0))
        || params.w.iter().any(|&w| !(w > 0.0))
        || params.lambda.len() != k
        || params.w.len() != k
    {
        return f64::NEG_INFINITY;
    }
    let mut lp = 0.0;
    for j in 0..k {
        let d = params.mu[j] - hyper.zeta;
        lp += -0.5 * hyper.kappa * d * d;
        lp += (hyper.alpha - 1.0) * params.lambda[j].ln() - hyper.beta * params.lambda[j];
        lp += (hyper.delta - 1.0) * params.w[j].ln();
    }
    lp + log_likelihood(params, y)
}

/// Σ_i log Σ_j w_j N(y_i; μ_j, λ_j^{-1}).
pub fn log_likelihood(params: &MixtureParams, y: &[f64]) -> f64 {
    let k = params.mu.len();
    let mut terms = vec![0.0; k];
    let mut lp = 0.0;
    for &yi in y {
        log_responsibilities(&params.mu, &params.lambda, &params.w, yi, &mut terms);
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = terms.iter().map(|t| (t - max).exp()).sum();
        lp += max + s.ln() - 0.5 * LN_2PI;
    }
    lp
}

/// How chains are initialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureInit {
    /// Means start at `center` plus Gaussian jitter; `None` draws them from
    /// the prior. λ and w are always drawn from the prior.
    pub center: Option<Vec<f64>>,
    pub jitter_var: f64,
}

impl Default for MixtureInit {
    fn default() -> Self {
        Self {
            center: None,
            jitter_var: 0.01,
        }
    }
}

impl MixtureInit {
    pub fn centered(center: Vec<f64>) -> Self {
        Self {
            center: Some(center),
            ..Self::default()
        }
    }
}

/// Draw (μ, λ, w) from the initial distribution with no indicators.
pub fn sample_initial<R: Rng + ?Sized>(
    hyper: &MixtureHyper,
    init: &MixtureInit,
    rng: &mut R,
) -> MixtureState {
    let k = hyper.k;
    let mu = match &init.center {
        Some(c) => {
            let jitter = Normal::new(0.0, init.jitter_var.sqrt()).expect("finite jitter");
            c.iter().map(|&m| m + jitter.sample(rng)).collect()
        }
        None => {
            let prior = Normal::new(hyper.zeta, hyper.kappa.sqrt().recip()).expect("finite");
            (0..k).map(|_| prior.sample(rng)).collect()
        }
    };
    let lam = Gamma::new(hyper.alpha, hyper.beta.recip()).expect("positive");
    let lambda = (0..k).map(|_| lam.sample(rng)).collect();
    let g = Gamma::new(hyper.delta, 1.0).expect("positive");
    let mut w: Vec<f64> = (0..k).map(|_| g.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    MixtureState {
        mu,
        lambda,
        w,
        z: Vec::new(),
    }
}

/// Lehmer code of the permutation that sorts `values` increasingly.
///
/// Two states share a code exactly when their means are in the same order.
pub fn ordering_code(values: &[f64]) -> u64 {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut code = 0u64;
    for i in 0..idx.len() {
        let smaller = idx[i + 1..].iter().filter(|&&j| j < idx[i]).count() as u64;
        code = code * (idx.len() - i) as u64 + smaller;
    }
    code
}

/// Ensemble estimate of each E[μ_j], sorted increasingly, with the sample
/// standard deviation of the sorted values.
pub fn sorted_mean_summary(states: &[MixtureState]) -> (Vec<f64>, f64) {
    let k = states.first().map_or(0, |s| s.mu.len());
    let mut means: Vec<f64> = (0..k)
        .map(|j| states.iter().map(|s| s.mu[j]).sum::<f64>() / states.len() as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let (_, sd) = mean_sd(&means);
    (means, sd)
}

/// Weighted-particle version of [`sorted_mean_summary`].
pub fn sorted_mean_summary_weighted(particles: &[MixtureParams], weights: &[f64]) -> (Vec<f64>, f64) {
    let k = particles.first().map_or(0, |p| p.mu.len());
    let mut means: Vec<f64> = (0..k)
        .map(|j| {
            particles
                .iter()
                .zip(weights)
                .map(|(p, w)| w * p.mu[j])
                .sum::<f64>()
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let (_, sd) = mean_sd(&means);
    (means, sd)
}

/// Average sorted-mean vectors over replicates and report the standard
/// deviation of the averages.
pub fn average_sorted_means(replicates: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let k = replicates.first().map_or(0, Vec::len);
    let avg: Vec<f64> = (0..k)
        .map(|j| replicates.iter().map(|r| r[j]).sum::<f64>() / replicates.len() as f64)
        .collect();
    let (_, sd) = mean_sd(&avg);
    (avg, sd)
}

/// Per-step mixture summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSummary {
    pub sorted_means: Vec<f64>,
    pub sd: f64,
    /// `ordering_code` of each chain's μ.
    pub order_codes: Vec<u64>,
    /// μ of the first chain.
    pub trace_mu: Vec<f64>,
}

/// Fraction of chains whose μ ordering at some step differs from their
/// ordering in the first summary.
pub fn label_switch_fraction(summaries: &[(usize, MixtureSummary)]) -> f64 {
    let Some(((_, first), rest)) = summaries.split_first() else {
        return 0.0;
    };
    let chains = first.order_codes.len();
    if chains == 0 {
        return 0.0;
    }
    let switched = (0..chains)
        .filter(|&l| rest.iter().any(|(_, s)| s.order_codes[l] != first.order_codes[l]))
        .count();
    switched as f64 / chains as f64
}

/// The mixture as an engine plug-in.
#[derive(Debug, Clone)]
pub struct MixtureModel {
    hyper: MixtureHyper,
    init: MixtureInit,
    data: Vec<f64>,
}

impl MixtureModel {
    pub fn new(hyper: MixtureHyper, init: MixtureInit) -> Result<Self> {
        hyper.validate()?;
        if let Some(c) = &init.center {
            if c.len() != hyper.k {
                return Err(SmcmcError::Config(format!(
                    "init center has {} entries for k = {}",
                    c.len(),
                    hyper.k
                )));
            }
        }
        if !(init.jitter_var >= 0.0 && init.jitter_var.is_finite()) {
            return Err(SmcmcError::Config("jitter_var must be non-negative".into()));
        }
        Ok(Self {
            hyper,
            init,
            data: Vec::new(),
        })
    }

    pub fn hyper(&self) -> &MixtureHyper {
        &self.hyper
    }

    pub fn init(&self) -> &MixtureInit {
        &self.init
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

impl KernelSuite for MixtureModel {
    type State = MixtureState;

    fn data_horizon(&self) -> usize {
        self.data.len()
    }

    fn jump(&self, state: &mut MixtureState, rng: &mut ChainRng) {
        let seen = state.z.len();
        jump_new_indicators(state, &self.data[seen..], rng);
    }

    fn transit(&self, state: &mut MixtureState, rng: &mut ChainRng) {
        debug_assert_eq!(state.z.len(), self.data.len());
        sweep_unchecked(state, &self.data, &self.hyper, rng);
    }

    fn diag_components(&self) -> Vec<DiagComponent> {
        ["mu", "lambda", "w"]
            .iter()
            .flat_map(|b| (0..self.hyper.k).map(move |j| DiagComponent::new(*b, j)))
            .collect()
    }
}

impl Model for MixtureModel {
    type Obs = f64;
    type Summary = MixtureSummary;

    fn sample_prior(&self, rng: &mut ChainRng) -> MixtureState {
        sample_initial(&self.hyper, &self.init, rng)
    }

    fn check_observation(&self, obs: &f64) -> std::result::Result<(), String> {
        if obs.is_finite() {
            Ok(())
        } else {
            Err(format!("non-finite observation {obs}"))
        }
    }

    fn extend(&mut self, batch: &[f64]) -> Result<()> {
        self.data.extend_from_slice(batch);
        Ok(())
    }

    fn summarize(&self, _t: usize, states: &[MixtureState]) -> Option<MixtureSummary> {
        let (sorted_means, sd) = sorted_mean_summary(states);
        Some(MixtureSummary {
            sorted_means,
            sd,
            order_codes: states.iter().map(|s| ordering_code(&s.mu)).collect(),
            trace_mu: states[0].mu.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state(mu: Vec<f64>, lambda: Vec<f64>, w: Vec<f64>) -> MixtureState {
        MixtureState {
            mu,
            lambda,
            w,
            z: Vec::new(),
        }
    }

    #[test]
    fn simulate_degenerate_and_point_mass() {
        let truth = MixtureParams {
            mu: vec![0.0],
            lambda: vec![1.0],
            w: vec![1.0],
        };
        let n = 4000;
        let y = simulate_data(&truth, n, 1).unwrap();
        let mean = y.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());

        let truth = MixtureParams {
            mu: vec![-100.0, 0.0, 3.0, 6.0],
            lambda: vec![1.0; 4],
            w: vec![1.0, 0.0, 0.0, 0.0],
        };
        let y = simulate_data(&truth, 500, 2).unwrap();
        assert!(y.iter().all(|&v| v < -80.0));
    }

    #[test]
    fn benchmark_truth_shape() {
        let y = simulate_data(&MixtureParams::benchmark_truth(), 100, 3).unwrap();
        assert_eq!(y.len(), 100);
        assert!(simulate_data(
            &MixtureParams {
                mu: vec![0.0],
                lambda: vec![1.0],
                w: vec![0.5]
            },
            1,
            0
        )
        .is_err());
    }

    #[test]
    fn point_mass_weights_jump_to_first() {
        let mut s = state(vec![0.0, 1.0, 2.0], vec![1.0; 3], vec![1.0, 0.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        jump_new_indicators(&mut s, &[5.0, -2.0, 10.0], &mut rng);
        assert_eq!(s.z, vec![0, 0, 0]);
    }

    #[test]
    fn midway_responsibilities_equal() {
        let s = state(vec![-1.0, 1.0, 7.0], vec![2.0; 3], vec![1.0 / 3.0; 3]);
        let r = responsibilities(&s, 0.0);
        assert_abs_diff_eq!(r[0], r[1], epsilon = 1e-12);
    }

    #[test]
    fn jump_keeps_existing_indicators() {
        let mut s = state(vec![-3.0, 3.0], vec![1.0; 2], vec![0.5; 2]);
        s.z = vec![1, 0, 1];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        jump_new_indicators(&mut s, &[-3.0, 3.0], &mut rng);
        assert_eq!(&s.z[..3], &[1, 0, 1]);
        assert_eq!(s.z.len(), 5);
    }

    #[test]
    fn empty_component_draws_from_prior() {
        // all indicators land on component 0, so component 1 is prior-only
        let hyper = MixtureHyper {
            k: 2,
            zeta: 1.5,
            kappa: 0.25,
            alpha: 3.0,
            beta: 2.0,
            delta: 1.0,
        };
        let y = [0.0];
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 40_000;
        let (mut mu_sum, mut lam_sum) = (0.0, 0.0);
        for _ in 0..n {
            let mut s = state(vec![0.0, 1e6], vec![1.0, 1e-12], vec![0.5, 0.5]);
            s.z = vec![0];
            sweep_unchecked(&mut s, &y, &hyper, &mut rng);
            assert_eq!(s.z, vec![0]);
            mu_sum += s.mu[1];
            lam_sum += s.lambda[1];
        }
        // prior means: zeta = 1.5 with sd 2, alpha / beta = 1.5 with sd sqrt(3)/2
        assert!((mu_sum / n as f64 - 1.5).abs() < 4.0 * 2.0 / (n as f64).sqrt());
        assert!((lam_sum / n as f64 - 1.5).abs() < 4.0 * 0.866 / (n as f64).sqrt());
    }

    #[test]
    fn sweep_contract_errors() {
        let hyper = MixtureHyper::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = sample_initial(&hyper, &MixtureInit::default(), &mut rng);
        assert!(matches!(
            gibbs_sweep(&mut s, &[], &hyper, &mut rng),
            Err(SmcmcError::Contract(_))
        ));
        assert!(matches!(
            gibbs_sweep(&mut s, &[1.0], &hyper, &mut rng),
            Err(SmcmcError::Contract(_))
        ));
    }

    #[test]
    fn sweep_keeps_simplex() {
        let hyper = MixtureHyper::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = simulate_data(&MixtureParams::benchmark_truth(), 50, 1).unwrap();
        let mut s = sample_initial(
            &hyper,
            &MixtureInit::centered(vec![-3.0, 0.0, 3.0, 6.0]),
            &mut rng,
        );
        jump_new_indicators(&mut s, &y, &mut rng);
        for _ in 0..50 {
            gibbs_sweep(&mut s, &y, &hyper, &mut rng).unwrap();
            assert!((s.w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(s.lambda.iter().all(|&l| l > 0.0));
        }
    }

    #[test]
    fn sorted_summary_hand_value() {
        let states = vec![state(vec![4.0, 3.0, 2.0, 1.0], vec![1.0; 4], vec![0.25; 4]); 3];
        let (m, sd) = sorted_mean_summary(&states);
        assert_eq!(m, vec![1.0, 2.0, 3.0, 4.0]);
        // sqrt(5/3)
        assert_abs_diff_eq!(sd, 1.290_994_448_735_805_6, epsilon = 1e-12);
    }

    #[test]
    fn ordering_codes() {
        assert_eq!(ordering_code(&[1.0, 2.0, 3.0, 4.0]), 0);
        assert_eq!(ordering_code(&[4.0, 3.0, 2.0, 1.0]), 23);
        assert_ne!(ordering_code(&[2.0, 1.0, 3.0, 4.0]), 0);
        let mut seen = std::collections::HashSet::new();
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for p in perms {
            let v: Vec<f64> = p.iter().map(|&i| i as f64).collect();
            assert!(seen.insert(ordering_code(&v)));
        }
    }

    #[test]
    fn log_posterior_support() {
        let hyper = MixtureHyper::default();
        let mut p = MixtureParams::benchmark_truth();
        assert!(log_posterior(&p, &[0.0, 1.0], &hyper).is_finite());
        p.lambda[0] = -1.0;
        assert_eq!(log_posterior(&p, &[0.0], &hyper), f64::NEG_INFINITY);
    }

    #[test]
    fn log_likelihood_single_normal() {
        let p = MixtureParams {
            mu: vec![1.0],
            lambda: vec![4.0],
            w: vec![1.0],
        };
        let expect = -0.5 * LN_2PI + 0.5 * 4.0f64.ln() - 0.5 * 4.0 * 0.25;
        assert_abs_diff_eq!(log_likelihood(&p, &[1.5]), expect, epsilon = 1e-12);
    }
}
