//! Gibbs sweep, site jump and prediction for the probit GP.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::cholesky::{lower_mul, lower_t_mul, sq_dist, sq_exp, CholeskyCache};
use super::GpState;
use crate::error::{Result, SmcmcError};
use crate::stats::{norm_cdf, sample_log_categorical, truncated_unit_normal};

fn check_horizon(state: &GpState, labels: &[bool], cache: &CholeskyCache) -> Result<()> {
    let t = state.f.len();
    if state.z.len() != t || labels.len() != t || cache.len() != t {
        return Err(SmcmcError::Contract(format!(
            "horizon mismatch: {} latent values, {} probit latents, {} labels, cache of {}",
            t,
            state.z.len(),
            labels.len(),
            cache.len()
        )));
    }
    if state.h >= cache.grid().len() {
        return Err(SmcmcError::Contract(format!(
            "grid index {} out of range",
            state.h
        )));
    }
    Ok(())
}

/// One sweep z → F → h.
pub fn gibbs_sweep_gp<R: Rng + ?Sized>(
    state: &mut GpState,
    labels: &[bool],
    cache: &CholeskyCache,
    rng: &mut R,
) -> Result<()> {
    check_horizon(state, labels, cache)?;
    sweep_unchecked(state, labels, cache, rng);
    Ok(())
}

pub(crate) fn sweep_unchecked<R: Rng + ?Sized>(
    state: &mut GpState,
    labels: &[bool],
    cache: &CholeskyCache,
    rng: &mut R,
) {
    if state.f.is_empty() {
        update_h(state, cache, rng);
        return;
    }
    for ((z, &f), &y) in state.z.iter_mut().zip(&state.f).zip(labels) {
        *z = truncated_unit_normal(f, y, rng);
    }
    update_f(state, cache, rng);
    update_h(state, cache, rng);
}

/// F | z, h ~ N((K⁻¹ + I)⁻¹ z, (K⁻¹ + I)⁻¹), drawn by perturbing a prior
/// sample: F = f₀ + K (K + I)⁻¹ (z − f₀ − e) with f₀ ~ N(0, K), e ~ N(0, I).
fn update_f<R: Rng + ?Sized>(state: &mut GpState, cache: &CholeskyCache, rng: &mut R) {
    let t = state.f.len();
    let sigma = cache.sigma2().sqrt();
    let corr = cache.corr(state.h);
    let noisy = cache.noisy(state.h);
    let xi: Vec<f64> = (0..2 * t).map(|_| StandardNormal.sample(rng)).collect();
    let mut f0 = Vec::with_capacity(t);
    lower_mul(corr.l(), &xi[..t], &mut f0);
    f0.iter_mut().for_each(|v| *v *= sigma);
    let resid: Vec<f64> = (0..t).map(|i| state.z[i] - f0[i] - xi[t + i]).collect();
    let mut a = Vec::with_capacity(t);
    let mut b = Vec::with_capacity(t);
    lower_mul(noisy.linv(), &resid, &mut a);
    lower_t_mul(noisy.linv(), &a, &mut b);
    lower_t_mul(corr.l(), &b, &mut a);
    lower_mul(corr.l(), &a, &mut b);
    let s2 = cache.sigma2();
    for i in 0..t {
        state.f[i] = f0[i] + s2 * b[i];
    }
}

/// Log weights of h | F under a uniform prior on the grid.
pub fn h_log_weights(f: &[f64], cache: &CholeskyCache) -> Vec<f64> {
    let mut w = Vec::with_capacity(f.len());
    (0..cache.grid().len())
        .map(|h| {
            let corr = cache.corr(h);
            lower_mul(corr.linv(), f, &mut w);
            let q: f64 = w.iter().map(|v| v * v).sum();
            -0.5 * corr.logdet() - 0.5 * q / cache.sigma2()
        })
        .collect()
}

fn update_h<R: Rng + ?Sized>(state: &mut GpState, cache: &CholeskyCache, rng: &mut R) {
    if cache.grid().len() == 1 {
        return;
    }
    let logw = h_log_weights(&state.f, cache);
    let mut scratch = Vec::with_capacity(logw.len());
    state.h = sample_log_categorical(&logw, &mut scratch, rng);
}

/// Mean and variance of f at design point `i` given f at the earlier points,
/// read off row `i` of the cached factor.
pub fn site_conditional(state: &GpState, i: usize, cache: &CholeskyCache) -> (f64, f64) {
    let corr = cache.corr(state.h);
    let mut w = Vec::with_capacity(i);
    lower_mul(corr.linv(), &state.f[..i], &mut w);
    let mean = corr.row(i).iter().zip(&w).map(|(b, v)| b * v).sum();
    let d = corr.diag(i);
    (mean, cache.sigma2() * d * d)
}

/// Append f and z for design point `state.f.len()`: start f at its
/// conditional prior mean, then alternate z | f, y and f | F, z for `rounds`
/// rounds.
pub fn jump_new_site<R: Rng + ?Sized>(
    state: &mut GpState,
    label: bool,
    cache: &CholeskyCache,
    rounds: usize,
    rng: &mut R,
) {
    let i = state.f.len();
    debug_assert!(cache.len() > i);
    let (mean, var) = site_conditional(state, i, cache);
    let post_var = 1.0 / (1.0 / var + 1.0);
    let mut f = mean;
    let mut z = 0.0;
    for _ in 0..rounds {
        z = truncated_unit_normal(f, label, rng);
        let post_mean = post_var * (mean / var + z);
        let e: f64 = StandardNormal.sample(rng);
        f = post_mean + post_var.sqrt() * e;
    }
    state.f.push(f);
    state.z.push(z);
}

/// P(y = 1 | x*) averaged over chains, each chain contributing
/// E[Φ(f(x*))] = Φ(m / √(1 + v)) under its GP conditional N(m, v).
pub fn predict(states: &[GpState], cache: &CholeskyCache, x_star: &[f64]) -> f64 {
    predict_many(states, cache, std::slice::from_ref(&x_star.to_vec()))[0]
}

/// `predict` at many points, sharing per-bandwidth work across chains.
pub fn predict_many(states: &[GpState], cache: &CholeskyCache, points: &[Vec<f64>]) -> Vec<f64> {
    let t = cache.len();
    let s2 = cache.sigma2();
    let jitter = cache.jitter();
    let mut used: Vec<usize> = states.iter().map(|s| s.h).collect();
    used.sort_unstable();
    used.dedup();
    // L⁻¹F for every chain
    let weights: Vec<Vec<f64>> = states
        .iter()
        .map(|s| {
            let mut w = Vec::with_capacity(t);
            lower_mul(cache.corr(s.h).linv(), &s.f[..t], &mut w);
            w
        })
        .collect();
    let mut cross = Vec::with_capacity(t);
    let mut b = Vec::with_capacity(t);
    points
        .iter()
        .map(|x| {
            let d2: Vec<f64> = cache.points().iter().map(|p| sq_dist(p, x)).collect();
            let mut total = 0.0;
            for &h in &used {
                let a = cache.grid()[h];
                cross.clear();
                cross.extend(d2.iter().map(|&s| sq_exp(a, s)));
                lower_mul(cache.corr(h).linv(), &cross, &mut b);
                let var = (s2 * (1.0 + jitter - b.iter().map(|v| v * v).sum::<f64>())).max(0.0);
                let scale = (1.0 + var).sqrt();
                for (s, w) in states.iter().zip(&weights) {
                    if s.h == h {
                        let m: f64 = b.iter().zip(w).map(|(x, y)| x * y).sum();
                        total += norm_cdf(m / scale);
                    }
                }
            }
            total / states.len() as f64
        })
        .collect()
}
