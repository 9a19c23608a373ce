//! Small distribution helpers shared by the model plug-ins.

use libm::erfc;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Index drawn with probability proportional to `exp(logw[j])`.
///
/// `scratch` is overwritten; it avoids an allocation per draw.
pub fn sample_log_categorical<R: Rng + ?Sized>(logw: &[f64], scratch: &mut Vec<f64>, rng: &mut R) -> usize {
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scratch.clear();
    let mut total = 0.0;
    for &l in logw {
        total += (l - max).exp();
        scratch.push(total);
    }
    let u = rng.random::<f64>() * total;
    scratch.iter().position(|&c| u < c).unwrap_or(logw.len() - 1)
}

/// Normalized probabilities from log weights.
pub fn softmax(logw: &[f64]) -> Vec<f64> {
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logw.iter().map(|&l| (l - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Standard normal conditioned on exceeding `a`.
fn std_normal_above<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    if a <= 0.0 {
        loop {
            let x: f64 = StandardNormal.sample(rng);
            if x > a {
                return x;
            }
        }
    }
    // exponential proposal with the optimal rate (Robert, 1995)
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let u: f64 = rng.random();
        let x = a - (1.0 - u).ln() / rate;
        let v: f64 = rng.random();
        if v <= (-0.5 * (x - rate) * (x - rate)).exp() {
            return x;
        }
    }
}

/// N(mean, 1) truncated to (0, inf) when `positive`, else to (-inf, 0].
pub fn truncated_unit_normal<R: Rng + ?Sized>(mean: f64, positive: bool, rng: &mut R) -> f64 {
    if positive {
        mean + std_normal_above(-mean, rng)
    } else {
        let x = mean - std_normal_above(mean, rng);
        x.min(0.0)
    }
}

/// Sample mean and unbiased standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
