//! Distances between normal laws and the drift of posteriors as data arrive.

use crate::stats::norm_cdf;

/// Hellinger distance between N(mu1, s1²) and N(mu2, s2²), normalized so
/// that H² = 1 − ∫√(pq) = ½∫(√p − √q)².
pub fn hellinger_normal(mu1: f64, s1: f64, mu2: f64, s2: f64) -> f64 {
    assert!(s1 > 0.0 && s2 > 0.0, "standard deviations must be positive");
    let v = s1 * s1 + s2 * s2;
    let bc = (2.0 * s1 * s2 / v).sqrt() * (-0.25 * (mu1 - mu2).powi(2) / v).exp();
    (1.0 - bc).max(0.0).sqrt()
}

/// ‖N(mu1, s1²) − N(mu2, s2²)‖₁ in closed form, from the set where the
/// first density exceeds the second.
pub fn l1_normal(mu1: f64, s1: f64, mu2: f64, s2: f64) -> f64 {
    assert!(s1 > 0.0 && s2 > 0.0, "standard deviations must be positive");
    if (s1 - s2).abs() <= 1e-14 * s1.max(s2) {
        let z = (mu1 - mu2).abs() / (2.0 * s1);
        return 2.0 * (2.0 * norm_cdf(z) - 1.0);
    }
    // put the narrower law first; the distance is symmetric
    let (m1, a, m2, b) = if s1 < s2 {
        (mu1, s1, mu2, s2)
    } else {
        (mu2, s2, mu1, s1)
    };
    // log p − log q = qa x² + qb x + qc, positive between the roots
    let qa = 0.5 / (b * b) - 0.5 / (a * a);
    let qb = m1 / (a * a) - m2 / (b * b);
    let qc = -0.5 * m1 * m1 / (a * a) + 0.5 * m2 * m2 / (b * b) - (a / b).ln();
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    let q = -0.5 * (qb + qb.signum() * disc);
    let (r1, r2) = {
        let x = q / qa;
        let y = if q != 0.0 { qc / q } else { -x };
        (x.min(y), x.max(y))
    };
    let mass = |m: f64, s: f64| norm_cdf((r2 - m) / s) - norm_cdf((r1 - m) / s);
    2.0 * (mass(m1, a) - mass(m2, b))
}

/// α_t = ½‖π_t − π_{t−1}‖₁ for t = 1..=n on a finite parameter set, where
/// π_t ∝ prior × Π_{i ≤ t} likelihood(θ, i).
pub fn discrete_posterior_drift<F>(log_prior: &[f64], n: usize, loglik: F) -> Vec<f64>
where
    F: Fn(usize, usize) -> f64,
{
    let normalize = |logp: &[f64]| crate::stats::softmax(logp);
    let mut logp = log_prior.to_vec();
    let mut prev = normalize(&logp);
    (0..n)
        .map(|i| {
            for (k, lp) in logp.iter_mut().enumerate() {
                *lp += loglik(k, i);
            }
            let cur = normalize(&logp);
            let a = 0.5 * cur.iter().zip(&prev).map(|(x, y)| (x - y).abs()).sum::<f64>();
            prev = cur;
            a
        })
        .collect()
}

/// α_t for the normal-mean model y_i ~ N(θ, sigma²), θ ~ N(m0, s0²), with
/// every posterior in closed form.
pub fn normal_mean_drift(m0: f64, s0: f64, sigma: f64, y: &[f64]) -> Vec<f64> {
    let mut prec = 1.0 / (s0 * s0);
    let mut mean = m0;
    let noise = 1.0 / (sigma * sigma);
    y.iter()
        .map(|&yi| {
            let next_prec = prec + noise;
            let next_mean = (prec * mean + noise * yi) / next_prec;
            let a = 0.5 * l1_normal(mean, prec.sqrt().recip(), next_mean, next_prec.sqrt().recip());
            prec = next_prec;
            mean = next_mean;
            a
        })
        .collect()
}

/// α_t for a two-component mixture with equal weights and known precision,
/// with both means on `grid` under independent N(zeta, 1/kappa) priors.
pub fn mixture_grid_drift(y: &[f64], grid: &[f64], lambda: f64, zeta: f64, kappa: f64) -> Vec<f64> {
    let g = grid.len();
    let log_prior: Vec<f64> = (0..g * g)
        .map(|k| {
            let (a, b) = (grid[k / g], grid[k % g]);
            -0.5 * kappa * ((a - zeta).powi(2) + (b - zeta).powi(2))
        })
        .collect();
    discrete_posterior_drift(&log_prior, y.len(), |k, i| {
        let (a, b) = (grid[k / g], grid[k % g]);
        let da = -0.5 * lambda * (y[i] - a).powi(2);
        let db = -0.5 * lambda * (y[i] - b).powi(2);
        let m = da.max(db);
        m + (0.5 * (da - m).exp() + 0.5 * (db - m).exp()).ln()
    })
}

/// Least-squares slope of log(value) on log(t) over `t` in `range`
/// (1-based steps).
pub fn power_law_slope(values: &[f64], range: (usize, usize)) -> f64 {
    let pts: Vec<(f64, f64)> = (range.0..=range.1.min(values.len()))
        .filter(|&t| values[t - 1] > 0.0)
        .map(|t| ((t as f64).ln(), values[t - 1].ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
