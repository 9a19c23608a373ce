//! Autocorrelation estimators that drive the adaptive sweep count, and the
//! tolerance-based choice of the stopping threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SmcmcError};

/// Diagnostic components of all chains at one sweep: an `L x p` matrix stored
/// row-major, row `l` holding chain `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfSnapshot {
    chains: usize,
    components: usize,
    values: Vec<f64>,
}

impl AcfSnapshot {
    pub fn new(chains: usize, components: usize, values: Vec<f64>) -> Result<Self> {
        if chains < 2 {
            return Err(SmcmcError::Contract(format!(
                "snapshot needs at least 2 chains, got {chains}"
            )));
        }
        if components < 1 {
            return Err(SmcmcError::Contract("snapshot needs at least 1 component".into()));
        }
        if values.len() != chains * components {
            return Err(SmcmcError::Contract(format!(
                "snapshot of {chains}x{components} given {} values",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SmcmcError::Contract("snapshot has non-finite entries".into()));
        }
        Ok(Self {
            chains,
            components,
            values,
        })
    }

    /// Build from per-chain rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != p) {
            return Err(SmcmcError::Contract("ragged snapshot rows".into()));
        }
        Self::new(rows.len(), p, rows.concat())
    }

    pub fn chains(&self) -> usize {
        self.chains
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn value(&self, chain: usize, component: usize) -> f64 {
        self.values[chain * self.components + component]
    }

    fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.chains).map(move |l| self.value(l, j))
    }
}

/// Pearson correlation of two equally long samples; `None` when either has
/// zero variance. The 1/L normalisation cancels between numerator and
/// denominator.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Cross-chain lag correlation: for each component, the Pearson correlation
/// across chains between `current` and `base`; the result is the maximum
/// over components whose correlation is defined, or `None` if none is.
pub fn cross_chain_acf(base: &AcfSnapshot, current: &AcfSnapshot) -> Result<Option<f64>> {
    if base.chains != current.chains || base.components != current.components {
        return Err(SmcmcError::Contract(format!(
            "snapshot shapes differ: {}x{} vs {}x{}",
            base.chains, base.components, current.chains, current.components
        )));
    }
    let mut best: Option<f64> = None;
    let mut xb = vec![0.0; base.chains];
    let mut xc = vec![0.0; base.chains];
    for j in 0..base.components {
        for (slot, v) in xb.iter_mut().zip(base.column(j)) {
            *slot = v;
        }
        for (slot, v) in xc.iter_mut().zip(current.column(j)) {
            *slot = v;
        }
        if let Some(r) = pearson(&xc, &xb) {
            best = Some(best.map_or(r, |b: f64| b.max(r)));
        }
    }
    Ok(best)
}

/// Within-chain lag-`lag` autocorrelation over sweeps `window.0..=window.1`,
/// maximised over components. `traces[j][s]` is component `j` at sweep `s`.
///
/// Terms reach back to sweep `s - lag`, so the window must start at or after
/// `lag`; the mean is taken over the window only.
pub fn single_chain_acf(traces: &[Vec<f64>], lag: usize, window: (usize, usize)) -> Result<Option<f64>> {
    let (s1, s2) = window;
    if s2 < s1 || s2 - s1 < lag + 1 {
        return Err(SmcmcError::Contract(format!(
            "window ({s1}, {s2}) too short for lag {lag}"
        )));
    }
    if s1 < lag {
        return Err(SmcmcError::Contract(format!(
            "window start {s1} precedes lag {lag}"
        )));
    }
    let mut best: Option<f64> = None;
    for trace in traces {
        if trace.len() <= s2 {
            return Err(SmcmcError::Contract(format!(
                "trace of length {} does not cover sweep {s2}",
                trace.len()
            )));
        }
        let w = &trace[s1..=s2];
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let denom: f64 = w.iter().map(|x| (x - mean) * (x - mean)).sum();
        if denom <= 0.0 {
            continue;
        }
        let num: f64 = (s1..=s2)
            .map(|s| (trace[s] - mean) * (trace[s - lag] - mean))
            .sum();
        let r = num / denom;
        best = Some(best.map_or(r, |b: f64| b.max(r)));
    }
    Ok(best)
}

/// Outcome of [`select_epsilon`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonChoice {
    pub epsilon: f64,
    /// True when even the smallest grid value violates the tolerance.
    pub saturated: bool,
}

const EPS_GRID: u64 = 1_000_000;

/// Σ_{t=1..n} ε^{n+1-t} / √t.
pub fn accumulated_error(n: usize, epsilon: f64) -> f64 {
    (1..=n)
        .map(|t| epsilon.powi((n + 1 - t) as i32) / (t as f64).sqrt())
        .sum()
}

/// Largest ε on the grid {k / 10^6 : 0 < k < 10^6} whose accumulated error
/// over `n` steps stays within `tolerance`.
pub fn select_epsilon(n: usize, tolerance: f64) -> Result<EpsilonChoice> {
    if n == 0 {
        return Err(SmcmcError::Config("n must be at least 1".into()));
    }
    if !(tolerance > 0.0) {
        return Err(SmcmcError::Config("tolerance must be positive".into()));
    }
    let grid = |k: u64| k as f64 / EPS_GRID as f64;
    let feasible = |k: u64| accumulated_error(n, grid(k)) <= tolerance;
    if !feasible(1) {
        return Ok(EpsilonChoice {
            epsilon: grid(1),
            saturated: true,
        });
    }
    // invariant: feasible(lo), !feasible(hi) or hi is past the grid
    let (mut lo, mut hi) = (1u64, EPS_GRID);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(EpsilonChoice {
        epsilon: grid(lo),
        saturated: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn col(v: &[f64]) -> AcfSnapshot {
        AcfSnapshot::new(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn identical_snapshots_correlate_perfectly() {
        let a = col(&[0.3, -1.0, 2.0, 5.0]);
        assert_eq!(cross_chain_acf(&a, &a).unwrap(), Some(1.0));
    }

    #[test]
    fn pearson_linear_and_reversed() {
        // direct Pearson on 4 points: (1,2,3,4) against (2,4,6,8) and (4,3,2,1)
        let base = col(&[1.0, 2.0, 3.0, 4.0]);
        let r = cross_chain_acf(&base, &col(&[2.0, 4.0, 6.0, 8.0]))
            .unwrap()
            .unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        let r = cross_chain_acf(&base, &col(&[4.0, 3.0, 2.0, 1.0]))
            .unwrap()
            .unwrap();
        assert!((r + 1.0).abs() < 1e-15);
    }

    #[test]
    fn undefined_when_all_components_flat() {
        let a = AcfSnapshot::new(3, 2, vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0]).unwrap();
        let b = AcfSnapshot::new(3, 2, vec![0.0, 1.0, 5.0, 1.0, 3.0, 1.0]).unwrap();
        assert_eq!(cross_chain_acf(&a, &b).unwrap(), None);
    }

    #[test]
    fn flat_component_is_skipped() {
        // component 0 flat, component 1 anti-correlated
        let a = AcfSnapshot::new(3, 2, vec![1.0, 1.0, 1.0, 2.0, 1.0, 3.0]).unwrap();
        let b = AcfSnapshot::new(3, 2, vec![1.0, 3.0, 1.0, 2.0, 1.0, 1.0]).unwrap();
        let r = cross_chain_acf(&a, &b).unwrap().unwrap();
        assert!((r + 1.0).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let a = col(&[1.0, 2.0, 3.0]);
        let b = col(&[1.0, 2.0]);
        assert!(matches!(cross_chain_acf(&a, &b), Err(SmcmcError::Contract(_))));
        assert!(AcfSnapshot::new(1, 1, vec![0.0]).is_err());
        assert!(AcfSnapshot::new(2, 1, vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn single_chain_constant_is_undefined() {
        let trace = vec![vec![2.0; 20]];
        assert_eq!(single_chain_acf(&trace, 1, (1, 19)).unwrap(), None);
    }

    #[test]
    fn single_chain_alternating_lag_one() {
        // (1,-1,1,-1,...) over an even window has mean 0 and every lag-1
        // product equal to -1, so the ratio is exactly -1
        let trace = vec![(0..41).map(|s| if s % 2 == 0 { 1.0 } else { -1.0 }).collect()];
        let r = single_chain_acf(&trace, 1, (1, 40)).unwrap().unwrap();
        assert!((r + 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_chain_window_too_short() {
        let trace = vec![vec![0.0, 1.0, 0.0, 1.0, 0.5]];
        assert!(single_chain_acf(&trace, 2, (2, 4)).is_err());
        assert!(single_chain_acf(&trace, 2, (1, 4)).is_err());
    }

    #[test]
    fn select_epsilon_single_term() {
        let c = select_epsilon(1, 0.5).unwrap();
        assert_eq!(c.epsilon, 0.5);
        assert!(!c.saturated);
    }

    #[test]
    fn select_epsilon_two_terms() {
        // oracle: plain bisection on eps^2 + eps/sqrt(2) = 0.5, independent of the grid code
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid + mid / 2f64.sqrt() <= 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // closed-form root of the quadratic agrees with the bisection
        let root = 0.5 * (-(0.5f64.sqrt()) + 2.5f64.sqrt());
        assert!((lo - root).abs() < 1e-12);
        let c = select_epsilon(2, 0.5).unwrap();
        assert!((c.epsilon - lo).abs() <= 1e-6, "{} vs {}", c.epsilon, lo);
    }

    #[test]
    fn select_epsilon_not_monotone_in_n() {
        // the sum's leading term is eps/sqrt(n), so at fixed tolerance the
        // feasible eps usually grows with n: n=1 gives exactly the tolerance,
        // n=2 solves eps/sqrt(2) + eps^2 = 0.01
        let a = select_epsilon(1, 0.01).unwrap().epsilon;
        let b = select_epsilon(2, 0.01).unwrap().epsilon;
        assert_eq!(a, 0.01);
        assert!((b - 0.01387).abs() < 2e-6, "{b}");
        // ...but not always: at tolerance 0.5 the second term pushes it down
        assert!(select_epsilon(2, 0.5).unwrap().epsilon < select_epsilon(1, 0.5).unwrap().epsilon);
    }

    #[test]
    fn select_epsilon_saturates() {
        let c = select_epsilon(10, 1e-9).unwrap();
        assert!(c.saturated);
        assert_eq!(c.epsilon, 1e-6);
        assert!(select_epsilon(0, 0.1).is_err());
        assert!(select_epsilon(3, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn cross_acf_symmetric(xs in proptest::collection::vec(-10.0f64..10.0, 8),
                               ys in proptest::collection::vec(-10.0f64..10.0, 8)) {
            let a = AcfSnapshot::new(4, 2, xs).unwrap();
            let b = AcfSnapshot::new(4, 2, ys).unwrap();
            let ab = cross_chain_acf(&a, &b).unwrap();
            let ba = cross_chain_acf(&b, &a).unwrap();
            match (ab, ba) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                (None, None) => {}
                _ => prop_assert!(false, "definedness differs"),
            }
        }

        #[test]
        fn cross_acf_positive_affine_invariant(xs in proptest::collection::vec(-10.0f64..10.0, 10),
                                               ys in proptest::collection::vec(-10.0f64..10.0, 10),
                                               scale in 0.1f64..10.0, shift in -5.0f64..5.0) {
            let a = AcfSnapshot::new(5, 2, xs).unwrap();
            let b = AcfSnapshot::new(5, 2, ys.clone()).unwrap();
            let b2 = AcfSnapshot::new(5, 2, ys.iter().map(|y| scale * y + shift).collect()).unwrap();
            let r1 = cross_chain_acf(&a, &b).unwrap();
            let r2 = cross_chain_acf(&a, &b2).unwrap();
            if let (Some(x), Some(y)) = (r1, r2) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn cross_acf_negative_scale_flips_sign(xs in proptest::collection::vec(-10.0f64..10.0, 6),
                                               ys in proptest::collection::vec(-10.0f64..10.0, 6),
                                               scale in 0.1f64..10.0) {
            let a = col(&xs);
            let r1 = cross_chain_acf(&a, &col(&ys)).unwrap();
            let flipped: Vec<f64> = ys.iter().map(|y| -scale * y).collect();
            let r2 = cross_chain_acf(&a, &col(&flipped)).unwrap();
            if let (Some(x), Some(y)) = (r1, r2) {
                prop_assert!((x + y).abs() < 1e-9);
            }
        }

        #[test]
        fn select_epsilon_nondecreasing_in_tolerance(n in 1usize..150, tol in 0.01f64..2.0, bump in 0.0f64..1.0) {
            let a = select_epsilon(n, tol).unwrap().epsilon;
            let b = select_epsilon(n, tol + bump).unwrap().epsilon;
            prop_assert!(b >= a);
        }
    }
}
