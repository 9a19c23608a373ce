//! Batch verification over random instances.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::checks::{
    check_dobrushin_dominance, check_drift, check_minorization_tightness, check_universal, smcmc_bound_check,
    spectral_acf_check, v_norm_check, Outcome,
};
use super::instances::{
    drifting_sequence, random_chain, random_distribution, random_function, random_reversible_chain,
    search_drift_certificate, search_v_certificate,
};
use super::posterior::{hellinger_normal, l1_normal, normal_mean_drift, power_law_slope};
use crate::error::{Result, SmcmcError};
use crate::par::{self, ExecPolicy};
use crate::rng::{chain_stream, ChainRng};

/// Aggregate over instances of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub instances: usize,
    /// Instances with at least one violated comparison.
    pub violations: usize,
    /// Instances whose hypothesis was degenerate (reported, not judged).
    pub flagged: usize,
    pub max_violation: f64,
    /// 5th, 50th and 95th percentiles of per-instance minimum margins.
    pub margin_p05: f64,
    pub margin_p50: f64,
    pub margin_p95: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn from_outcomes(name: &str, outcomes: &[Outcome]) -> Self {
        let mut margins: Vec<f64> = outcomes
            .iter()
            .filter(|o| !o.flagged)
            .map(|o| o.min_margin)
            .collect();
        margins.sort_by(f64::total_cmp);
        let pct = |p: f64| {
            if margins.is_empty() {
                f64::NAN
            } else {
                margins[((margins.len() - 1) as f64 * p).round() as usize]
            }
        };
        Self {
            name: name.to_string(),
            instances: outcomes.len(),
            violations: outcomes.iter().filter(|o| !o.flagged && !o.passed()).count(),
            flagged: outcomes.iter().filter(|o| o.flagged).count(),
            max_violation: outcomes.iter().map(|o| o.max_violation).fold(0.0, f64::max),
            margin_p05: pct(0.05),
            margin_p50: pct(0.5),
            margin_p95: pct(0.95),
        }
    }
}

/// Suites accepted by [`run_suite`].
pub const SUITES: &[&str] = &[
    "universal",
    "dobrushin",
    "drift",
    "smcmc",
    "vnorm",
    "spectral",
    "minorization",
    "hellinger",
    "posterior",
];

/// Suites that make up the exact bound checks.
pub const BOUND_SUITES: &[&str] = &["universal", "dobrushin", "drift", "smcmc", "vnorm", "spectral"];

fn instance_rng(seed: u64, suite: usize, i: usize) -> ChainRng {
    chain_stream(seed.wrapping_add((suite as u64 + 1) << 48), i as u64)
}

fn states<R: Rng + ?Sized>(rng: &mut R) -> usize {
    rng.random_range(4..=6)
}

fn collect<F>(policy: ExecPolicy, instances: usize, f: F) -> Result<Vec<Outcome>>
where
    F: Fn(usize) -> Result<Outcome> + Sync + Send,
{
    par::map_range(policy, instances, f).into_iter().collect()
}

/// Run one named suite (or `"all"`, or `"bounds"`) on `instances` random
/// instances derived from `seed`.
pub fn run_suite(name: &str, instances: usize, seed: u64, policy: ExecPolicy) -> Result<Vec<CheckReport>> {
    let names: Vec<&str> = match name {
        "all" => SUITES.to_vec(),
        "bounds" => BOUND_SUITES.to_vec(),
        other if SUITES.contains(&other) => vec![other],
        other => {
            return Err(SmcmcError::Config(format!(
                "unknown suite `{other}`; expected all, bounds or one of {}",
                SUITES.join(", ")
            )))
        }
    };
    let mut out = Vec::new();
    for n in names {
        out.extend(run_one(n, instances, seed, policy)?);
    }
    Ok(out)
}

fn run_one(name: &str, instances: usize, seed: u64, policy: ExecPolicy) -> Result<Vec<CheckReport>> {
    let id = SUITES.iter().position(|s| *s == name).expect("known suite");
    let rng_for = |i: usize| instance_rng(seed, id, i);
    let reports = match name {
        "universal" => {
            let o = collect(policy, instances, |i| {
                let mut rng = rng_for(i);
                let n = states(&mut rng);
                let chain = random_chain(n, &mut rng);
                let p0 = random_distribution(n, &mut rng);
                check_universal(&chain, &p0, 50)
            })?;
            vec![CheckReport::from_outcomes("universal", &o)]
        }
        "dobrushin" => {
            let o = collect(policy, instances, |i| {
                let mut rng = rng_for(i);
                let n = states(&mut rng);
                Ok(check_dobrushin_dominance(&random_chain(n, &mut rng)))
            })?;
            vec![CheckReport::from_outcomes("dobrushin", &o)]
        }
        "minorization" => {
            let o = collect(policy, instances, |i| {
                let mut rng = rng_for(i);
                let n = states(&mut rng);
                Ok(check_minorization_tightness(&random_chain(n, &mut rng)))
            })?;
            vec![CheckReport::from_outcomes("minorization", &o)]
        }
        "drift" => {
            let o = collect(policy, instances, |i| {
                let mut rng = rng_for(i);
                let n = states(&mut rng);
                let chain = random_chain(n, &mut rng);
                let p0 = random_distribution(n, &mut rng);
                let cert = search_drift_certificate(&chain, &p0, 10)
                    .ok_or_else(|| SmcmcError::InvalidCertificate("no drift certificate found".into()))?;
                check_drift(&chain, &cert, &p0, 30)
            })?;
            vec![CheckReport::from_outcomes("drift", &o)]
        }
        "smcmc" => {
            let triples = par::map_range(policy, instances, |i| {
                let mut rng = rng_for(i);
                let n = states(&mut rng);
                smcmc_bound_check(&drifting_sequence(n, 20, &mut rng))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let pick = |f: fn(&super::checks::SmcmcOutcome) -> &Outcome| {
                triples.iter().map(|t| f(t).clone()).collect::<Vec<_>>()
            };
            vec![
                CheckReport::from_outcomes("smcmc_full", &pick(|t| &t.full)),
                CheckReport::from_outcomes("smcmc_weak", &pick(|t| &t.weak)),
                CheckReport::from_outcomes("smcmc_ordering", &pick(|t| &t.ordering)),
            ]
        }
        "vnorm" => {
            let o = collect(policy, instances, |i| {
                let mut rng = rng_for(i);
                let n = states(&mut rng);
                let chain = random_chain(n, &mut rng);
                let p0 = random_distribution(n, &mut rng);
                let cert = search_v_certificate(&chain, 200, &mut rng)
                    .ok_or_else(|| SmcmcError::InvalidCertificate("no V-norm certificate found".into()))?;
                v_norm_check(&chain, &cert, &p0, 50)
            })?;
            vec![CheckReport::from_outcomes("vnorm", &o)]
        }
        "spectral" => {
            let o = collect(policy, instances, |i| {
                let mut rng = rng_for(i);
                let n = states(&mut rng);
                let chain = random_reversible_chain(n, &mut rng);
                let h = random_function(n, &mut rng);
                let s = spectral_acf_check(&chain, &h, 500)?;
                Ok(Outcome {
                    comparisons: 1,
                    violations: usize::from(!s.passed),
                    max_violation: if s.passed { 0.0 } else { s.rel_error },
                    min_margin: super::checks::SPECTRAL_TOL - s.rel_error,
                    flagged: s.flagged,
                })
            })?;
            vec![CheckReport::from_outcomes("spectral", &o)]
        }
        "hellinger" => {
            let o = collect(policy, instances, |i| {
                let mut rng = rng_for(i);
                let loc = Normal::new(0.0, 2.0).expect("finite");
                let (m1, m2) = (loc.sample(&mut rng), loc.sample(&mut rng));
                let s1 = rng.random_range(0.2..3.0);
                let s2 = rng.random_range(0.2..3.0);
                let h = hellinger_normal(m1, s1, m2, s2);
                let mut out = Outcome::default();
                out.record(l1_normal(m1, s1, m2, s2), 2.0 * std::f64::consts::SQRT_2 * h);
                out.record(2.0 * h * h, l1_normal(m1, s1, m2, s2));
                Ok(out)
            })?;
            vec![CheckReport::from_outcomes("hellinger", &o)]
        }
        "posterior" => {
            // one instance: the replicate-averaged drift curve of the
            // normal-mean model has a t^{-1/2} trend over t in [20, 200]
            let curves = par::map_range(policy, instances.max(1), |i| {
                let mut rng = rng_for(i);
                let theta = Normal::new(0.0, 1.0).expect("finite").sample(&mut rng);
                let noise = Normal::new(theta, 1.0).expect("finite");
                let y: Vec<f64> = (0..200).map(|_| noise.sample(&mut rng)).collect();
                normal_mean_drift(0.0, 1.0, 1.0, &y)
            });
            let avg: Vec<f64> = (0..200)
                .map(|t| curves.iter().map(|c| c[t]).sum::<f64>() / curves.len() as f64)
                .collect();
            let slope = power_law_slope(&avg, (20, 200));
            let mut out = Outcome::default();
            out.record((slope + 0.5).abs(), 0.2);
            let mut report = CheckReport::from_outcomes("posterior_rate", &[out]);
            report.instances = curves.len();
            vec![report]
        }
        _ => unreachable!("suite names validated above"),
    };
    Ok(reports)
}
