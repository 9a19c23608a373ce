//! Exact checks of the convergence bounds on finite chains.
//!
//! Every check compares an exactly evolved distance against its bound and
//! records the margin `bound − exact`; a comparison with exact value above
//! the bound by more than [`TOL`] is a violation.

use nalgebra::{DVector, SymmetricEigen};
use serde::Serialize;

use super::chain::{dobrushin, l1_distance, minorization, uniform_rho, v_norm, FiniteChain};
use crate::error::{Result, SmcmcError};

/// Accumulated floating-point slack allowed in every comparison.
pub const TOL: f64 = 1e-12;

/// Result of one check on one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub comparisons: usize,
    pub violations: usize,
    /// Largest `exact − bound` among violations, 0 when none.
    pub max_violation: f64,
    /// Smallest `bound − exact`.
    pub min_margin: f64,
    /// Set when the check's hypothesis is degenerate for this instance.
    pub flagged: bool,
}

impl Default for Outcome {
    fn default() -> Self {
        Self {
            comparisons: 0,
            violations: 0,
            max_violation: 0.0,
            min_margin: f64::INFINITY,
            flagged: false,
        }
    }
}

impl Outcome {
    pub fn record(&mut self, exact: f64, bound: f64) {
        self.comparisons += 1;
        let margin = bound - exact;
        self.min_margin = self.min_margin.min(margin);
        if margin < -TOL {
            self.violations += 1;
            self.max_violation = self.max_violation.max(-margin);
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn require_contraction(chain: &FiniteChain) -> Result<f64> {
    let rho = uniform_rho(chain);
    if rho >= 1.0 {
        return Err(SmcmcError::Contract(format!(
            "chain is not a uniform contraction (rho = {rho})"
        )));
    }
    Ok(rho)
}

/// ‖p₀Tᵗ − π‖₁ ≤ ρᵗ‖p₀ − π‖₁ for t = 1..t_max.
pub fn check_universal(chain: &FiniteChain, p0: &DVector<f64>, t_max: usize) -> Result<Outcome> {
    let rho = require_contraction(chain)?;
    let pi = chain.stationary();
    let d0 = l1_distance(p0, pi);
    let mut q = p0.clone();
    let mut out = Outcome::default();
    for t in 1..=t_max {
        q = chain.step(&q);
        out.record(l1_distance(&q, pi), rho.powi(t as i32) * d0);
    }
    Ok(out)
}

/// max_x ‖T(x, ·) − π‖₁ ≤ max_{x,y} ‖T(x, ·) − T(y, ·)‖₁.
pub fn check_dobrushin_dominance(chain: &FiniteChain) -> Outcome {
    let mut out = Outcome::default();
    out.record(uniform_rho(chain), dobrushin(chain));
    out
}

/// max_x ‖T(x, ·) − π‖₁ ≤ 2ρ_m for the best minorization constant ρ_m.
pub fn check_minorization_tightness(chain: &FiniteChain) -> Outcome {
    let (rho_m, _) = minorization(chain);
    let mut out = Outcome {
        flagged: rho_m >= 1.0,
        ..Outcome::default()
    };
    out.record(uniform_rho(chain), 2.0 * rho_m);
    out
}

/// Drift-and-local-contraction certificate: on the small set C rows are
/// within ρ of π in L1, and TV ≤ λV + b·1_C everywhere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftCertificate {
    pub v: Vec<f64>,
    pub small_set: Vec<bool>,
    pub rho: f64,
    pub lambda: f64,
    pub b: f64,
}

impl DriftCertificate {
    pub fn validate(&self, chain: &FiniteChain) -> Result<()> {
        let n = chain.size();
        let bad = |m: String| Err(SmcmcError::InvalidCertificate(m));
        if self.v.len() != n || self.small_set.len() != n {
            return bad("certificate has the wrong number of states".into());
        }
        if self.v.iter().any(|&v| !(v >= 1.0 && v.is_finite())) {
            return bad("V must be finite and at least 1".into());
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return bad(format!("lambda = {} outside (0, 1)", self.lambda));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return bad(format!("b = {} must be non-negative", self.b));
        }
        if !(self.rho >= 0.0 && self.rho < 1.0) {
            return bad(format!("rho = {} outside [0, 1)", self.rho));
        }
        let rows = chain.row_distances();
        let tv = chain.matrix() * DVector::from_column_slice(&self.v);
        for x in 0..n {
            if self.small_set[x] && rows[x] > self.rho + TOL {
                return bad(format!("row {x} in C is {} from pi, above rho", rows[x]));
            }
            let cap = self.lambda * self.v[x] + if self.small_set[x] { self.b } else { 0.0 };
            if tv[x] > cap + TOL * (1.0 + self.v[x]) {
                return bad(format!("drift fails at state {x}: {} > {}", tv[x], cap));
            }
        }
        Ok(())
    }

    /// ρʲ + λᵗBʲ⁻¹V̄ with B = 1 + b/λ and V̄ = Σ V p₀.
    pub fn bound(&self, p0: &DVector<f64>, t: usize, j: usize) -> f64 {
        let vbar: f64 = self.v.iter().zip(p0.iter()).map(|(v, p)| v * p).sum();
        let big_b = 1.0 + self.b / self.lambda;
        self.rho.powi(j as i32) + self.lambda.powi(t as i32) * big_b.powi(j as i32 - 1) * vbar
    }
}

/// The drift bound at (t, j) after validating the certificate.
pub fn drift_bound(
    chain: &FiniteChain,
    cert: &DriftCertificate,
    p0: &DVector<f64>,
    t: usize,
    j: usize,
) -> Result<f64> {
    cert.validate(chain)?;
    if j < 1 || j > t {
        return Err(SmcmcError::Contract(format!(
            "need 1 <= j <= t, got j = {j}, t = {t}"
        )));
    }
    Ok(cert.bound(p0, t, j))
}

/// Exact ‖p₀Tᵗ − π‖₁ against the drift bound, minimized over j, for
/// t = 1..t_max.
pub fn check_drift(
    chain: &FiniteChain,
    cert: &DriftCertificate,
    p0: &DVector<f64>,
    t_max: usize,
) -> Result<Outcome> {
    cert.validate(chain)?;
    let pi = chain.stationary();
    let mut q = p0.clone();
    let mut out = Outcome::default();
    for t in 1..=t_max {
        q = chain.step(&q);
        let bound = (1..=t)
            .map(|j| cert.bound(p0, t, j))
            .fold(f64::INFINITY, f64::min);
        out.record(l1_distance(&q, pi), bound);
    }
    Ok(out)
}

/// A sequence of chains on a common space: chain 0 supplies the starting
/// distribution π₀ and chains 1..=n are applied `m[t-1]` times each.
#[derive(Debug, Clone)]
pub struct SmcmcInstance {
    pub chains: Vec<FiniteChain>,
    pub m: Vec<usize>,
}

/// The three comparisons made on one sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmcmcOutcome {
    /// Exact error against Σ_s {Π_{u>s} ε_u(1 − α_u)} ε_s α_s.
    pub full: Outcome,
    /// Exact error against 2 Σ_s {Π_{u≥s} ε_u} α_s.
    pub weak: Outcome,
    /// The first bound against the second.
    pub ordering: Outcome,
}

/// Evolve π₀ through the sequence and compare with both bounds at every t,
/// with ε_t = ρ_tᵐᵗ and α_t = ½‖π_t − π_{t−1}‖₁.
pub fn smcmc_bound_check(inst: &SmcmcInstance) -> Result<SmcmcOutcome> {
    if inst.chains.len() < 2 || inst.m.len() != inst.chains.len() - 1 {
        return Err(SmcmcError::Contract(
            "need chains 0..=n and one count per step 1..=n".into(),
        ));
    }
    let n = inst.chains[0].size();
    if inst.chains.iter().any(|c| c.size() != n) {
        return Err(SmcmcError::Contract("chains live on different spaces".into()));
    }
    let mut p = inst.chains[0].stationary().clone();
    let (mut full_b, mut weak_b) = (0.0, 0.0);
    let mut out = SmcmcOutcome {
        full: Outcome::default(),
        weak: Outcome::default(),
        ordering: Outcome::default(),
    };
    for t in 1..inst.chains.len() {
        let chain = &inst.chains[t];
        let rho = require_contraction(chain)?;
        let m = inst.m[t - 1];
        let eps = rho.powi(m as i32);
        let alpha = 0.5 * l1_distance(chain.stationary(), inst.chains[t - 1].stationary());
        full_b = eps * alpha + eps * (1.0 - alpha) * full_b;
        weak_b = eps * (2.0 * alpha + weak_b);
        p = chain.evolve(&p, m);
        let err = l1_distance(&p, chain.stationary());
        out.full.record(err, full_b);
        out.weak.record(err, weak_b);
        out.ordering.record(full_b, weak_b);
    }
    Ok(out)
}

/// Weight function V ≥ 1 and rate ρ with ‖T(x, ·) − π‖_V ≤ ρV(x) for all x.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VCertificate {
    pub v: Vec<f64>,
    pub rho: f64,
}

/// Smallest ρ for which `v` satisfies the V-norm condition.
pub fn v_rate(chain: &FiniteChain, v: &[f64]) -> f64 {
    let pi = chain.stationary();
    (0..chain.size())
        .map(|x| {
            let row = chain.matrix().row(x).transpose() - pi;
            v_norm(&row, v) / v[x]
        })
        .fold(0.0, f64::max)
}

/// ‖p₀Tᵗ − π‖_V ≤ ρᵗ‖p₀ − π‖_V for t = 1..t_max.
pub fn v_norm_check(
    chain: &FiniteChain,
    cert: &VCertificate,
    p0: &DVector<f64>,
    t_max: usize,
) -> Result<Outcome> {
    if cert.v.len() != chain.size() || cert.v.iter().any(|&v| !(v >= 1.0 && v.is_finite())) {
        return Err(SmcmcError::InvalidCertificate(
            "V must be finite and at least 1".into(),
        ));
    }
    if !(cert.rho < 1.0) || v_rate(chain, &cert.v) > cert.rho + TOL {
        return Err(SmcmcError::InvalidCertificate(format!(
            "V-norm condition fails for rho = {}",
            cert.rho
        )));
    }
    let pi = chain.stationary();
    let d0 = v_norm(&(p0 - pi), &cert.v);
    let mut q = p0.clone();
    let mut out = Outcome::default();
    for t in 1..=t_max {
        q = chain.step(&q);
        out.record(v_norm(&(&q - pi), &cert.v), cert.rho.powi(t as i32) * d0);
    }
    Ok(out)
}

/// Comparison of the autocorrelation decay of a test function with the
/// second-largest eigenvalue modulus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralOutcome {
    /// Largest eigenvalue modulus on mean-zero functions.
    pub lambda1: f64,
    /// |f(t_max)|^{1/t_max}.
    pub rate: f64,
    pub rel_error: f64,
    /// Share of the test function's π-variance in the top eigenspace.
    pub projection: f64,
    /// Test function essentially orthogonal to the top eigenspace.
    pub flagged: bool,
    pub passed: bool,
}

/// Relative tolerance between the observed decay rate and |λ₁|.
pub const SPECTRAL_TOL: f64 = 0.05;
/// Top-eigenspace share of variance below which the comparison is flagged
/// rather than judged.
pub const ORTHOGONAL_SHARE: f64 = 1e-8;

/// corr(h(X₀), h(X_t)) under stationarity, computed exactly.
pub fn stationary_acf(chain: &FiniteChain, h: &[f64], t: usize) -> Result<f64> {
    let (centred, var) = centre(chain, h)?;
    let g = (0..t).fold(centred.clone(), |g, _| chain.matrix() * g);
    let pi = chain.stationary();
    Ok(pi
        .iter()
        .zip(centred.iter())
        .zip(g.iter())
        .map(|((p, a), b)| p * a * b)
        .sum::<f64>()
        / var)
}

fn centre(chain: &FiniteChain, h: &[f64]) -> Result<(DVector<f64>, f64)> {
    if h.len() != chain.size() {
        return Err(SmcmcError::Contract("test function has the wrong length".into()));
    }
    let pi = chain.stationary();
    let mean: f64 = pi.iter().zip(h).map(|(p, v)| p * v).sum();
    let centred = DVector::from_iterator(h.len(), h.iter().map(|v| v - mean));
    let var: f64 = pi.iter().zip(centred.iter()).map(|(p, v)| p * v * v).sum();
    if !(var > 1e-300) {
        return Err(SmcmcError::Contract("test function is constant under pi".into()));
    }
    Ok((centred, var))
}

/// Compare |f(t_max)|^{1/t_max} with |λ₁| for a reversible chain.
pub fn spectral_acf_check(chain: &FiniteChain, h: &[f64], t_max: usize) -> Result<SpectralOutcome> {
    if !chain.is_reversible(1e-10) {
        return Err(SmcmcError::Contract(
            "spectral check needs a reversible chain".into(),
        ));
    }
    if t_max < 1 {
        return Err(SmcmcError::Contract("t_max must be at least 1".into()));
    }
    let pi = chain.stationary();
    if pi.iter().any(|&p| !(p > 0.0)) {
        return Err(SmcmcError::Contract(
            "stationary distribution must be positive".into(),
        ));
    }
    let (centred, var) = centre(chain, h)?;
    let n = chain.size();
    let sq: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    // D^{1/2} T D^{-1/2} is symmetric for a reversible chain
    let t = chain.matrix();
    let s = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        0.5 * (sq[i] * t[(i, j)] / sq[j] + sq[j] * t[(j, i)] / sq[i])
    });
    let eig = SymmetricEigen::new(s);
    let root = DVector::from_column_slice(&sq);
    let top = (0..n)
        .max_by(|&a, &b| {
            eig.eigenvectors
                .column(a)
                .dot(&root)
                .abs()
                .total_cmp(&eig.eigenvectors.column(b).dot(&root).abs())
        })
        .expect("nonempty");
    let lambda1 = (0..n)
        .filter(|&k| k != top)
        .map(|k| eig.eigenvalues[k].abs())
        .fold(0.0, f64::max);
    // π-inner product of h with eigenfunction α_k = u_k / √π is Σ √π h u_k
    let weighted = DVector::from_iterator(n, (0..n).map(|i| sq[i] * centred[i]));
    let projection = (0..n)
        .filter(|&k| k != top && eig.eigenvalues[k].abs() >= lambda1 * (1.0 - 1e-9))
        .map(|k| eig.eigenvectors.column(k).dot(&weighted).powi(2))
        .sum::<f64>()
        / var;
    let flagged = projection < ORTHOGONAL_SHARE;

    // Tᵗ h̃ with renormalization; re-centring keeps rounding error from
    // leaking into the constant eigenfunction.
    let mut g = centred.clone();
    let mut log_scale = 0.0;
    let mut vanished = false;
    for _ in 0..t_max {
        g = t * g;
        let mean: f64 = pi.dot(&g);
        g.add_scalar_mut(-mean);
        let norm = g.amax();
        if norm == 0.0 {
            vanished = true;
            break;
        }
        g /= norm;
        log_scale += norm.ln();
    }
    let rate = if vanished {
        0.0
    } else {
        let c: f64 = (0..n).map(|i| pi[i] * centred[i] * g[i]).sum::<f64>();
        ((c.abs().ln() + log_scale - var.ln()) / t_max as f64).exp()
    };
    let rel_error = if lambda1 > 0.0 {
        (rate - lambda1).abs() / lambda1
    } else {
        rate
    };
    Ok(SpectralOutcome {
        lambda1,
        rate,
        rel_error,
        projection,
        flagged,
        passed: flagged || rel_error <= SPECTRAL_TOL,
    })
}
