//! Random finite-state instances and certificate searches.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, StandardNormal};

use super::chain::{uniform_rho, FiniteChain};
use super::checks::{v_rate, DriftCertificate, SmcmcInstance, VCertificate};

/// Dirichlet(concentration, ..., concentration) draw of length `n`.
pub fn dirichlet<R: Rng + ?Sized>(n: usize, concentration: f64, rng: &mut R) -> Vec<f64> {
    let g = Gamma::new(concentration, 1.0).expect("positive concentration");
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| g.sample(rng)).collect();
        let s: f64 = v.iter().sum();
        if s > 0.0 {
            v.iter_mut().for_each(|x| *x /= s);
            return v;
        }
    }
}

fn mix(d: &[Vec<f64>], nu: &[f64], w: f64) -> DMatrix<f64> {
    let n = nu.len();
    let mut t = DMatrix::from_fn(n, n, |i, j| w * d[i][j] + (1.0 - w) * nu[j]);
    // renormalize so rows sum to one to working precision
    for i in 0..n {
        let s = t.row(i).sum();
        t.row_mut(i).iter_mut().for_each(|v| *v /= s);
    }
    t
}

/// Chain whose rows are Dirichlet(1) draws pulled toward a common row ν with
/// a uniform mixing weight; redrawn until it is a uniform contraction.
pub fn random_chain<R: Rng + ?Sized>(n: usize, rng: &mut R) -> FiniteChain {
    loop {
        let d: Vec<Vec<f64>> = (0..n).map(|_| dirichlet(n, 1.0, rng)).collect();
        let nu = dirichlet(n, 1.0, rng);
        let w: f64 = rng.random();
        if let Ok(chain) = FiniteChain::new(mix(&d, &nu, w)) {
            if uniform_rho(&chain) < 1.0 {
                return chain;
            }
        }
    }
}

/// Metropolis chain with a random symmetric proposal and a random target
/// bounded away from zero; reversible by construction.
pub fn random_reversible_chain<R: Rng + ?Sized>(n: usize, rng: &mut R) -> FiniteChain {
    let target: Vec<f64> = {
        let raw = dirichlet(n, 1.0, rng);
        let floor = 0.2 / n as f64;
        let s: f64 = raw.iter().map(|p| p + floor).sum();
        raw.iter().map(|p| (p + floor) / s).collect()
    };
    let mut a = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>());
    a = (&a + a.transpose()) * 0.5;
    a.fill_diagonal(0.0);
    let max_row = (0..n).map(|i| a.row(i).sum()).fold(0.0, f64::max);
    let q = a / (max_row * (1.0 + rng.random::<f64>()));
    let mut t = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                t[(i, j)] = q[(i, j)] * (target[j] / target[i]).min(1.0);
            }
        }
        let off: f64 = t.row(i).sum();
        t[(i, i)] = 1.0 - off;
    }
    let pi = DVector::from_vec(target);
    FiniteChain::with_stationary(t, pi).expect("Metropolis chains keep their target")
}

/// Chain 0 plus `steps` successors whose rows and common row drift slowly,
/// with counts m_t uniform on 1..=5.
pub fn drifting_sequence<R: Rng + ?Sized>(n: usize, steps: usize, rng: &mut R) -> SmcmcInstance {
    'retry: loop {
        let mut d: Vec<Vec<f64>> = (0..n).map(|_| dirichlet(n, 1.0, rng)).collect();
        let mut nu = dirichlet(n, 1.0, rng);
        let w: f64 = rng.random();
        let mut chains = Vec::with_capacity(steps + 1);
        for t in 0..=steps {
            if t > 0 {
                for row in d.iter_mut() {
                    let fresh = dirichlet(n, 1.0, rng);
                    row.iter_mut()
                        .zip(fresh)
                        .for_each(|(a, b)| *a = 0.9 * *a + 0.1 * b);
                }
                let fresh = dirichlet(n, 1.0, rng);
                nu.iter_mut()
                    .zip(fresh)
                    .for_each(|(a, b)| *a = 0.9 * *a + 0.1 * b);
            }
            match FiniteChain::new(mix(&d, &nu, w)) {
                Ok(c) if uniform_rho(&c) < 1.0 => chains.push(c),
                _ => continue 'retry,
            }
        }
        let m = (0..steps).map(|_| rng.random_range(1..=5)).collect();
        return SmcmcInstance { chains, m };
    }
}

/// Random starting distribution.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_vec(dirichlet(n, 1.0, rng))
}

/// Random test function with standard normal values.
pub fn random_function<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Minimal V with V = 1 on C and TV ≤ λV off C, by monotone fixed-point
/// iteration from V ≡ 1; `None` when it diverges.
fn minimal_drift_function(chain: &FiniteChain, small_set: &[bool], lambda: f64) -> Option<Vec<f64>> {
    let n = chain.size();
    let t = chain.matrix();
    let mut v = vec![1.0; n];
    for _ in 0..2_000 {
        let tv = t * DVector::from_column_slice(&v);
        let mut change: f64 = 0.0;
        for x in 0..n {
            if !small_set[x] {
                let next = (tv[x] / lambda).max(1.0);
                change = change.max((next - v[x]).abs() / next);
                v[x] = next;
            }
        }
        if v.iter().any(|&x| x > 1e12) {
            return None;
        }
        if change < 1e-15 {
            // one more pass absorbs the last rounding step
            let tv = t * DVector::from_column_slice(&v);
            for x in 0..n {
                if !small_set[x] {
                    v[x] = v[x].max(tv[x] / lambda);
                }
            }
            return Some(v);
        }
    }
    None
}

fn certificate_for(chain: &FiniteChain, small_set: &[bool], lambda: f64) -> Option<DriftCertificate> {
    let rows = chain.row_distances();
    let rho = rows
        .iter()
        .zip(small_set)
        .filter(|(_, &c)| c)
        .map(|(r, _)| *r)
        .fold(0.0, f64::max);
    if rho >= 1.0 {
        return None;
    }
    let v = minimal_drift_function(chain, small_set, lambda)?;
    let tv = chain.matrix() * DVector::from_column_slice(&v);
    let b = (0..chain.size())
        .filter(|&x| small_set[x])
        .map(|x| (tv[x] - lambda * v[x]).max(0.0))
        .fold(0.0, f64::max);
    let cert = DriftCertificate {
        v,
        small_set: small_set.to_vec(),
        rho,
        lambda,
        b,
    };
    cert.validate(chain).ok().map(|_| cert)
}

/// Search small sets C and rates λ for the certificate with the smallest
/// bound at `t_ref` (minimized over j): a coarse λ grid for every nonempty
/// C, then a finer grid around the best λ.
pub fn search_drift_certificate(
    chain: &FiniteChain,
    p0: &DVector<f64>,
    t_ref: usize,
) -> Option<DriftCertificate> {
    let n = chain.size();
    let score = |c: &DriftCertificate| {
        (1..=t_ref)
            .map(|j| c.bound(p0, t_ref, j))
            .fold(f64::INFINITY, f64::min)
    };
    let mut best: Option<(f64, DriftCertificate)> = None;
    let consider = |cert: Option<DriftCertificate>, best: &mut Option<(f64, DriftCertificate)>| {
        if let Some(c) = cert {
            let s = score(&c);
            if best.as_ref().is_none_or(|(b, _)| s < *b) {
                *best = Some((s, c));
            }
        }
    };
    for mask in 1u32..(1 << n) {
        let small_set: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
        for k in 1..20 {
            consider(certificate_for(chain, &small_set, k as f64 * 0.05), &mut best);
        }
    }
    let (_, coarse) = best.clone()?;
    for k in -10..=10 {
        let lambda = coarse.lambda + k as f64 * 0.005;
        if lambda > 0.0 && lambda < 1.0 {
            consider(certificate_for(chain, &coarse.small_set, lambda), &mut best);
        }
    }
    best.map(|(_, c)| c)
}

/// Best V-norm certificate among V ≡ 1 and random weight functions.
pub fn search_v_certificate<R: Rng + ?Sized>(
    chain: &FiniteChain,
    trials: usize,
    rng: &mut R,
) -> Option<VCertificate> {
    let n = chain.size();
    let ones = vec![1.0; n];
    let mut best = (v_rate(chain, &ones), ones);
    for _ in 0..trials {
        let scale = [0.1, 1.0, 10.0][rng.random_range(0..3)];
        let e = Exp::new(1.0 / scale).expect("positive rate");
        let v: Vec<f64> = (0..n).map(|_| 1.0 + e.sample(rng)).collect();
        let r = v_rate(chain, &v);
        if r < best.0 {
            best = (r, v);
        }
    }
    (best.0 < 1.0).then_some(VCertificate {
        v: best.1,
        rho: best.0,
    })
}
