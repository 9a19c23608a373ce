//! Finite-state Markov chains and the distances used by the bound checks.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SmcmcError};

/// Row-stochastic transition matrix with its stationary distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteChain {
    t: DMatrix<f64>,
    pi: DVector<f64>,
}

impl FiniteChain {
    /// Validate `t` and solve for its stationary distribution.
    pub fn new(t: DMatrix<f64>) -> Result<Self> {
        let n = t.nrows();
        if n == 0 || t.ncols() != n {
            return Err(SmcmcError::Contract("transition matrix must be square".into()));
        }
        for i in 0..n {
            let row = t.row(i);
            if row.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                return Err(SmcmcError::Contract(format!("row {i} has invalid entries")));
            }
            if (row.sum() - 1.0).abs() > 1e-12 {
                return Err(SmcmcError::Contract(format!(
                    "row {i} sums to {}, not 1",
                    row.sum()
                )));
            }
        }
        // (Tᵀ − I)π = 0 with the last equation replaced by Σπ = 1
        let mut a = t.transpose() - DMatrix::identity(n, n);
        let mut rhs = DVector::zeros(n);
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        rhs[n - 1] = 1.0;
        let pi = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| SmcmcError::Contract("stationary distribution is not unique".into()))?;
        Self::with_stationary(t, pi)
    }

    /// Use a known stationary distribution, checking πT = π.
    pub fn with_stationary(t: DMatrix<f64>, pi: DVector<f64>) -> Result<Self> {
        if pi.len() != t.nrows() {
            return Err(SmcmcError::Contract("stationary vector has wrong length".into()));
        }
        let moved = t.tr_mul(&pi);
        if (moved - &pi).amax() > 1e-10 || (pi.sum() - 1.0).abs() > 1e-10 || pi.min() < -1e-12 {
            return Err(SmcmcError::Contract(
                "vector is not stationary for the chain".into(),
            ));
        }
        Ok(Self { t, pi })
    }

    pub fn size(&self) -> usize {
        self.t.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn stationary(&self) -> &DVector<f64> {
        &self.pi
    }

    /// Distribution after one step from `p`: `pT`.
    pub fn step(&self, p: &DVector<f64>) -> DVector<f64> {
        self.t.tr_mul(p)
    }

    /// `pTᵏ`.
    pub fn evolve(&self, p: &DVector<f64>, k: usize) -> DVector<f64> {
        let mut q = p.clone();
        for _ in 0..k {
            q = self.step(&q);
        }
        q
    }

    /// ‖T(x, ·) − π‖₁ for every state x.
    pub fn row_distances(&self) -> Vec<f64> {
        (0..self.size())
            .map(|i| {
                self.t
                    .row(i)
                    .iter()
                    .zip(self.pi.iter())
                    .map(|(a, b)| (a - b).abs())
                    .sum()
            })
            .collect()
    }

    /// Detailed balance π(x)T(x, y) = π(y)T(y, x) within `tol`.
    pub fn is_reversible(&self, tol: f64) -> bool {
        let n = self.size();
        (0..n)
            .all(|i| (0..n).all(|j| (self.pi[i] * self.t[(i, j)] - self.pi[j] * self.t[(j, i)]).abs() <= tol))
    }
}

/// Σ|p_i − q_i|.
pub fn l1_distance(p: &DVector<f64>, q: &DVector<f64>) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions on different spaces");
    p.iter().zip(q.iter()).map(|(a, b)| (a - b).abs()).sum()
}

/// ‖μ‖_V = sup over |f| ≤ V of |μ(f)|, attained at f = V·sign(μ).
pub fn v_norm(mu: &DVector<f64>, v: &[f64]) -> f64 {
    mu.iter().zip(v).map(|(m, w)| m.abs() * w).sum()
}

/// The contraction rate max_x ‖T(x, ·) − π‖₁.
///
/// Under this normalization ‖pTᵗ − π‖₁ ≤ ρᵗ‖p − π‖₁ for every p.
pub fn uniform_rho(chain: &FiniteChain) -> f64 {
    chain.row_distances().into_iter().fold(0.0, f64::max)
}

/// Dobrushin coefficient max_{x,y} ‖T(x, ·) − T(y, ·)‖₁.
pub fn dobrushin(chain: &FiniteChain) -> f64 {
    let t = chain.matrix();
    let n = chain.size();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d: f64 = (0..n).map(|k| (t[(i, k)] - t[(j, k)]).abs()).sum();
            best = best.max(d);
        }
    }
    best
}

/// Smallest ρ_m with T(x, y) ≥ (1 − ρ_m)ν(y) for some probability ν, and
/// that ν (the normalized column minima).
pub fn minorization(chain: &FiniteChain) -> (f64, DVector<f64>) {
    let t = chain.matrix();
    let mins = DVector::from_iterator(chain.size(), (0..chain.size()).map(|j| t.column(j).min()));
    let mass = mins.sum();
    let nu = if mass > 0.0 {
        &mins / mass
    } else {
        DVector::from_element(chain.size(), 1.0 / chain.size() as f64)
    };
    (1.0 - mass, nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_state(p: f64, q: f64) -> FiniteChain {
        FiniteChain::new(DMatrix::from_row_slice(2, 2, &[1.0 - p, p, q, 1.0 - q])).unwrap()
    }

    #[test]
    fn l1_examples() {
        let p = DVector::from_vec(vec![0.5, 0.5]);
        let q = DVector::from_vec(vec![0.25, 0.75]);
        assert_eq!(l1_distance(&p, &p), 0.0);
        assert_abs_diff_eq!(l1_distance(&p, &q), 0.5, epsilon = 1e-15);
        let a = DVector::from_vec(vec![1.0, 0.0]);
        let b = DVector::from_vec(vec![0.0, 1.0]);
        assert_eq!(l1_distance(&a, &b), 2.0);
    }

    #[test]
    fn stationary_two_state() {
        let c = two_state(0.2, 0.6);
        assert_abs_diff_eq!(c.stationary()[0], 0.75, epsilon = 1e-14);
    }

    #[test]
    fn rho_examples() {
        assert_abs_diff_eq!(uniform_rho(&two_state(0.5, 0.5)), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(uniform_rho(&two_state(0.1, 0.1)), 0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(dobrushin(&two_state(0.1, 0.1)), 1.6, epsilon = 1e-14);
        let pi = [0.2, 0.3, 0.5];
        let t = DMatrix::from_fn(3, 3, |_, j| pi[j]);
        let c = FiniteChain::new(t).unwrap();
        assert_abs_diff_eq!(uniform_rho(&c), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dobrushin(&c), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn minorization_two_state() {
        let (rho_m, nu) = minorization(&two_state(0.1, 0.1));
        assert_abs_diff_eq!(rho_m, 0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(nu[0], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(FiniteChain::new(DMatrix::from_row_slice(2, 2, &[0.5, 0.6, 0.5, 0.5])).is_err());
        assert!(FiniteChain::new(DMatrix::from_row_slice(2, 2, &[-0.1, 1.1, 0.5, 0.5])).is_err());
        let t = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.1, 0.9]);
        assert!(FiniteChain::with_stationary(t, DVector::from_vec(vec![0.6, 0.4])).is_err());
    }

    #[test]
    fn v_norm_is_l1_for_unit_weights() {
        let mu = DVector::from_vec(vec![0.3, -0.1, -0.2]);
        assert_abs_diff_eq!(v_norm(&mu, &[1.0; 3]), 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(v_norm(&mu, &[1.0, 2.0, 3.0]), 0.3 + 0.2 + 0.6, epsilon = 1e-15);
    }
}
