//! Discrete grid of inverse bandwidths from a powered gamma prior.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use crate::error::{Result, SmcmcError};

/// Prior on the inverse bandwidth `a`: `a^power ~ Gamma(shape, rate)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Number of grid points H.
    pub size: usize,
    pub shape: f64,
    pub rate: f64,
    pub power: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            size: 10,
            shape: 1.0,
            rate: 1.0,
            power: 2.0,
        }
    }
}

/// Quantile of Gamma(shape, rate) at `p` in (0, 1), by bisection on the
/// regularized lower incomplete gamma function.
pub fn gamma_quantile(shape: f64, rate: f64, p: f64) -> f64 {
    let cdf = |x: f64| gamma_lr(shape, rate * x);
    let mut lo = 0.0;
    let mut hi = 1.0 / rate;
    while cdf(hi) < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Probabilities at which the grid is placed: (h − 1)/H for h ≥ 2 and
/// 1/(2H) for the first point.
pub fn grid_probabilities(size: usize) -> Vec<f64> {
    (0..size)
        .map(|h| {
            if h == 0 {
                0.5 / size as f64
            } else {
                h as f64 / size as f64
            }
        })
        .collect()
}

/// Inverse bandwidths a_1 < ... < a_H; the discrete prior over them is
/// uniform.
pub fn build_grid(spec: &GridSpec) -> Result<Vec<f64>> {
    if spec.size < 1 {
        return Err(SmcmcError::Config("grid size must be at least 1".into()));
    }
    for (name, v) in [("shape", spec.shape), ("rate", spec.rate), ("power", spec.power)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(SmcmcError::Config(format!(
                "grid prior {name} must be positive, got {v}"
            )));
        }
    }
    Ok(grid_probabilities(spec.size)
        .into_iter()
        .map(|p| gamma_quantile(spec.shape, spec.rate, p).powf(spec.power.recip()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_quantiles() {
        let spec = GridSpec {
            size: 4,
            shape: 1.0,
            rate: 1.0,
            power: 1.0,
        };
        let g = build_grid(&spec).unwrap();
        let expect = [
            -(7.0f64 / 8.0).ln(),
            -(0.75f64).ln(),
            -(0.5f64).ln(),
            -(0.25f64).ln(),
        ];
        for (a, b) in g.iter().zip(expect) {
            assert_relative_eq!(*a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn two_points_distinct_positive_and_increasing() {
        for spec in [
            GridSpec {
                size: 2,
                shape: 2.5,
                rate: 0.7,
                power: 3.0,
            },
            GridSpec::default(),
        ] {
            let g = build_grid(&spec).unwrap();
            assert!(g[0] > 0.0);
            assert!(g.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn power_takes_root() {
        let base = build_grid(&GridSpec {
            size: 5,
            shape: 2.0,
            rate: 3.0,
            power: 1.0,
        })
        .unwrap();
        let pow = build_grid(&GridSpec {
            size: 5,
            shape: 2.0,
            rate: 3.0,
            power: 2.0,
        })
        .unwrap();
        for (b, p) in base.iter().zip(pow) {
            assert_relative_eq!(b.sqrt(), p, max_relative = 1e-12);
        }
    }

    #[test]
    fn invalid_prior() {
        assert!(build_grid(&GridSpec {
            rate: 0.0,
            ..GridSpec::default()
        })
        .is_err());
        assert!(build_grid(&GridSpec {
            size: 0,
            ..GridSpec::default()
        })
        .is_err());
    }
}
