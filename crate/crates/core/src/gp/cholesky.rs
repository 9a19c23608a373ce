//! Per-bandwidth Cholesky factors with O(t²) row appends.
//!
//! Lower-triangular matrices are stored packed by rows, so appending a row
//! is an `extend` on the backing vector.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SmcmcError};

/// Floor applied to the squared new diagonal entry of an appended row.
pub const PIVOT_FLOOR: f64 = 1e-10;

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

/// `out = A v` for packed lower-triangular `A` restricted to its first
/// `v.len()` rows.
pub fn lower_mul(a: &[f64], v: &[f64], out: &mut Vec<f64>) {
    out.clear();
    for i in 0..v.len() {
        let row = &a[row_start(i)..row_start(i) + i + 1];
        out.push(row.iter().zip(v).map(|(x, y)| x * y).sum());
    }
}

/// `out = Aᵀ v` for packed lower-triangular `A` restricted to its first
/// `v.len()` rows.
pub fn lower_t_mul(a: &[f64], v: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.resize(v.len(), 0.0);
    for (i, &vi) in v.iter().enumerate() {
        let row = &a[row_start(i)..row_start(i) + i + 1];
        for (o, x) in out.iter_mut().zip(row) {
            *o += x * vi;
        }
    }
}

/// A lower-triangular factor `L` of an SPD matrix together with `L⁻¹` and
/// `log det(L Lᵀ)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Factor {
    n: usize,
    l: Vec<f64>,
    linv: Vec<f64>,
    logdet: f64,
}

impl Factor {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Packed rows of `L`.
    pub fn l(&self) -> &[f64] {
        &self.l
    }

    /// Packed rows of `L⁻¹`.
    pub fn linv(&self) -> &[f64] {
        &self.linv
    }

    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.l[row_start(i) + j]
        }
    }

    pub fn get_inv(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.linv[row_start(i) + j]
        }
    }

    /// Off-diagonal part of row `i` of `L`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.l[row_start(i)..row_start(i) + i]
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.l[row_start(i) + i]
    }

    /// Extend the factored matrix by one row and column: `cross` holds the
    /// new off-diagonal entries and `corner` the new diagonal entry.
    ///
    /// Returns `true` when the pivot had to be floored.
    pub fn append(&mut self, cross: &[f64], corner: f64, scratch: &mut Vec<f64>) -> bool {
        debug_assert_eq!(cross.len(), self.n);
        // B = L⁻¹c is the new row of L; E = −g (L⁻ᵀ L⁻¹ c) that of L⁻¹.
        // B comes from forward substitution, which loses far less accuracy
        // than multiplying by the stored inverse when C is ill-conditioned.
        let mut b = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let row = &self.l[row_start(i)..row_start(i) + i + 1];
            let acc: f64 = row[..i].iter().zip(&b).map(|(x, y)| x * y).sum();
            b.push((cross[i] - acc) / row[i]);
        }
        let mut d2 = corner - b.iter().map(|x| x * x).sum::<f64>();
        let clamped = !(d2 > PIVOT_FLOOR);
        if clamped {
            d2 = PIVOT_FLOOR;
        }
        let d = d2.sqrt();
        let g = d.recip();
        lower_t_mul(&self.linv, &b, scratch);
        self.l.extend_from_slice(&b);
        self.l.push(d);
        self.linv.extend(scratch.iter().map(|e| -g * e));
        self.linv.push(g);
        self.logdet += d2.ln();
        self.n += 1;
        clamped
    }

    /// Fresh factorization of a dense SPD matrix.
    pub fn factorize(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        let chol = a
            .clone()
            .cholesky()
            .ok_or_else(|| SmcmcError::Contract("matrix is not positive definite".into()))?;
        let l = chol.l();
        let linv = l
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .ok_or_else(|| SmcmcError::Contract("singular Cholesky factor".into()))?;
        let mut out = Factor {
            n,
            ..Factor::default()
        };
        for i in 0..n {
            for j in 0..=i {
                out.l.push(l[(i, j)]);
                out.linv.push(linv[(i, j)]);
            }
            out.logdet += 2.0 * l[(i, i)].ln();
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn inv_to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get_inv(i, j))
    }
}

/// Whether factors are grown by row appends or recomputed from scratch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CacheMode {
    #[default]
    Incremental,
    Fresh,
}

/// Squared-exponential correlation exp(−a²‖x − x′‖²).
pub fn sq_exp(a: f64, sqdist: f64) -> f64 {
    (-a * a * sqdist).exp()
}

pub fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Design points and, for every grid value a_h, factors of the correlation
/// matrix `C_h + jitter·I` and of `σ²(C_h + jitter·I) + I`.
#[derive(Debug, Clone)]
pub struct CholeskyCache {
    grid: Vec<f64>,
    sigma2: f64,
    jitter: f64,
    mode: CacheMode,
    points: Vec<Vec<f64>>,
    corr: Vec<Factor>,
    noisy: Vec<Factor>,
    clamped: usize,
}

impl CholeskyCache {
    pub fn new(grid: Vec<f64>, sigma2: f64, jitter: f64, mode: CacheMode) -> Result<Self> {
        if grid.is_empty() || grid.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(SmcmcError::Config("grid must be nonempty and positive".into()));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(SmcmcError::Config(format!(
                "sigma2 must be positive, got {sigma2}"
            )));
        }
        if !(jitter >= 0.0 && jitter.is_finite()) {
            return Err(SmcmcError::Config(format!(
                "jitter must be non-negative, got {jitter}"
            )));
        }
        let h = grid.len();
        Ok(Self {
            grid,
            sigma2,
            jitter,
            mode,
            points: Vec::new(),
            corr: vec![Factor::default(); h],
            noisy: vec![Factor::default(); h],
            clamped: 0,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn mode(&self) -> CacheMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Factor of `C_h + jitter·I`.
    pub fn corr(&self, h: usize) -> &Factor {
        &self.corr[h]
    }

    /// Factor of `σ²(C_h + jitter·I) + I`.
    pub fn noisy(&self, h: usize) -> &Factor {
        &self.noisy[h]
    }

    /// How many appended pivots were floored.
    pub fn clamped(&self) -> usize {
        self.clamped
    }

    /// Add one design point to every factor.
    pub fn append(&mut self, x: Vec<f64>) -> Result<()> {
        if let Some(first) = self.points.first() {
            if first.len() != x.len() {
                return Err(SmcmcError::Contract(format!(
                    "covariate has dimension {}, expected {}",
                    x.len(),
                    first.len()
                )));
            }
        }
        match self.mode {
            CacheMode::Incremental => {
                let d2: Vec<f64> = self.points.iter().map(|p| sq_dist(p, &x)).collect();
                let mut cross = Vec::with_capacity(d2.len());
                let mut scratch = Vec::with_capacity(d2.len());
                for h in 0..self.grid.len() {
                    let a = self.grid[h];
                    cross.clear();
                    cross.extend(d2.iter().map(|&s| sq_exp(a, s)));
                    if self.corr[h].append(&cross, 1.0 + self.jitter, &mut scratch) {
                        self.clamped += 1;
                    }
                    cross.iter_mut().for_each(|c| *c *= self.sigma2);
                    let corner = self.sigma2 * (1.0 + self.jitter) + 1.0;
                    if self.noisy[h].append(&cross, corner, &mut scratch) {
                        self.clamped += 1;
                    }
                }
                self.points.push(x);
            }
            CacheMode::Fresh => {
                self.points.push(x);
                self.refactor()?;
            }
        }
        Ok(())
    }

    /// `C_h(X, X) + jitter·I` as a dense matrix.
    pub fn corr_matrix(&self, h: usize) -> DMatrix<f64> {
        let n = self.points.len();
        let a = self.grid[h];
        DMatrix::from_fn(n, n, |i, j| {
            let c = sq_exp(a, sq_dist(&self.points[i], &self.points[j]));
            if i == j {
                c + self.jitter
            } else {
                c
            }
        })
    }

    fn refactor(&mut self) -> Result<()> {
        for h in 0..self.grid.len() {
            let c = self.corr_matrix(h);
            let n = c.nrows();
            let noisy = c.clone() * self.sigma2 + DMatrix::identity(n, n);
            self.corr[h] = Factor::factorize(&c)?;
            self.noisy[h] = Factor::factorize(&noisy)?;
        }
        Ok(())
    }

    /// Largest relative Frobenius error of `L Lᵀ` against the correlation
    /// matrix and largest entry error of `L L⁻¹` against the identity.
    pub fn coherence_errors(&self) -> (f64, f64) {
        let mut recon: f64 = 0.0;
        let mut ident: f64 = 0.0;
        let n = self.points.len();
        for h in 0..self.grid.len() {
            let c = self.corr_matrix(h);
            let noisy = c.clone() * self.sigma2 + DMatrix::identity(n, n);
            for (f, target) in [(&self.corr[h], c), (&self.noisy[h], noisy)] {
                let l = f.to_dense();
                let err = (&l * l.transpose() - &target).norm() / target.norm().max(1e-300);
                recon = recon.max(err);
                let id = &l * f.inv_to_dense() - DMatrix::<f64>::identity(n, n);
                ident = ident.max(id.amax());
            }
        }
        (recon, ident)
    }
}
