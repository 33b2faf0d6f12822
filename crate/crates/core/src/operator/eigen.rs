use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::hamiltonian::DiscreteHamiltonian;
use super::linalg::shift_invert_lanczos;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Largest matrix dimension handled by a dense symmetric solve.
    pub dense_limit: usize,
    /// Relative eigenvalue tolerance for the iterative path.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { dense_limit: 4000, tol: 1e-10, max_iter: 400 }
    }
}

impl SolverConfig {
    pub fn is_dense(&self, h: &DiscreteHamiltonian) -> bool {
        h.size() <= self.dense_limit
    }
}

/// All eigenpairs, ascending; eigenvectors are unit columns in ℓ².
pub fn dense_eigen(h: &DiscreteHamiltonian) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(h.to_dense());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let values = order.iter().map(|i| eig.eigenvalues[*i]).collect();
    let vectors = eig.eigenvectors.select_columns(&order);
    (values, vectors)
}

pub fn dense_eigenvalues(h: &DiscreteHamiltonian) -> Vec<f64> {
    let mut v: Vec<f64> = h.to_dense().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

pub fn lowest_eigenvalue(h: &DiscreteHamiltonian, cfg: &SolverConfig) -> Result<f64> {
    if cfg.is_dense(h) {
        return Ok(dense_eigenvalues(h)[0]);
    }
    // H ≥ 0, so H + 1 is positive definite and λ₁ is the largest Ritz value
    // of its inverse
    let pairs = shift_invert_lanczos(h, -1.0, 1, cfg.tol, cfg.max_iter)?;
    pairs.first().map(|p| p.value).ok_or(Error::SolverFailure { iterations: 0, residual: f64::NAN })
}

/// Eigenvalue of `h` nearest to `e`.
pub fn nearest_eigenvalue(h: &DiscreteHamiltonian, e: f64, cfg: &SolverConfig) -> Result<f64> {
    if cfg.is_dense(h) {
        let v = dense_eigenvalues(h);
        return Ok(v.into_iter().min_by(|a, b| (a - e).abs().total_cmp(&(b - e).abs())).expect("nonempty"));
    }
    match shift_invert_lanczos(h, e, 1, cfg.tol, cfg.max_iter) {
        Ok(pairs) => Ok(pairs[0].value),
        // singular factorisation: e is an eigenvalue to working precision
        Err(Error::ResolventBlowUp { .. }) => Ok(e),
        Err(err) => Err(err),
    }
}

/// Eigenpairs in [0, E₀]; grid functions normalised in L²(Λ) with the
/// cell weight h^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub e0: f64,
    pub spacing: f64,
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    /// max ‖Hv − λv‖/‖v‖ over the window.
    pub max_residual: f64,
}

impl SpectralWindow {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn cell_weight(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }
}

pub fn spectral_window(h: &DiscreteHamiltonian, e0: f64, cfg: &SolverConfig) -> Result<SpectralWindow> {
    let scale = h.spacing().powi(h.dim() as i32).sqrt();
    let mut values = Vec::new();
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    if cfg.is_dense(h) {
        let (vals, vecs) = dense_eigen(h);
        for (i, v) in vals.iter().enumerate() {
            if *v > e0 {
                break;
            }
            values.push(*v);
            vectors.push(vecs.column(i).iter().copied().collect());
        }
    } else {
        // grow the Lanczos request until it reaches past E₀
        let mut k = 8;
        loop {
            let pairs = shift_invert_lanczos(h, 0.5 * e0, k, cfg.tol, cfg.max_iter.max(4 * k))?;
            let top = pairs.iter().map(|p| (p.value - 0.5 * e0).abs()).fold(0.0, f64::max);
            if top > 0.5 * e0 || pairs.len() < k || k >= h.size() {
                for p in pairs.into_iter().filter(|p| p.value >= 0.0 && p.value <= e0) {
                    values.push(p.value);
                    vectors.push(p.vector);
                }
                break;
            }
            k *= 2;
        }
    }
    let mut hv = vec![0.0; h.size()];
    let mut max_residual = 0.0f64;
    for (lam, v) in values.iter().zip(&vectors) {
        h.apply(v, &mut hv);
        let r = hv.iter().zip(v).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
        max_residual = max_residual.max(r);
    }
    for v in vectors.iter_mut() {
        v.iter_mut().for_each(|x| *x /= scale);
    }
    Ok(SpectralWindow { e0, spacing: h.spacing(), dim: h.dim(), eigenvalues: values, eigenvectors: vectors, max_residual })
}
