//! Banded LU and shift-invert Lanczos for the finite-difference matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use super::hamiltonian::DiscreteHamiltonian;
use crate::error::{Error, Result};
use crate::rng::StreamSeed;

/// LU factorisation with partial pivoting of a banded matrix, stored row by
/// row over the columns `i − kl ..= i + kl + ku` (room for pivoting fill).
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    /// Factors `H − shift`.
    pub fn factor(h: &DiscreteHamiltonian, shift: f64) -> Result<Self> {
        let b = h.bandwidth();
        let n = h.size();
        let ku = 2 * b;
        let width = b + ku + 1;
        let mut lu = Self { n, kl: b, ku, width, data: vec![0.0; n * width], piv: vec![0; n] };
        for (r, c, v) in h.triplets() {
            let v = if r == c { v - shift } else { v };
            *lu.at(r, c) = v;
        }
        lu.eliminate()?;
        Ok(lu)
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.width + (j + self.kl - i)]
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + (j + self.kl - i)]
    }

    fn eliminate(&mut self) -> Result<()> {
        let n = self.n;
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + self.ku).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-300 * scale || best == 0.0 {
                return Err(Error::ResolventBlowUp { distance: 0.0 });
            }
            self.piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let a = self.get(k, j);
                    let b = self.get(p, j);
                    *self.at(k, j) = b;
                    *self.at(p, j) = a;
                }
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last_row {
                let l = self.get(i, k) / pivot;
                if l == 0.0 {
                    continue;
                }
                *self.at(i, k) = l;
                for j in k + 1..=last_col {
                    let u = self.get(k, j);
                    if u != 0.0 {
                        *self.at(i, j) -= l * u;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Overwrites `b` with the solution of (H − shift) x = b.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    b[i] -= self.get(i, k) * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + self.ku).min(n - 1) {
                s -= self.get(k, j) * b[j];
            }
            b[k] = s / self.get(k, k);
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Ritz pair of the original operator.
#[derive(Debug, Clone)]
pub struct RitzPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// The `k` eigenpairs of `h` closest to `shift`, by Lanczos on
/// (H − shift)^{-1} with full reorthogonalisation.
///
/// Eigenvalues of multiplicity above one are found once.
pub fn shift_invert_lanczos(
    h: &DiscreteHamiltonian,
    shift: f64,
    k: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<RitzPair>> {
    let lu = BandLu::factor(h, shift)?;
    let n = h.size();
    let k = k.min(n);
    let max_iter = max_iter.min(n).max(k);

    let mut rng = StreamSeed::new(0x5eed).rng();
    let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut q);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut hv = vec![0.0; n];

    loop {
        let j = basis.len() - 1;
        let mut w = lu.solve(&basis[j]);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        // two passes of Gram–Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = dot(&w, v);
                axpy(-c, v, &mut w);
            }
        }
        let b = norm(&w);
        let m = alpha.len();
        let exhausted = b <= 1e-13 * alpha.iter().fold(0.0f64, |s, v| s.max(v.abs()));

        let check = (m >= k && m % 5 == 0) || m >= max_iter || exhausted;
        if check {
            let (thetas, s) = tridiagonal_eigen(&alpha, &beta);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|x, y| thetas[*y].abs().total_cmp(&thetas[*x].abs()));
            let wanted = &order[..k.min(m)];
            let converged = exhausted
                || wanted.iter().all(|&i| (b * s[(m - 1, i)]).abs() <= tol * thetas[i].abs());
            if converged || m >= max_iter {
                let mut out = Vec::with_capacity(wanted.len());
                for &i in wanted {
                    let mut vec = vec![0.0; n];
                    for (r, v) in basis.iter().enumerate() {
                        axpy(s[(r, i)], v, &mut vec);
                    }
                    normalize(&mut vec);
                    let value = shift + 1.0 / thetas[i];
                    h.apply(&vec, &mut hv);
                    let residual = hv.iter().zip(&vec).map(|(a, b)| (a - value * b).powi(2)).sum::<f64>().sqrt();
                    out.push(RitzPair { value, vector: vec, residual });
                }
                if !converged {
                    let worst = out.iter().map(|p| p.residual / p.value.abs().max(1.0)).fold(0.0, f64::max);
                    if worst > tol.sqrt() {
                        return Err(Error::SolverFailure { iterations: m, residual: worst });
                    }
                }
                out.sort_by(|a, b| a.value.total_cmp(&b.value));
                return Ok(out);
            }
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += c * xi);
}

fn normalize(a: &mut [f64]) {
    let s = norm(a);
    a.iter_mut().for_each(|x| *x /= s);
}

/// Largest singular value of a small dense block.
pub fn spectral_norm(block: &DMatrix<f64>) -> f64 {
    if block.is_empty() {
        return 0.0;
    }
    block.clone().singular_values().max()
}
