use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::eigen::{nearest_eigenvalue, SolverConfig};
use super::hamiltonian::DiscreteHamiltonian;
use super::linalg::{spectral_norm, BandLu};
use crate::error::{Error, Result};
use crate::geometry::{distance, Cube};
use crate::rng::StreamSeed;

/// Distances below this count as E ∈ σ(H).
pub const BLOW_UP_DISTANCE: f64 = 1e-12;

pub fn distance_to_spectrum(h: &DiscreteHamiltonian, e: f64, cfg: &SolverConfig) -> Result<f64> {
    Ok((nearest_eigenvalue(h, e, cfg)? - e).abs())
}

/// ‖(H − E)^{-1}‖ = 1/dist(E, σ(H)).
pub fn resolvent_norm(h: &DiscreteHamiltonian, e: f64, cfg: &SolverConfig) -> Result<f64> {
    let dist = distance_to_spectrum(h, e, cfg)?;
    if dist < BLOW_UP_DISTANCE {
        return Err(Error::ResolventBlowUp { distance: dist });
    }
    Ok(1.0 / dist)
}

/// 2E₀^{−1} e^{−√E₀ r}.
pub fn combes_thomas_bound(e0: f64, r: f64) -> f64 {
    2.0 / e0 * (-e0.sqrt() * r).exp()
}

/// (H − E)^{-1} held as a banded factorisation, with cached columns.
pub struct Resolvent<'a> {
    h: &'a DiscreteHamiltonian,
    energy: f64,
    norm: f64,
    lu: BandLu,
    columns: HashMap<usize, Vec<f64>>,
}

impl<'a> Resolvent<'a> {
    pub fn new(h: &'a DiscreteHamiltonian, energy: f64, cfg: &SolverConfig) -> Result<Self> {
        let norm = resolvent_norm(h, energy, cfg)?;
        let lu = BandLu::factor(h, energy).map_err(|_| Error::ResolventBlowUp { distance: 0.0 })?;
        Ok(Self { h, energy, norm, lu, columns: HashMap::new() })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn hamiltonian(&self) -> &DiscreteHamiltonian {
        self.h
    }

    fn column(&mut self, j: usize) -> &Vec<f64> {
        let n = self.h.size();
        let lu = &self.lu;
        self.columns.entry(j).or_insert_with(|| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            lu.solve_in_place(&mut e);
            e
        })
    }

    /// Rows `rows`, columns `cols` of the resolvent matrix.
    pub fn block(&mut self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(rows.len(), cols.len());
        for (c, &j) in cols.iter().enumerate() {
            let col = self.column(j);
            for (r, &i) in rows.iter().enumerate() {
                m[(r, c)] = col[i];
            }
        }
        m
    }

    /// ‖χ_x R χ_y‖ for windows of side `side` centered at x and y.
    pub fn window_norm(&mut self, x: &[f64], y: &[f64], side: f64) -> f64 {
        let rows = self.h.window_nodes(x, side);
        let cols = self.h.window_nodes(y, side);
        spectral_norm(&self.block(&rows, &cols))
    }

    /// Drops cached columns.
    pub fn clear_cache(&mut self) {
        self.columns.clear();
    }
}

/// ‖χ_x R(E) χ_y‖ with windows of side `side`.
pub fn local_decay(h: &DiscreteHamiltonian, e: f64, x: &[f64], y: &[f64], side: f64, cfg: &SolverConfig) -> Result<f64> {
    for p in [x, y] {
        let w = Cube::new(p.to_vec(), side)?;
        if !h.cube().contains_cube(&w) {
            return Err(Error::invalid("window is not inside the box"));
        }
    }
    let mut r = Resolvent::new(h, e, cfg)?;
    Ok(r.window_norm(x, y, side))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeParams {
    /// Boxes with side at most this use every pair.
    pub full_pairs_max_side: f64,
    /// Pair count sampled on larger boxes.
    pub sampled_pairs: usize,
    pub seed: u64,
}

impl Default for ProbeParams {
    fn default() -> Self {
        Self { full_pairs_max_side: 24.0, sampled_pairs: 256, seed: 0 }
    }
}

/// Centers of the unit windows tiling the box (centered when the side is not
/// an integer).
pub fn probe_centers(cube: &Cube) -> Vec<Vec<f64>> {
    let count = cube.side().floor() as usize;
    if count == 0 {
        return Vec::new();
    }
    let offset = 0.5 * (cube.side() - count as f64) + 0.5;
    let mut out = vec![Vec::new()];
    for a in 0..cube.dim() {
        let lo = cube.lower(a) + offset;
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                (0..count).map(move |i| {
                    let mut q = p.clone();
                    q.push(lo + i as f64);
                    q
                })
            })
            .collect();
    }
    out
}

/// Unordered probe pairs (i < j) with |x − y| ≥ L/10.
pub fn probe_pairs(cube: &Cube, centers: &[Vec<f64>], params: &ProbeParams) -> Vec<(usize, usize)> {
    let min_dist = cube.side() / 10.0;
    let mut eligible = Vec::new();
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            if distance(&centers[i], &centers[j]) >= min_dist {
                eligible.push((i, j));
            }
        }
    }
    if cube.side() <= params.full_pairs_max_side || eligible.len() <= params.sampled_pairs {
        return eligible;
    }
    let mut rng = StreamSeed::new(params.seed).rng();
    let mut idx = sample(&mut rng, eligible.len(), params.sampled_pairs).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|k| eligible[k]).collect()
}
