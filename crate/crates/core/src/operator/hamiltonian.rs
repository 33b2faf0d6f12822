use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::profile::SingleSiteProfile;
use crate::error::{Error, Result};
use crate::geometry::Cube;
use crate::point_process::Configuration;

/// −Δ_Λ + V on the interior nodes of a uniform grid, Dirichlet outside.
///
/// Nodes sit at `lower + i·h`, i = 1..n per axis, with n = L/h − 1. The
/// linear index runs fastest along axis 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteHamiltonian {
    cube: Cube,
    h: f64,
    n: usize,
    potential: Vec<f64>,
}

impl DiscreteHamiltonian {
    /// Dirichlet Laplacian with zero potential.
    pub fn free(cube: &Cube, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::invalid(format!("grid spacing must be positive, got {h}")));
        }
        let ratio = cube.side() / h;
        let cells = ratio.round();
        if (ratio - cells).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::invalid(format!("box side {} is not a multiple of h = {h}", cube.side())));
        }
        if cells < 2.0 {
            return Err(Error::invalid("grid has no interior nodes"));
        }
        let n = cells as usize - 1;
        let total = n
            .checked_pow(cube.dim() as u32)
            .ok_or_else(|| Error::invalid("grid too large"))?;
        Ok(Self { cube: cube.clone(), h, n, potential: vec![0.0; total] })
    }

    /// H_{X,(Y,t),Λ}: impurities of X at full strength and of Y scaled by t,
    /// only those inside the box contributing.
    pub fn assemble(
        cube: &Cube,
        x: &Configuration,
        y: &Configuration,
        t: &[f64],
        profile: &SingleSiteProfile,
        h: f64,
    ) -> Result<Self> {
        profile.validate()?;
        if h > profile.delta_minus / 4.0 * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "h = {h} does not resolve the single-site support (need h ≤ δ₋/4 = {})",
                profile.delta_minus / 4.0
            )));
        }
        if t.len() != y.len() {
            return Err(Error::invalid("one coefficient per free site required"));
        }
        if let Some(v) = t.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("free-site coefficient {v} outside [0, 1]")));
        }
        if !x.is_disjoint(y) {
            return Err(Error::invalid("X and Y must be disjoint"));
        }
        let mut ham = Self::free(cube, h)?;
        for p in x.points() {
            ham.add_impurity(p, 1.0, profile);
        }
        for (p, &tz) in y.points().iter().zip(t) {
            ham.add_impurity(p, tz, profile);
        }
        Ok(ham)
    }

    /// Adds `weight · u(· − ζ)` if ζ lies in the box.
    pub fn add_impurity(&mut self, zeta: &[f64], weight: f64, profile: &SingleSiteProfile) {
        if weight == 0.0 || !self.cube.contains(zeta) {
            return;
        }
        let d = self.dim();
        let reach = profile.reach() + 0.5 * self.h;
        let mut ranges = Vec::with_capacity(d);
        let mut factors: Vec<Vec<f64>> = Vec::with_capacity(d);
        for (axis, z) in zeta.iter().enumerate() {
            let lower = self.cube.lower(axis);
            let lo = (((z - reach - lower) / self.h).floor() as i64).max(1) as usize;
            let hi = (((z + reach - lower) / self.h).ceil() as i64).min(self.n as i64);
            if hi < lo as i64 {
                return;
            }
            let hi = hi as usize;
            factors.push(
                (lo..=hi)
                    .map(|i| profile.axis_average(lower + i as f64 * self.h - z, self.h))
                    .collect(),
            );
            ranges.push((lo, hi));
        }
        let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        loop {
            let mut v = weight * profile.u_plus;
            let mut lin = 0;
            let mut stride = 1;
            for a in 0..d {
                v *= factors[a][idx[a] - ranges[a].0];
                lin += (idx[a] - 1) * stride;
                stride *= self.n;
            }
            if v != 0.0 {
                self.potential[lin] += v;
            }
            let mut a = 0;
            while a < d {
                idx[a] += 1;
                if idx[a] <= ranges[a].1 {
                    break;
                }
                idx[a] = ranges[a].0;
                a += 1;
            }
            if a == d {
                break;
            }
        }
    }

    pub fn cube(&self) -> &Cube {
        &self.cube
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.cube.dim()
    }

    /// Interior nodes per axis.
    pub fn nodes_per_axis(&self) -> usize {
        self.n
    }

    /// Matrix dimension.
    pub fn size(&self) -> usize {
        self.potential.len()
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Copy with `c` added to the potential at every node.
    pub fn with_potential_shift(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.potential.iter_mut().for_each(|v| *v += c);
        out
    }

    /// Copy with an extra per-node potential.
    pub fn with_extra_potential(&self, extra: &[f64]) -> Result<Self> {
        if extra.len() != self.size() {
            return Err(Error::invalid("potential length mismatch"));
        }
        let mut out = self.clone();
        out.potential.iter_mut().zip(extra).for_each(|(v, e)| *v += e);
        Ok(out)
    }

    /// Multi-index (1-based per axis) of a linear index.
    pub fn node_index(&self, mut lin: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim());
        for _ in 0..self.dim() {
            out.push(lin % self.n + 1);
            lin /= self.n;
        }
        out
    }

    pub fn node_position(&self, lin: usize) -> Vec<f64> {
        self.node_index(lin)
            .iter()
            .enumerate()
            .map(|(a, i)| self.cube.lower(a) + *i as f64 * self.h)
            .collect()
    }

    /// Offset between linear indices of neighbours along each axis.
    pub fn strides(&self) -> Vec<usize> {
        (0..self.dim()).map(|a| self.n.pow(a as u32)).collect()
    }

    /// Linear indices of nodes inside the half-open window
    /// `center + [−side/2, side/2)^d`.
    pub fn window_nodes(&self, center: &[f64], side: f64) -> Vec<usize> {
        let d = self.dim();
        let mut ranges = Vec::with_capacity(d);
        for (a, c) in center.iter().enumerate() {
            let lower = self.cube.lower(a);
            let lo = ((c - 0.5 * side - lower) / self.h - 1e-9).ceil().max(1.0) as usize;
            let hi_f = ((c + 0.5 * side - lower) / self.h - 1e-9).ceil() - 1.0;
            let hi = hi_f.min(self.n as f64);
            if hi < lo as f64 {
                return Vec::new();
            }
            ranges.push((lo, hi as usize));
        }
        let strides = self.strides();
        let mut out = vec![0usize];
        for (a, (lo, hi)) in ranges.into_iter().enumerate() {
            let s = strides[a];
            out = out
                .into_iter()
                .flat_map(|base| (lo..=hi).map(move |i| base + (i - 1) * s))
                .collect();
        }
        out.sort_unstable();
        out
    }

    /// y = H x.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let inv_h2 = 1.0 / (self.h * self.h);
        let d = self.dim();
        let diag = 2.0 * d as f64 * inv_h2;
        let strides = self.strides();
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (diag + self.potential[i]) * x[i];
        }
        for &s in &strides {
            for i in 0..self.size() {
                let pos = (i / s) % self.n;
                if pos > 0 {
                    y[i] -= inv_h2 * x[i - s];
                }
                if pos + 1 < self.n {
                    y[i] -= inv_h2 * x[i + s];
                }
            }
        }
    }

    /// Nonzero entries (row, col, value), row-major, upper and lower parts.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let inv_h2 = 1.0 / (self.h * self.h);
        let diag = 2.0 * self.dim() as f64 * inv_h2;
        let strides = self.strides();
        let mut out = Vec::with_capacity(self.size() * (2 * self.dim() + 1));
        for i in 0..self.size() {
            let mut row: Vec<(usize, usize, f64)> = vec![(i, i, diag + self.potential[i])];
            for &s in &strides {
                let pos = (i / s) % self.n;
                if pos > 0 {
                    row.push((i, i - s, -inv_h2));
                }
                if pos + 1 < self.n {
                    row.push((i, i + s, -inv_h2));
                }
            }
            row.sort_by_key(|e| e.1);
            out.extend(row);
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    /// Half bandwidth of the matrix in the natural ordering.
    pub fn bandwidth(&self) -> usize {
        if self.dim() == 1 {
            1
        } else {
            self.n.pow(self.dim() as u32 - 1)
        }
    }

    /// Coordinate-format dump, one `row col value` line per nonzero
    /// (0-based indices).
    pub fn write_coo<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "% {} {} {}", self.size(), self.size(), self.triplets().len())?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{r} {c} {v:e}")?;
        }
        Ok(())
    }
}

/// Closed-form eigenvalues (4/h²)Σ sin²(πk_i h/(2L)) of the Dirichlet
/// five-point (2d+1-point) Laplacian, ascending.
pub fn free_dirichlet_eigenvalues(d: usize, side: f64, h: f64) -> Vec<f64> {
    let n = (side / h).round() as usize - 1;
    let one: Vec<f64> = (1..=n)
        .map(|k| {
            let s = (std::f64::consts::PI * k as f64 * h / (2.0 * side)).sin();
            4.0 / (h * h) * s * s
        })
        .collect();
    let mut out = vec![0.0];
    for _ in 0..d {
        out = out.iter().flat_map(|base| one.iter().map(move |v| base + v)).collect();
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out
}
